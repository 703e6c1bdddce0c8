use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use relequil::presets::Preset;
use relequil::report::{
    cmd_analyze, cmd_integrals, cmd_parity_scan, cmd_solve_cc, path_flow, sflow_battery, write_json, JobSpec,
    ModeChoice, OutputKind, ParityFamily, ToleranceOverrides,
};
use relequil::spectral_flow::{degenerate_start_flow, Side};
use relequil::linalg::to_complex;
use relequil::{Error, Result};

#[derive(Parser)]
#[command(name = "relequil", version, about = "Central configurations and relative equilibria in R^4")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct JobArgs {
    /// JSON job file; other job flags are ignored when given.
    #[arg(long)]
    job: Option<PathBuf>,
    /// lagrange, euler, tetrahedron or square.
    #[arg(long)]
    preset: Option<Preset>,
    /// Seed positions as JSON, one row per body.
    #[arg(long, conflicts_with = "preset")]
    positions: Option<String>,
    /// Comma-separated masses; normalized to total 1.
    #[arg(long, value_delimiter = ',')]
    masses: Option<Vec<f64>>,
    #[arg(long, default_value_t = 4)]
    ambient: usize,
    /// auto, double4, simple4 or planar2.
    #[arg(long, default_value = "auto")]
    mode: ModeChoice,
    #[arg(long)]
    tol_cc: Option<f64>,
    #[arg(long)]
    tol_max_iters: Option<usize>,
    #[arg(long)]
    tol_collision: Option<f64>,
    /// Also write b3.csv, l3.csv and linearization.csv.
    #[arg(long)]
    matrices: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl JobArgs {
    fn job(&self) -> Result<JobSpec> {
        if let Some(path) = &self.job {
            return JobSpec::from_json(&std::fs::read_to_string(path)?);
        }
        let positions = match &self.positions {
            Some(text) => Some(serde_json::from_str(text)?),
            None => None,
        };
        let mut outputs = vec![OutputKind::Report, OutputKind::SpectrumCsv];
        if self.matrices {
            outputs.push(OutputKind::MatricesCsv);
        }
        let job = JobSpec {
            masses: self.masses.clone(),
            ambient_dim: self.ambient,
            mode: self.mode,
            preset: self.preset,
            positions,
            momenta: None,
            tolerances: ToleranceOverrides {
                cc: self.tol_cc,
                max_iters: self.tol_max_iters,
                collision_ratio: self.tol_collision,
            },
            outputs,
        };
        job.validate()?;
        Ok(job)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a central configuration.
    SolveCc(JobArgs),
    /// Full stability classification of the relative equilibrium.
    Analyze(JobArgs),
    /// Parity test over seeded random matrices.
    ParityScan {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// positive-definite, degenerate, generic or mixed.
        #[arg(long, default_value = "mixed")]
        family: ParityFamily,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Spectral flow checks: a random battery, or one path or pair from CSV files.
    SflowCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        paths: usize,
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        /// Path base matrix; requires --direction.
        #[arg(long, requires = "direction")]
        base: Option<PathBuf>,
        #[arg(long)]
        direction: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        to: f64,
        /// Degenerate-start pair; requires --l.
        #[arg(long, requires = "l")]
        s: Option<PathBuf>,
        #[arg(long)]
        l: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Integrals of motion and their independence at a phase point.
    Integrals {
        #[command(flatten)]
        job: JobArgs,
        /// Momenta as JSON, one row per body; defaults to the relative equilibrium.
        #[arg(long)]
        momenta: Option<String>,
    },
}

fn emit<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn save<T: Serialize>(dir: Option<&Path>, name: &str, value: &T) -> Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join(name), value)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SolveCc(a) => emit(&cmd_solve_cc(&a.job()?, a.out_dir.as_deref())?.payload),
        Command::Analyze(a) => {
            let rec = cmd_analyze(&a.job()?, a.out_dir.as_deref())?;
            emit(&rec.payload.report)
        }
        Command::ParityScan { count, dim, seed, family, out_dir } => {
            emit(&cmd_parity_scan(count, dim, seed, family, out_dir.as_deref())?.payload)
        }
        Command::SflowCheck { seed, paths, pairs, base, direction, from, to, s, l, out_dir } => {
            if let (Some(b), Some(c)) = (base, direction) {
                let rec = path_flow(
                    &relequil::report::read_matrix_csv(&b)?,
                    &relequil::report::read_matrix_csv(&c)?,
                    from,
                    to,
                )?;
                save(out_dir.as_deref(), "sflow_path.json", &rec)?;
                return emit(&rec);
            }
            if let (Some(s), Some(l)) = (s, l) {
                let s = to_complex(&relequil::report::read_matrix_csv(&s)?);
                let l = to_complex(&relequil::report::read_matrix_csv(&l)?);
                let out: Vec<_> = [Side::Right, Side::Left, Side::Both]
                    .into_iter()
                    .map(|side| degenerate_start_flow(&s, &l, side))
                    .collect::<Result<_>>()?;
                save(out_dir.as_deref(), "sflow_degenerate.json", &out)?;
                return emit(&out);
            }
            let summary = sflow_battery(paths, (4, 12), pairs, seed);
            save(out_dir.as_deref(), "sflow_battery.json", &summary)?;
            emit(&summary)?;
            if summary.path_mismatches + summary.pair_mismatches > 0 {
                return Err(Error::InvarianceViolation {
                    what: "spectral flow identity".into(),
                    residual: (summary.path_mismatches + summary.pair_mismatches) as f64,
                    bound: 0.0,
                });
            }
            Ok(())
        }
        Command::Integrals { job, momenta } => {
            let mut spec = job.job()?;
            if let Some(text) = momenta {
                spec.momenta = Some(serde_json::from_str(&text)?);
            }
            emit(&cmd_integrals(&spec, job.out_dir.as_deref())?.payload)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RELEQUIL_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let diag = serde_json::json!({ "error": e.to_string(), "exit_code": code });
            eprintln!("{diag}");
            ExitCode::from(code as u8)
        }
    }
}
