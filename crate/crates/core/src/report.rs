//! Job descriptions, the command implementations behind the CLI, and JSON
//! and CSV persistence.
//!
//! JSON files carry structured records; CSV files carry matrices and spectra
//! with 17 significant digits. A job's `report.json` contains only
//! deterministic data; timing lives in `run.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::central_config::{align_to_axes, solve_cc, CentralConfiguration, Geometry, SolverOptions};
use crate::conserved::{
    evaluate_integrals, independence_test, relative_equilibrium_phase_point, IndependenceReport,
    IntegralSet,
};
use crate::error::{Error, Result};
use crate::linalg::{
    clustered_spectrum, to_complex, InertiaTriple, CLUSTER_RESOLUTION, INERTIA_REL, RANK_REL,
};
use crate::nbody::{flatten, unflatten, MassSystem, PhasePoint};
use crate::presets::Preset;
use crate::rotating_frame::{linearize, FrameMode};
use crate::spectral_flow::{
    crossing_contributions, degenerate_start_flow, families, parity_check,
    spectral_flow_endpoints, total_contribution, AffinePath, CrossingDatum, ParityStatus, Side,
    IMAGINARY_TOL,
};
use crate::stability::{classify, StabilityReport, SPECTRAL_TOL};
use crate::symplectic::decompose;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Frame mode requested by a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    #[default]
    Auto,
    Double4,
    Simple4,
    Planar2,
}

impl std::str::FromStr for ModeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ModeChoice::Auto),
            other => Ok(match other.parse::<FrameMode>()? {
                FrameMode::Double4 => ModeChoice::Double4,
                FrameMode::Simple4 => ModeChoice::Simple4,
                FrameMode::Planar2 => ModeChoice::Planar2,
            }),
        }
    }
}

/// Files a job may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Report,
    SpectrumCsv,
    MatricesCsv,
}

/// Optional overrides of the solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub cc: Option<f64>,
    pub max_iters: Option<usize>,
    pub collision_ratio: Option<f64>,
}

/// One unit of work for `solve-cc`, `analyze` or `integrals`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    /// Defaults to equal masses when a preset is used.
    #[serde(default)]
    pub masses: Option<Vec<f64>>,
    pub ambient_dim: usize,
    #[serde(default)]
    pub mode: ModeChoice,
    #[serde(default)]
    pub preset: Option<Preset>,
    /// Seed positions, one row per body.
    #[serde(default)]
    pub positions: Option<Vec<Vec<f64>>>,
    /// Momenta for `integrals`; when absent the relative equilibrium of the
    /// solved configuration is used.
    #[serde(default)]
    pub momenta: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Report, OutputKind::SpectrumCsv]
}

impl JobSpec {
    pub fn preset(preset: Preset, ambient_dim: usize) -> Self {
        Self {
            masses: None,
            ambient_dim,
            mode: ModeChoice::Auto,
            preset: Some(preset),
            positions: None,
            momenta: None,
            tolerances: ToleranceOverrides::default(),
            outputs: default_outputs(),
        }
    }

    pub fn with_masses(mut self, masses: &[f64]) -> Self {
        self.masses = Some(masses.to_vec());
        self
    }

    pub fn with_mode(mut self, mode: ModeChoice) -> Self {
        self.mode = mode;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let job: JobSpec = serde_json::from_str(text)?;
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim != 2 && self.ambient_dim != 4 {
            return Err(Error::Input(format!("ambient dimension must be 2 or 4, got {}", self.ambient_dim)));
        }
        match (&self.preset, &self.positions) {
            (Some(_), Some(_)) => return Err(Error::Input("preset and positions are mutually exclusive".into())),
            (None, None) => return Err(Error::Input("either a preset or positions is required".into())),
            _ => {}
        }
        if let Some(m) = &self.masses {
            if let Some(bad) = m.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                return Err(Error::InvalidMasses(format!("mass {bad} is not positive")));
            }
        }
        let mode_dim = match self.mode {
            ModeChoice::Auto => None,
            ModeChoice::Planar2 => Some(2),
            _ => Some(4),
        };
        if let Some(d) = mode_dim {
            if d != self.ambient_dim {
                return Err(Error::ModeMismatch(format!(
                    "mode needs ambient dimension {d}, job has {}",
                    self.ambient_dim
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("job specs always serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(t) = self.tolerances.cc {
            o.tol = t;
        }
        if let Some(t) = self.tolerances.max_iters {
            o.max_iters = t;
        }
        if let Some(t) = self.tolerances.collision_ratio {
            o.collision_ratio = t;
        }
        o
    }

    pub fn system(&self) -> Result<MassSystem> {
        self.validate()?;
        let n = match (&self.preset, &self.positions) {
            (Some(p), _) => p.bodies(),
            (_, Some(pos)) => pos.len(),
            _ => unreachable!("validated"),
        };
        let masses = self.masses.clone().unwrap_or_else(|| vec![1.0; n]);
        if masses.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: masses.len(),
            });
        }
        MassSystem::new(&masses, self.ambient_dim)
    }

    pub fn seed(&self) -> Result<DVector<f64>> {
        match (&self.preset, &self.positions) {
            (Some(p), _) => p.seed(self.ambient_dim),
            (_, Some(pos)) => {
                let q = flatten(pos)?;
                if pos.first().map(Vec::len) != Some(self.ambient_dim) {
                    return Err(Error::DimensionMismatch {
                        expected: self.ambient_dim,
                        got: pos.first().map(Vec::len).unwrap_or(0),
                    });
                }
                Ok(q)
            }
            _ => Err(Error::Input("either a preset or positions is required".into())),
        }
    }
}

/// Every tolerance in force for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRecord {
    pub solver: SolverOptions,
    pub rank_rel: f64,
    pub inertia_rel: f64,
    pub cluster_resolution: f64,
    pub spectral_tol: f64,
    pub imaginary_tol: f64,
}

impl ToleranceRecord {
    pub fn new(solver: SolverOptions) -> Self {
        Self {
            solver,
            rank_rel: RANK_REL,
            inertia_rel: INERTIA_REL,
            cluster_resolution: CLUSTER_RESOLUTION,
            spectral_tol: SPECTRAL_TOL,
            imaginary_tol: IMAGINARY_TOL,
        }
    }
}

/// Provenance wrapper around a command's payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord<T> {
    pub command: String,
    pub job_hash: String,
    pub tool_version: String,
    pub tolerances: ToleranceRecord,
    pub payload: T,
    pub elapsed_ms: f64,
}

/// Output of `solve-cc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcRecord {
    pub masses: Vec<f64>,
    pub ambient_dim: usize,
    pub positions: Vec<Vec<f64>>,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub geometry: Geometry,
    pub rank: usize,
    pub inertia: InertiaTriple,
    pub orbit_tangent_dim: usize,
    pub morse_bott: bool,
}

impl CcRecord {
    pub fn from_cc(cc: &CentralConfiguration) -> Self {
        Self {
            masses: cc.system.masses().to_vec(),
            ambient_dim: cc.dim(),
            positions: unflatten(&cc.q, cc.dim()),
            lambda: cc.lambda,
            residual: cc.residual_norm,
            iterations: cc.iterations,
            geometry: cc.geometry,
            rank: cc.rank,
            inertia: cc.inertia(),
            orbit_tangent_dim: cc.orbit_tangent_dim,
            morse_bott: cc.morse_bott(),
        }
    }
}

/// Solves the job's central configuration and rotates it onto the leading axes.
pub fn solve_job(job: &JobSpec) -> Result<CentralConfiguration> {
    let sys = job.system()?;
    let seed = job.seed()?;
    let opts = job.solver_options();
    let cc = solve_cc(&sys, &seed, &opts)?;
    let q = align_to_axes(&sys, &cc.q)?;
    let aligned = CentralConfiguration::from_configuration(&sys, &q, (cc.residual_norm * 10.0).max(opts.tol))?;
    info!(
        "solved {} bodies in {} iterations: lambda {:.17e}, residual {:e}, {:?}",
        sys.n(),
        cc.iterations,
        aligned.lambda,
        aligned.residual_norm,
        aligned.geometry
    );
    Ok(CentralConfiguration {
        iterations: cc.iterations,
        ..aligned
    })
}

/// `auto` becomes `planar2` in the plane, `double4` for spatial
/// configurations and `simple4` for planar or collinear ones in R^4.
pub fn resolve_mode(choice: ModeChoice, cc: &CentralConfiguration) -> FrameMode {
    match choice {
        ModeChoice::Double4 => FrameMode::Double4,
        ModeChoice::Simple4 => FrameMode::Simple4,
        ModeChoice::Planar2 => FrameMode::Planar2,
        ModeChoice::Auto if cc.dim() == 2 => FrameMode::Planar2,
        ModeChoice::Auto if cc.geometry == Geometry::SpatialNonplanar => FrameMode::Double4,
        ModeChoice::Auto => FrameMode::Simple4,
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a matrix as headerless CSV with 17 significant digits.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|x| fmt17(*x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headerless CSV of reals.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Input(format!("{}: '{s}': {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: ncols,
            got: bad.len(),
        });
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

/// One row of the spectrum CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub re: f64,
    pub im: f64,
    pub block: String,
}

pub fn write_spectrum_csv(path: &Path, rows: &[SpectrumRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["re", "im", "block"])?;
    for r in rows {
        w.write_record([fmt17(r.re), fmt17(r.im), r.block.clone()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

fn record<T>(command: &str, hash: String, solver: SolverOptions, payload: T, start: Instant) -> RunRecord<T> {
    RunRecord {
        command: command.to_string(),
        job_hash: hash,
        tool_version: TOOL_VERSION.to_string(),
        tolerances: ToleranceRecord::new(solver),
        payload,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// `solve-cc`: writes `cc.json` and `run.json` into `out_dir` when given.
pub fn cmd_solve_cc(job: &JobSpec, out_dir: Option<&Path>) -> Result<RunRecord<CcRecord>> {
    let start = Instant::now();
    let cc = solve_job(job)?;
    let rec = record("solve-cc", job.hash(), job.solver_options(), CcRecord::from_cc(&cc), start);
    if let Some(dir) = out_dir {
        let dir = ensure_dir(dir)?;
        write_json(&dir.join("cc.json"), &rec.payload)?;
        write_json(&dir.join("run.json"), &rec)?;
    }
    Ok(rec)
}

/// Output of `analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeRecord {
    pub cc: CcRecord,
    pub report: StabilityReport,
    pub spectrum: Vec<SpectrumRow>,
}

/// Eigenvalues of `L` restricted to `E1`, `E2` and `E3`.
fn block_spectrum(restrictions: [(&str, &DMatrix<f64>); 3]) -> Result<Vec<SpectrumRow>> {
    let mut rows = Vec::new();
    for (name, m) in restrictions {
        for c in clustered_spectrum(&to_complex(m))? {
            for _ in 0..c.algebraic {
                rows.push(SpectrumRow {
                    re: c.re,
                    im: c.im,
                    block: name.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

/// `analyze`: classification report, spectrum CSV and optional matrices.
pub fn cmd_analyze(job: &JobSpec, out_dir: Option<&Path>) -> Result<RunRecord<AnalyzeRecord>> {
    let start = Instant::now();
    let cc = solve_job(job)?;
    let mode = resolve_mode(job.mode, &cc);
    info!("analyzing in mode {}", mode.as_str());
    let report = classify(&cc, mode)?;
    for a in &report.alerts {
        log::error!("contradiction alert: {a}");
    }
    let ls = linearize(&cc, mode)?;
    let split = decompose(&ls)?;
    let spectrum = block_spectrum([
        ("E1", &split.e1.restriction),
        ("E2", &split.e2.restriction),
        ("E3", &split.l3),
    ])?;
    let payload = AnalyzeRecord {
        cc: CcRecord::from_cc(&cc),
        report,
        spectrum,
    };
    let rec = record("analyze", job.hash(), job.solver_options(), payload, start);
    if let Some(dir) = out_dir {
        let dir = ensure_dir(dir)?;
        write_json(&dir.join("run.json"), &rec)?;
        for out in &job.outputs {
            match out {
                OutputKind::Report => write_json(&dir.join("report.json"), &rec.payload)?,
                OutputKind::SpectrumCsv => write_spectrum_csv(&dir.join("spectrum.csv"), &rec.payload.spectrum)?,
                OutputKind::MatricesCsv => {
                    write_matrix_csv(&dir.join("b3.csv"), &split.b3)?;
                    write_matrix_csv(&dir.join("l3.csv"), &split.l3)?;
                    write_matrix_csv(&dir.join("linearization.csv"), &ls.l)?;
                }
            }
        }
    }
    Ok(rec)
}

/// Matrix families for `parity-scan`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityFamily {
    /// Symmetric positive definite draws.
    PositiveDefinite,
    /// Degenerate diagonal models under random symplectic congruence.
    Degenerate,
    /// Generic symmetric draws, which usually violate the hypothesis.
    Generic,
    /// Alternating positive definite and degenerate draws.
    Mixed,
}

impl std::str::FromStr for ParityFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive-definite" => Ok(Self::PositiveDefinite),
            "degenerate" => Ok(Self::Degenerate),
            "generic" => Ok(Self::Generic),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::Input(format!("unknown matrix family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityFailure {
    pub label: String,
    pub matrix: Vec<Vec<f64>>,
    pub status: ParityStatus,
    pub note: Option<String>,
}

/// Output of `parity-scan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityScanSummary {
    pub count: usize,
    pub dim: usize,
    pub rng_seed: u64,
    pub family: ParityFamily,
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
    pub unresolved: usize,
    /// Status of each fixed reference matrix.
    pub curated: BTreeMap<String, ParityStatus>,
    /// Failing and unresolved matrices, dumped in full.
    pub failures: Vec<ParityFailure>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// `parity-scan`: runs the parity test over `count` seeded random matrices
/// of size `dim` plus the fixed reference matrices.
pub fn cmd_parity_scan(
    count: usize,
    dim: usize,
    rng_seed: u64,
    family: ParityFamily,
    out_dir: Option<&Path>,
) -> Result<RunRecord<ParityScanSummary>> {
    let start = Instant::now();
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::Input(format!("dimension must be even and positive, got {dim}")));
    }
    let p = dim / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut summary = ParityScanSummary {
        count,
        dim,
        rng_seed,
        family,
        pass: 0,
        fail: 0,
        not_applicable: 0,
        unresolved: 0,
        curated: BTreeMap::new(),
        failures: Vec::new(),
    };
    for (name, a) in families::curated() {
        let v = parity_check(&a, a.nrows() / 2);
        if !matches!(v.status, ParityStatus::Pass | ParityStatus::NotApplicable) {
            summary.failures.push(ParityFailure {
                label: name.to_string(),
                matrix: rows(&a),
                status: v.status,
                note: v.note.clone(),
            });
        }
        summary.curated.insert(name.to_string(), v.status);
    }
    for i in 0..count {
        let a = match family {
            ParityFamily::PositiveDefinite => families::positive_definite(&mut rng, p),
            ParityFamily::Degenerate => families::stable_degenerate(&mut rng, p),
            ParityFamily::Generic => families::random_symmetric(&mut rng, dim),
            ParityFamily::Mixed if i % 2 == 0 => families::positive_definite(&mut rng, p),
            ParityFamily::Mixed => families::stable_degenerate(&mut rng, p),
        };
        let v = parity_check(&a, p);
        match v.status {
            ParityStatus::Pass => summary.pass += 1,
            ParityStatus::NotApplicable => summary.not_applicable += 1,
            ParityStatus::Fail | ParityStatus::Unresolved => {
                if v.status == ParityStatus::Fail {
                    summary.fail += 1;
                } else {
                    summary.unresolved += 1;
                }
                summary.failures.push(ParityFailure {
                    label: format!("draw {i}"),
                    matrix: rows(&a),
                    status: v.status,
                    note: v.note,
                });
            }
        }
    }
    let hash = hex::encode(Sha256::digest(
        format!("parity-scan {count} {dim} {rng_seed} {family:?}").as_bytes(),
    ));
    let rec = record("parity-scan", hash, SolverOptions::default(), summary, start);
    if let Some(dir) = out_dir {
        let dir = ensure_dir(dir)?;
        write_json(&dir.join("parity_scan.json"), &rec.payload)?;
        write_json(&dir.join("run.json"), &rec)?;
        for (k, f) in rec.payload.failures.iter().enumerate() {
            let m = DMatrix::from_row_iterator(f.matrix.len(), f.matrix.len(), f.matrix.iter().flatten().copied());
            write_matrix_csv(&dir.join(format!("parity_failure_{k}.csv")), &m)?;
        }
    }
    Ok(rec)
}

/// Spectral flow of one path given by files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFlowRecord {
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub endpoint_flow: i64,
    pub crossings: Vec<CrossingDatum>,
    pub crossing_sum: i64,
    pub agree: bool,
}

/// Output of the randomized `sflow-check` battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SflowBatterySummary {
    pub rng_seed: u64,
    pub paths: usize,
    pub path_dims: (usize, usize),
    pub path_mismatches: usize,
    pub path_errors: Vec<String>,
    pub pairs: usize,
    pub pair_mismatches: usize,
    pub pair_errors: Vec<String>,
}

/// Degenerate-start formulas for all three sides against inertia counts at
/// `0` and `+-epsilon`; returns the number of mismatching sides.
pub fn degenerate_start_mismatches(s: &crate::linalg::CMat, l: &crate::linalg::CMat) -> Result<usize> {
    use crate::linalg::{hermitian_inertia, C64};
    let count = |t: f64| hermitian_inertia(&(s * l + s * C64::new(t, 0.0)), INERTIA_REL).triple.n_minus as i64;
    let right = degenerate_start_flow(s, l, Side::Right)?;
    let eps = right.epsilon;
    let (m0, mp, mm) = (count(0.0), count(eps), count(-eps));
    let left = degenerate_start_flow(s, l, Side::Left)?.value;
    let both = degenerate_start_flow(s, l, Side::Both)?.value;
    Ok(usize::from(right.value != m0 - mp) + usize::from(left != mm - m0) + usize::from(both != mm - mp))
}

/// Randomized check of the crossing formula and the degenerate-start formulas.
pub fn sflow_battery(
    paths: usize,
    dims: (usize, usize),
    pairs: usize,
    rng_seed: u64,
) -> SflowBatterySummary {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut s = SflowBatterySummary {
        rng_seed,
        paths,
        path_dims: dims,
        path_mismatches: 0,
        path_errors: Vec::new(),
        pairs,
        pair_mismatches: 0,
        pair_errors: Vec::new(),
    };
    let span = dims.1.saturating_sub(dims.0) + 1;
    for i in 0..paths {
        let n = dims.0 + i % span;
        let path = families::random_affine_path(&mut rng, n);
        match crossing_contributions(&path).and_then(|c| Ok((c, spectral_flow_endpoints(&path, false)?))) {
            Ok((c, e)) if total_contribution(&c) == e => {}
            Ok(_) => s.path_mismatches += 1,
            Err(e) => s.path_errors.push(format!("path {i}: {e}")),
        }
    }
    for i in 0..pairs {
        let n = dims.0 + i % span;
        let (sm, lm) = families::fitting_pair(&mut rng, n);
        match degenerate_start_mismatches(&sm, &lm) {
            Ok(0) => {}
            Ok(_) => s.pair_mismatches += 1,
            Err(e) => s.pair_errors.push(format!("pair {i}: {e}")),
        }
    }
    s
}

/// Crossings and endpoint flow of `base + t direction` on `[a, b]`.
pub fn path_flow(base: &DMatrix<f64>, direction: &DMatrix<f64>, a: f64, b: f64) -> Result<PathFlowRecord> {
    let path = AffinePath::from_real(base, direction, a, b)?;
    let endpoint_flow = spectral_flow_endpoints(&path, false)?;
    let crossings = crossing_contributions(&path)?;
    let crossing_sum = total_contribution(&crossings);
    Ok(PathFlowRecord {
        dim: path.dim(),
        a,
        b,
        endpoint_flow,
        crossing_sum,
        agree: crossing_sum == endpoint_flow,
        crossings,
    })
}

/// Output of `integrals`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralsRecord {
    pub phase_point: PhasePoint,
    /// `true` when momenta were taken from the relative equilibrium.
    pub relative_equilibrium: bool,
    pub integrals: IntegralSet,
    pub independence: IndependenceReport,
}

/// `integrals`: values, 14 and 15 column ranks and the coplanarity verdict.
pub fn cmd_integrals(job: &JobSpec, out_dir: Option<&Path>) -> Result<RunRecord<IntegralsRecord>> {
    let start = Instant::now();
    let sys = job.system()?;
    let (x, from_re) = match &job.momenta {
        Some(m) => (PhasePoint::new(job.seed()?, flatten(m)?)?, false),
        None => {
            let cc = solve_job(job)?;
            let mode = resolve_mode(job.mode, &cc);
            (relative_equilibrium_phase_point(&cc, mode)?, true)
        }
    };
    if x.p.len() != sys.size() {
        return Err(Error::DimensionMismatch {
            expected: sys.size(),
            got: x.p.len(),
        });
    }
    let integrals = evaluate_integrals(&sys, &x)?;
    let independence = independence_test(&sys, &x)?;
    let payload = IntegralsRecord {
        phase_point: x,
        relative_equilibrium: from_re,
        integrals,
        independence,
    };
    let rec = record("integrals", job.hash(), job.solver_options(), payload, start);
    if let Some(dir) = out_dir {
        let dir = ensure_dir(dir)?;
        write_json(&dir.join("integrals.json"), &rec.payload)?;
        write_json(&dir.join("run.json"), &rec)?;
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn job_validation() {
        let job = JobSpec::preset(Preset::Lagrange, 2).with_masses(&[1.0, -1.0, 1.0]);
        assert!(matches!(job.system(), Err(Error::InvalidMasses(_))));
        assert_eq!(job.system().unwrap_err().exit_code(), 1);
        let mut both = JobSpec::preset(Preset::Euler, 2);
        both.positions = Some(vec![vec![0.0, 0.0]]);
        assert!(both.validate().is_err());
        assert!(JobSpec::preset(Preset::Euler, 2).with_mode(ModeChoice::Double4).validate().is_err());
        assert!(JobSpec::from_json(r#"{"ambient_dim": 2, "preset": "euler", "bogus": 1}"#).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = JobSpec::preset(Preset::Square, 4);
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), a.clone().with_masses(&[1.0, 1.0, 1.0, 2.0]).hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn json_round_trip() {
        let job = JobSpec::preset(Preset::Tetrahedron, 4).with_masses(&[1.0, 2.0, 3.0, 4.0]);
        let back: JobSpec = serde_json::from_str(&serde_json::to_string(&job).unwrap()).unwrap();
        assert_eq!(job, back);
        let rec = cmd_solve_cc(&JobSpec::preset(Preset::Lagrange, 2), None).unwrap();
        let text = serde_json::to_string(&rec).unwrap();
        let back: RunRecord<CcRecord> = serde_json::from_str(&text).unwrap();
        assert_eq!(rec, back);
    }

    #[test]
    fn csv_round_trip_keeps_every_bit() {
        let dir = tempfile::tempdir().unwrap();
        let m = DMatrix::from_row_slice(2, 3, &[1.0 / 3.0, -2e-300, 7.0, f64::MIN_POSITIVE, 0.1, -0.0]);
        let path = dir.path().join("m.csv");
        write_matrix_csv(&path, &m).unwrap();
        assert_eq!(read_matrix_csv(&path).unwrap(), m);
    }
}
