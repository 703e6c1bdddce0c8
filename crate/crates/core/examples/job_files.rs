//! Writes a job description to disk, runs it, and shows that a rerun gives
//! the same hash and an identical report.

use relequil::presets::Preset;
use relequil::report::{cmd_analyze, JobSpec, OutputKind};

fn main() -> relequil::Result<()> {
    let dir = std::env::temp_dir().join("relequil-job-example");
    let mut job = JobSpec::preset(Preset::Euler, 2).with_masses(&[1.0, 2.0, 3.0]);
    job.outputs.push(OutputKind::MatricesCsv);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("job.json"), serde_json::to_string_pretty(&job)?)?;

    let loaded = JobSpec::from_json(&std::fs::read_to_string(dir.join("job.json"))?)?;
    let first = cmd_analyze(&loaded, Some(&dir))?;
    let report = std::fs::read(dir.join("report.json"))?;
    let second = cmd_analyze(&loaded, Some(&dir))?;
    println!("hash {}", first.job_hash);
    println!("hashes equal: {}", first.job_hash == second.job_hash);
    println!("report.json unchanged: {}", report == std::fs::read(dir.join("report.json"))?);
    println!("files in {}:", dir.display());
    for entry in std::fs::read_dir(&dir)? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }
    Ok(())
}
