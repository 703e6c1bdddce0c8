//! Classifies the equal-mass Lagrange triangle, a Routh-regime triangle and
//! the regular tetrahedron.

use relequil::report::{cmd_analyze, JobSpec, ModeChoice};
use relequil::presets::Preset;

fn main() -> relequil::Result<()> {
    let jobs = [
        JobSpec::preset(Preset::Lagrange, 2),
        JobSpec::preset(Preset::Lagrange, 2).with_masses(&[0.99, 0.005, 0.005]),
        JobSpec::preset(Preset::Tetrahedron, 4).with_mode(ModeChoice::Double4),
    ];
    for job in &jobs {
        let r = cmd_analyze(job, None)?.payload.report;
        println!(
            "{:?} in {}: spectrally stable {}, max |Re| {:.3e}, n0(B3) {}",
            r.geometry, r.mode.as_str(), r.spectrally_stable, r.max_abs_real, r.n_zero_b3
        );
        for (k, v) in &r.theorem_verdicts {
            println!("  {k}: {v:?}");
        }
    }
    Ok(())
}
