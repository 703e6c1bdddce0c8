//! Splits the phase space of three relative equilibria into E1 + E2 + E3 and
//! prints the dimension of the reduced block together with the cross-checks.

use relequil::central_config::{align_to_axes, solve_cc, CentralConfiguration, SolverOptions};
use relequil::nbody::MassSystem;
use relequil::presets::Preset;
use relequil::rotating_frame::{linearize, FrameMode};
use relequil::symplectic::decompose;

fn main() -> relequil::Result<()> {
    let runs = [
        (Preset::Lagrange, 2, FrameMode::Planar2),
        (Preset::Lagrange, 4, FrameMode::Simple4),
        (Preset::Euler, 4, FrameMode::Double4),
        (Preset::Tetrahedron, 4, FrameMode::Double4),
    ];
    for (preset, d, mode) in runs {
        let sys = MassSystem::equal(preset.bodies(), d)?;
        let cc = solve_cc(&sys, &preset.seed(d)?, &SolverOptions::default())?;
        let cc = CentralConfiguration::from_configuration(&sys, &align_to_axes(&sys, &cc.q)?, 1e-9)?;
        let split = decompose(&linearize(&cc, mode)?)?;
        let c = &split.checks;
        println!(
            "{:<12} {:<8} {:?}: dim B3 = {}, A^T M A - I = {:.1e}, AK - KA = {:.1e}, hausdorff = {:.1e}",
            preset.name(),
            mode.as_str(),
            split.case,
            split.dim(),
            c.a_orthogonality,
            c.a_commutation,
            c.spectrum_union_hausdorff
        );
    }
    Ok(())
}
