//! Integrals of motion at a relative equilibrium and their drift under RK4.

use relequil::central_config::{align_to_axes, solve_cc, CentralConfiguration, SolverOptions};
use relequil::conserved::{evaluate_integrals, independence_test, noether_drift, relative_equilibrium_phase_point};
use relequil::nbody::MassSystem;
use relequil::presets::Preset;
use relequil::rotating_frame::FrameMode;

fn main() -> relequil::Result<()> {
    let sys = MassSystem::equal(4, 4)?;
    let cc = solve_cc(&sys, &Preset::Tetrahedron.seed(4)?, &SolverOptions::default())?;
    let cc = CentralConfiguration::from_configuration(&sys, &align_to_axes(&sys, &cc.q)?, 1e-9)?;
    let x = relative_equilibrium_phase_point(&cc, FrameMode::Double4)?;

    let ints = evaluate_integrals(&sys, &x)?;
    println!("energy {:.12}, angular momenta {:?}", ints.energy, ints.angular);
    let ind = independence_test(&sys, &x)?;
    println!("rank {} of {}, coplanar {}", ind.rank, ind.columns, ind.coplanar);

    let drift = noether_drift(&sys, &x, 1.0, 1e-3)?;
    println!("max drift over unit time: {:.2e}", drift.max());
    Ok(())
}
