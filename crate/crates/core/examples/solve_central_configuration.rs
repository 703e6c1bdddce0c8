//! Solves the equal-mass Lagrange triangle and a mass-weighted square in R^4.

use relequil::central_config::{solve_cc, SolverOptions};
use relequil::nbody::{unflatten, MassSystem};
use relequil::presets::Preset;

fn main() -> relequil::Result<()> {
    let opts = SolverOptions::default();

    let sys = MassSystem::equal(3, 2)?;
    let cc = solve_cc(&sys, &Preset::Lagrange.seed(2)?, &opts)?;
    println!("lagrange: lambda = {:.15} (3^-3/2 = {:.15})", cc.lambda, 3f64.powf(-1.5));
    println!("  residual {:.2e} after {} iterations", cc.residual_norm, cc.iterations);

    let sys = MassSystem::new(&[1.0, 2.0, 1.0, 2.0], 4)?;
    let cc = solve_cc(&sys, &Preset::Square.seed(4)?, &opts)?;
    println!("weighted square: {:?}, inertia {:?}", cc.geometry, cc.inertia());
    for (i, row) in unflatten(&cc.q, 4).iter().enumerate() {
        println!("  body {i}: {row:?}");
    }
    Ok(())
}
