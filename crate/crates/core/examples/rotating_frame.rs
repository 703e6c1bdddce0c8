//! Builds the rotating-frame linearization of the tetrahedral relative
//! equilibrium and checks its Hamiltonian structure.

use relequil::central_config::{solve_cc, SolverOptions};
use relequil::linalg::{clustered_spectrum, to_complex};
use relequil::nbody::MassSystem;
use relequil::presets::Preset;
use relequil::rotating_frame::{linearize, FrameMode};

fn main() -> relequil::Result<()> {
    let sys = MassSystem::equal(4, 4)?;
    let cc = solve_cc(&sys, &Preset::Tetrahedron.seed(4)?, &SolverOptions::default())?;
    let ls = linearize(&cc, FrameMode::Double4)?;

    let j = ls.j();
    let asym = (&ls.b - ls.b.transpose()).amax();
    let identity = (&ls.l + &j * &ls.b).amax();
    println!("k = {:.12}, ||B - B^T|| = {asym:.1e}, ||L + JB|| = {identity:.1e}", ls.k_speed);
    println!("trace L = {:.1e}", ls.l.trace());
    for c in clustered_spectrum(&to_complex(&ls.l))? {
        println!("  {:+.6} {:+.6}i  x{}", c.re, c.im, c.algebraic);
    }
    Ok(())
}
