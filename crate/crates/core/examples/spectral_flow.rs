//! Spectral flow of an affine Hermitian path computed two ways, and the
//! degenerate-start formulas on a nilpotent example.

use nalgebra::DMatrix;
use relequil::linalg::to_complex;
use relequil::spectral_flow::{
    crossing_contributions, degenerate_start_flow, spectral_flow_endpoints, total_contribution, AffinePath, Side,
};

fn main() -> relequil::Result<()> {
    let base = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -0.5, 2.0, -3.0]);
    let dir = DMatrix::from_diagonal(&nalgebra::dvector![-1.0, 1.0, 1.0, 1.0]);
    let path = AffinePath::from_real(&base, &dir, 0.0, 4.0)?;
    let crossings = crossing_contributions(&path)?;
    for c in &crossings {
        println!("crossing at t = {:.6}: dim {}, contribution {:+}", c.t_star, c.generalized_eigenspace_dim, c.local_contribution);
    }
    println!("sum = {}, endpoint count = {}", total_contribution(&crossings), spectral_flow_endpoints(&path, false)?);

    // S L Hermitian with L a nilpotent Jordan block of size 2 plus an invertible part.
    let l = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
    let s = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
    let (s, l) = (to_complex(&s), to_complex(&l));
    for side in [Side::Right, Side::Left, Side::Both] {
        let f = degenerate_start_flow(&s, &l, side)?;
        println!("{side:?}: {} (epsilon {:.3})", f.value, f.epsilon);
    }
    Ok(())
}
