//! Runs the parity test on the two degenerate diagonal matrices and on a
//! random Krein-stable matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relequil::spectral_flow::{families, parity_check};

fn main() {
    let mut matrices = families::curated();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    matrices.push(("random positive definite", families::positive_definite(&mut rng, 4)));
    for (name, a) in matrices {
        let v = parity_check(&a, a.nrows() / 2);
        println!(
            "{name}: {:?}, n-(A) = {}, genker dim = {:?}, n-(A|genker) = {:?}",
            v.status, v.n_minus, v.genker_dim, v.n_minus_restricted
        );
    }
}
