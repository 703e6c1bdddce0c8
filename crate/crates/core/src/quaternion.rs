//! Real 4x4 forms of the quaternion units and the rotation generators of R^4.

use nalgebra::{DMatrix, Matrix4};

/// Left multiplication by the quaternion unit `i`.
pub fn qi() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Left multiplication by the quaternion unit `j`.
pub fn qj() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

/// Left multiplication by the quaternion unit `k`.
pub fn qk() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0,
    )
}

/// Right multiplication by `i`; commutes with the three left units.
pub fn qi_right() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    )
}

/// `n` copies of a square block along the diagonal.
pub fn block_diag(block: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let b = block.nrows();
    let mut m = DMatrix::zeros(b * n, b * n);
    for i in 0..n {
        m.view_mut((i * b, i * b), (b, b)).copy_from(block);
    }
    m
}

pub fn dyn4(m: &Matrix4<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

/// The generator `k_lr` of rotations in the `(l, r)` coordinate plane of
/// R^d (zero based): entry `(l, r)` is `-1` and `(r, l)` is `+1`.
pub fn plane_generator(d: usize, l: usize, r: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    m[(l, r)] = -1.0;
    m[(r, l)] = 1.0;
    m
}

/// The block-diagonal action of a `d x d` matrix on `n` bodies.
pub fn on_bodies(m: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    block_diag(m, n)
}

/// Left quaternion multiplications acting body by body on R^{4n}.
#[derive(Debug, Clone)]
pub struct QuaternionAction {
    pub i: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl QuaternionAction {
    pub fn new(n: usize) -> Self {
        Self {
            i: block_diag(&dyn4(&qi()), n),
            j: block_diag(&dyn4(&qj()), n),
            k: block_diag(&dyn4(&qk()), n),
        }
    }
}
