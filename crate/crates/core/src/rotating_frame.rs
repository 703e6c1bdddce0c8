//! Rotating frames and the linearization of a circular relative equilibrium.
//!
//! The symplectic convention is fixed once: `J(q, p) = (-p, q)`, so that
//! `B = J L` and `L = -J B`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::central_config::CentralConfiguration;
use crate::error::{Error, Result};
use crate::linalg::symplectic_j;
use crate::quaternion::{block_diag, dyn4, qi};

/// How the relative equilibrium rotates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameMode {
    /// Double rotation of R^4 with equal angular speeds on both planes.
    Double4,
    /// Simple rotation of the `(x, y)` plane of R^4, fixing `(z, w)`.
    Simple4,
    /// Rotation of the plane.
    Planar2,
}

impl FrameMode {
    pub fn ambient_dim(self) -> usize {
        match self {
            FrameMode::Planar2 => 2,
            _ => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FrameMode::Double4 => "double4",
            FrameMode::Simple4 => "simple4",
            FrameMode::Planar2 => "planar2",
        }
    }
}

impl std::str::FromStr for FrameMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double4" => Ok(FrameMode::Double4),
            "simple4" => Ok(FrameMode::Simple4),
            "planar2" => Ok(FrameMode::Planar2),
            other => Err(Error::Input(format!("unknown frame mode '{other}'"))),
        }
    }
}

/// The rotation generator for one body.
pub fn body_generator(mode: FrameMode, k: f64) -> DMatrix<f64> {
    match mode {
        FrameMode::Double4 => dyn4(&qi()) * k,
        FrameMode::Simple4 => {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 1)] = -k;
            m[(1, 0)] = k;
            m
        }
        FrameMode::Planar2 => DMatrix::from_row_slice(2, 2, &[0.0, -k, k, 0.0]),
    }
}

/// Block-diagonal rotation generator for `n` bodies.
pub fn build_k(mode: FrameMode, k: f64, n: usize) -> DMatrix<f64> {
    block_diag(&body_generator(mode, k), n)
}

/// Linearized Hamiltonian system in the rotating frame.
#[derive(Debug, Clone)]
pub struct LinearizedSystem {
    pub mode: FrameMode,
    pub k_speed: f64,
    /// Rotation generator `K` on configuration space.
    pub k: DMatrix<f64>,
    /// Hamiltonian matrix `[[K, M^{-1}], [D^2U, K]]`.
    pub l: DMatrix<f64>,
    /// Symmetric matrix `J L = [[-D^2U, -K], [K, M^{-1}]]`.
    pub b: DMatrix<f64>,
    /// `D^2U(q)`.
    pub hess_u: DMatrix<f64>,
    pub cc: CentralConfiguration,
}

impl LinearizedSystem {
    /// Configuration-space dimension `d n`.
    pub fn config_dim(&self) -> usize {
        self.k.nrows()
    }

    pub fn j(&self) -> DMatrix<f64> {
        symplectic_j(self.config_dim())
    }
}

/// Largest out-of-plane coordinate of a configuration relative to its scale.
pub fn out_of_plane(cc: &CentralConfiguration) -> f64 {
    let d = cc.dim();
    let scale = cc.q.amax().max(f64::MIN_POSITIVE);
    (0..cc.n())
        .flat_map(|i| (2..d).map(move |k| i * d + k))
        .map(|idx| cc.q[idx].abs())
        .fold(0.0, f64::max)
        / scale
}

/// Checks that `mode` can be used with the configuration.
pub fn check_mode(cc: &CentralConfiguration, mode: FrameMode) -> Result<()> {
    if cc.dim() != mode.ambient_dim() {
        return Err(Error::ModeMismatch(format!(
            "mode {} needs ambient dimension {}, configuration has {}",
            mode.as_str(),
            mode.ambient_dim(),
            cc.dim()
        )));
    }
    if mode == FrameMode::Simple4 && out_of_plane(cc) > 1e-12 {
        return Err(Error::ModeMismatch(
            "simple4 requires a configuration lying in the (x, y) plane".into(),
        ));
    }
    Ok(())
}

/// Linearization of the relative equilibrium generated by `cc` rotating in `mode`.
pub fn linearize(cc: &CentralConfiguration, mode: FrameMode) -> Result<LinearizedSystem> {
    check_mode(cc, mode)?;
    let sys = &cc.system;
    let n = sys.size();
    let k_speed = cc.k_speed();
    let k = build_k(mode, k_speed, sys.n());
    let hess_u = sys.hessian(&cc.q)?;
    let minv = sys.inv_mass_matrix();
    let mut l = DMatrix::zeros(2 * n, 2 * n);
    l.view_mut((0, 0), (n, n)).copy_from(&k);
    l.view_mut((0, n), (n, n)).copy_from(&minv);
    l.view_mut((n, 0), (n, n)).copy_from(&hess_u);
    l.view_mut((n, n), (n, n)).copy_from(&k);
    let mut b = DMatrix::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(&(-&hess_u));
    b.view_mut((0, n), (n, n)).copy_from(&(-&k));
    b.view_mut((n, 0), (n, n)).copy_from(&k);
    b.view_mut((n, n), (n, n)).copy_from(&minv);
    Ok(LinearizedSystem {
        mode,
        k_speed,
        k,
        l,
        b,
        hess_u,
        cc: cc.clone(),
    })
}

/// The translation vector `e_l` repeated on every body.
pub fn translation(n: usize, d: usize, l: usize) -> DVector<f64> {
    DVector::from_fn(n * d, |i, _| if i % d == l { 1.0 } else { 0.0 })
}
