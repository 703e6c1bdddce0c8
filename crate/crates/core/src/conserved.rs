//! Classical integrals of motion, their gradients and the rank test for
//! their independence.
//!
//! Phase points are laid out as `x = (q, p)` with both halves body-major, so
//! gradients are `2 d n` vectors. Angular momenta are ordered
//! `(1,2), (1,3), (1,4), (2,3), (2,4), (3,4)` (lexicographic in general `d`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::central_config::CentralConfiguration;
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, RANK_REL};
use crate::nbody::{MassSystem, PhasePoint};
use crate::rotating_frame::{build_k, FrameMode};

/// Index pairs `k < l` of the angular momenta.
pub fn angular_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|k| ((k + 1)..d).map(move |l| (k, l))).collect()
}

/// Values of the classical integrals at one phase point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralSet {
    pub total_momentum: Vec<f64>,
    pub center_of_mass: Vec<f64>,
    /// `Omega_kl` in the order of [`angular_pairs`].
    pub angular: Vec<f64>,
    pub energy: f64,
}

impl IntegralSet {
    /// All integrals as one vector: momentum, center of mass, angular, energy.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.total_momentum.clone();
        v.extend(&self.center_of_mass);
        v.extend(&self.angular);
        v.push(self.energy);
        v
    }
}

fn check_point(sys: &MassSystem, x: &PhasePoint) -> Result<()> {
    if x.q.len() != sys.size() || x.p.len() != sys.size() {
        return Err(Error::DimensionMismatch {
            expected: sys.size(),
            got: x.q.len().max(x.p.len()),
        });
    }
    Ok(())
}

/// `Omega_kl = sum_i (-p_i^k q_i^l + p_i^l q_i^k)`.
pub fn angular_momenta(sys: &MassSystem, x: &PhasePoint) -> Vec<f64> {
    let d = sys.dim();
    angular_pairs(d)
        .into_iter()
        .map(|(k, l)| {
            (0..sys.n())
                .map(|i| -x.p[i * d + k] * x.q[i * d + l] + x.p[i * d + l] * x.q[i * d + k])
                .sum()
        })
        .collect()
}

/// Kinetic minus potential energy `|p|^2_{M^-1} / 2 - U(q)`.
pub fn energy(sys: &MassSystem, x: &PhasePoint) -> Result<f64> {
    let minv = sys.mass_diag().map(|m| 1.0 / m);
    let kinetic = 0.5 * x.p.iter().zip(minv.iter()).map(|(p, w)| p * p * w).sum::<f64>();
    Ok(kinetic - sys.potential(&x.q)?)
}

pub fn evaluate_integrals(sys: &MassSystem, x: &PhasePoint) -> Result<IntegralSet> {
    check_point(sys, x)?;
    sys.check_collision(&x.q)?;
    let d = sys.dim();
    let total_momentum = (0..d)
        .map(|k| (0..sys.n()).map(|i| x.p[i * d + k]).sum())
        .collect();
    Ok(IntegralSet {
        total_momentum,
        center_of_mass: sys.center_of_mass(&x.q)?.iter().copied().collect(),
        angular: angular_momenta(sys, x),
        energy: energy(sys, x)?,
    })
}

/// Gradient matrix `(grad q_bar | grad p_bar | grad Omega)` of size
/// `2dn x (2d + d(d-1)/2)`; with `with_energy` the energy gradient
/// `(-grad U, M^{-1} p)` is appended as a last column.
pub fn integral_gradients(sys: &MassSystem, x: &PhasePoint, with_energy: bool) -> Result<DMatrix<f64>> {
    check_point(sys, x)?;
    let d = sys.dim();
    let n = sys.n();
    let half = d * n;
    let pairs = angular_pairs(d);
    let cols = 2 * d + pairs.len() + usize::from(with_energy);
    let mut g = DMatrix::zeros(2 * half, cols);
    let total: f64 = sys.masses().iter().sum();
    for i in 0..n {
        for k in 0..d {
            g[(i * d + k, k)] = sys.masses()[i] / total;
            g[(half + i * d + k, d + k)] = 1.0;
        }
    }
    for (c, &(k, l)) in pairs.iter().enumerate() {
        let col = 2 * d + c;
        for i in 0..n {
            g[(i * d + k, col)] = x.p[i * d + l];
            g[(i * d + l, col)] = -x.p[i * d + k];
            g[(half + i * d + k, col)] = -x.q[i * d + l];
            g[(half + i * d + l, col)] = x.q[i * d + k];
        }
    }
    if with_energy {
        let col = cols - 1;
        let grad_u = sys.gradient(&x.q)?;
        let mdiag = sys.mass_diag();
        for j in 0..half {
            g[(j, col)] = -grad_u[j];
            g[(half + j, col)] = x.p[j] / mdiag[j];
        }
    }
    Ok(g)
}

/// Moves a phase point to zero center of mass and zero total momentum.
pub fn normalize_phase(sys: &MassSystem, x: &PhasePoint) -> Result<PhasePoint> {
    check_point(sys, x)?;
    let d = sys.dim();
    let q = sys.centered(&x.q)?;
    let total: f64 = sys.masses().iter().sum();
    let mut p = x.p.clone();
    for k in 0..d {
        let pk: f64 = (0..sys.n()).map(|i| x.p[i * d + k]).sum();
        for i in 0..sys.n() {
            p[i * d + k] -= sys.masses()[i] / total * pk;
        }
    }
    PhasePoint::new(q, p)
}

/// Result of the independence test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    /// Number of columns of the gradient matrix without energy.
    pub columns: usize,
    pub rank: usize,
    /// Rank with the energy gradient appended; reported, not asserted.
    pub rank_with_energy: usize,
    /// Rank of the `d x 2n` matrix of all `q_i` and `p_i`.
    pub span_rank: usize,
    pub coplanar: bool,
    /// Whether `rank < columns` agrees with `coplanar`.
    pub consistent: bool,
}

/// Rank of the integral gradients at the normalized phase point, together
/// with an independent coplanarity check of the vectors `q_i, p_i`.
pub fn independence_test(sys: &MassSystem, x: &PhasePoint) -> Result<IndependenceReport> {
    let x = normalize_phase(sys, x)?;
    let g = integral_gradients(sys, &x, true)?;
    let columns = g.ncols() - 1;
    let rank = numerical_rank(&g.columns(0, columns).into_owned(), RANK_REL);
    let rank_with_energy = numerical_rank(&g, RANK_REL);
    let d = sys.dim();
    let n = sys.n();
    let span = DMatrix::from_fn(d, 2 * n, |k, j| {
        if j < n {
            x.q[j * d + k]
        } else {
            x.p[(j - n) * d + k]
        }
    });
    let span_rank = numerical_rank(&span, RANK_REL);
    let coplanar = span_rank <= 2;
    Ok(IndependenceReport {
        columns,
        rank,
        rank_with_energy,
        span_rank,
        coplanar,
        consistent: (rank < columns) == coplanar,
    })
}

/// The antisymmetric coefficient matrix of the linear system whose
/// solution space contains every `q_i` and `p_i` when the gradients are
/// dependent; `coeffs` are the multipliers of the six angular momenta.
pub fn lambda_matrix(coeffs: &[f64; 6]) -> DMatrix<f64> {
    let [l9, l10, l11, l12, l13, l14] = *coeffs;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, l9, l10, l11, //
            -l9, 0.0, l12, l13, //
            -l10, -l12, 0.0, l14, //
            -l11, -l13, -l14, 0.0,
        ],
    )
}

/// Dimension of the solution space of [`lambda_matrix`].
pub fn lambda_solution_dim(coeffs: &[f64; 6]) -> usize {
    4 - numerical_rank(&lambda_matrix(coeffs), RANK_REL)
}

/// Phase point of the relative equilibrium at time zero: `p = M K q`.
pub fn relative_equilibrium_phase_point(cc: &CentralConfiguration, mode: FrameMode) -> Result<PhasePoint> {
    crate::rotating_frame::check_mode(cc, mode)?;
    let k = build_k(mode, cc.k_speed(), cc.n());
    let p = cc.system.mass_matrix() * (k * &cc.q);
    PhasePoint::new(cc.q.clone(), p)
}

fn vector_field(sys: &MassSystem, q: &DVector<f64>, p: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let minv = sys.mass_diag().map(|m| 1.0 / m);
    Ok((p.component_mul(&minv), sys.gradient(q)?))
}

/// Classical fourth-order Runge-Kutta for `q' = M^{-1} p`, `p' = grad U`.
pub(crate) fn rk4(sys: &MassSystem, x: &PhasePoint, step: f64, steps: usize) -> Result<PhasePoint> {
    let (mut q, mut p) = (x.q.clone(), x.p.clone());
    for _ in 0..steps {
        let (k1q, k1p) = vector_field(sys, &q, &p)?;
        let (k2q, k2p) = vector_field(sys, &(&q + &k1q * (step / 2.0)), &(&p + &k1p * (step / 2.0)))?;
        let (k3q, k3p) = vector_field(sys, &(&q + &k2q * (step / 2.0)), &(&p + &k2p * (step / 2.0)))?;
        let (k4q, k4p) = vector_field(sys, &(&q + &k3q * step), &(&p + &k3p * step))?;
        q += (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * (step / 6.0);
        p += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (step / 6.0);
    }
    PhasePoint::new(q, p)
}

/// Largest change of each integral along a numerically integrated arc.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftReport {
    pub duration: f64,
    pub step: f64,
    pub total_momentum: f64,
    /// Drift of the center of mass after removing the uniform motion `p_bar t / m_bar`.
    pub center_of_mass: f64,
    pub angular: f64,
    pub energy: f64,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.total_momentum
            .max(self.center_of_mass)
            .max(self.angular)
            .max(self.energy)
    }
}

/// Drift of the integrals over `[0, duration]` sampled at every step.
pub fn noether_drift(sys: &MassSystem, x: &PhasePoint, duration: f64, step: f64) -> Result<DriftReport> {
    let start = evaluate_integrals(sys, x)?;
    let total: f64 = sys.masses().iter().sum();
    let steps = (duration / step).round() as usize;
    let mut report = DriftReport {
        duration,
        step,
        total_momentum: 0.0,
        center_of_mass: 0.0,
        angular: 0.0,
        energy: 0.0,
    };
    let dev = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let mut cur = x.clone();
    for s in 1..=steps {
        cur = rk4(sys, &cur, step, 1)?;
        let now = evaluate_integrals(sys, &cur)?;
        let t = s as f64 * step;
        let expected_com: Vec<f64> = start
            .center_of_mass
            .iter()
            .zip(&start.total_momentum)
            .map(|(c, p)| c + p * t / total)
            .collect();
        report.total_momentum = report.total_momentum.max(dev(&now.total_momentum, &start.total_momentum));
        report.center_of_mass = report.center_of_mass.max(dev(&now.center_of_mass, &expected_com));
        report.angular = report.angular.max(dev(&now.angular, &start.angular));
        report.energy = report.energy.max((now.energy - start.energy).abs());
    }
    Ok(report)
}
