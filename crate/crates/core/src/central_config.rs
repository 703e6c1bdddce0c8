//! Central configurations: residual, projected Newton solver, geometry class,
//! restricted Hessian on the inertia ellipsoid and its inertia indices.

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, InertiaDetail, InertiaTriple, RankPolicy, INERTIA_REL};
use crate::nbody::MassSystem;
use crate::quaternion::{on_bodies, plane_generator};

/// Relative rank threshold for the position matrix.
pub const GEOMETRY_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Collinear,
    PlanarNoncollinear,
    SpatialNonplanar,
}

impl Geometry {
    pub fn from_rank(rank: usize) -> Self {
        match rank {
            0 | 1 => Geometry::Collinear,
            2 => Geometry::PlanarNoncollinear,
            _ => Geometry::SpatialNonplanar,
        }
    }
}

/// Dimension of the `SO(d)` orbit through a configuration spanning `rank`
/// dimensions.
pub fn orbit_dim(d: usize, rank: usize) -> usize {
    let so = |m: usize| m * m.saturating_sub(1) / 2;
    so(d) - so(d - rank.min(d))
}

/// `n x d` matrix whose rows are the body positions.
pub fn position_matrix(sys: &MassSystem, q: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(sys.n(), sys.dim(), q.as_slice())
}

/// Rank of the position matrix and the corresponding geometry class.
pub fn classify_geometry(sys: &MassSystem, q: &DVector<f64>) -> (Geometry, usize) {
    let rank = linalg::numerical_rank(&position_matrix(sys, q), GEOMETRY_REL);
    (Geometry::from_rank(rank), rank)
}

/// Residual `M^{-1} grad U(q) + lambda q` and the multiplier
/// `lambda = alpha U(q) / <Mq, q>`.
pub fn cc_residual(sys: &MassSystem, q: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let u = sys.potential(q)?;
    let g = sys.gradient(q)?;
    let lambda = sys.alpha() * u / sys.mass_inner(q, q)?;
    let minv = sys.mass_diag().map(|m| 1.0 / m);
    Ok((g.component_mul(&minv) + q * lambda, lambda))
}

/// Rotation generators `K_lr q` for every coordinate plane, as columns.
pub fn symmetry_vectors(sys: &MassSystem, q: &DVector<f64>) -> DMatrix<f64> {
    let d = sys.dim();
    let mut cols = Vec::new();
    for l in 0..d {
        for r in (l + 1)..d {
            cols.push(on_bodies(&plane_generator(d, l, r), sys.n()) * q);
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(q.len(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// M-orthonormal basis (as columns) of the tangent space
/// `{v : <Mq, v> = 0, sum m_i v_i = 0}` of the inertia ellipsoid at a
/// centered `q`.
pub fn tangent_basis(sys: &MassSystem, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = sys.dim();
    let n = sys.size();
    let sqrt_m = sys.mass_diag().map(f64::sqrt);
    let mut rows = DMatrix::zeros(d + 1, n);
    rows.row_mut(0).copy_from(&q.component_mul(&sqrt_m).transpose());
    for l in 0..d {
        for i in 0..sys.n() {
            rows[(l + 1, i * d + l)] = sqrt_m[i * d + l];
        }
    }
    let x = linalg::null_space_real(&rows, RankPolicy::lenient())?;
    let expected = n - d - 1;
    if x.ncols() != expected {
        return Err(Error::DegenerateBasis(format!(
            "tangent space has dimension {}, expected {expected}",
            x.ncols()
        )));
    }
    let inv_sqrt = sqrt_m.map(|s| 1.0 / s);
    Ok(DMatrix::from_fn(n, expected, |i, j| x[(i, j)] * inv_sqrt[i]))
}

/// Matrix of `D^2U(q) + lambda M` in an M-orthonormal tangent basis; this is
/// the Hessian of the potential restricted to the inertia ellipsoid.
pub fn restricted_hessian_at(sys: &MassSystem, q: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let bt = tangent_basis(sys, q)?;
    let lambda = sys.alpha() * sys.potential(q)? / sys.mass_inner(q, q)?;
    let h = sys.hessian(q)? + sys.mass_matrix() * lambda;
    let r = bt.transpose() * h * &bt;
    Ok(((&r + r.transpose()) * 0.5, bt))
}

/// Solver settings for [`solve_cc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target mass-norm residual.
    pub tol: f64,
    pub max_iters: usize,
    /// Extra Newton steps taken after the target residual is reached.
    pub polish_steps: usize,
    /// Ratio of minimal distance to diameter below which iterates are
    /// considered to approach the collision set.
    pub collision_ratio: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iters: 200,
            polish_steps: 3,
            collision_ratio: 1e-6,
        }
    }
}

/// A normalized, centered central configuration with its Morse data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CentralConfiguration {
    pub system: MassSystem,
    pub q: DVector<f64>,
    pub lambda: f64,
    pub residual_norm: f64,
    pub geometry: Geometry,
    pub rank: usize,
    pub orbit_tangent_dim: usize,
    pub iterations: usize,
    pub hessian: InertiaDetail,
}

impl CentralConfiguration {
    /// Validates `q` as a central configuration without iterating: the
    /// configuration is centered and normalized and its residual checked
    /// against `tol`.
    pub fn from_configuration(sys: &MassSystem, q: &DVector<f64>, tol: f64) -> Result<Self> {
        sys.check_collision(q)?;
        let q = normalize(sys, q)?;
        let (res, _) = cc_residual(sys, &q)?;
        let r = sys.mass_norm(&res)?;
        if r > tol {
            return Err(Error::NoConvergence {
                iters: 0,
                residual: r,
            });
        }
        Self::finish(sys, q, 0)
    }

    fn finish(sys: &MassSystem, q: DVector<f64>, iterations: usize) -> Result<Self> {
        let (res, lambda) = cc_residual(sys, &q)?;
        let residual_norm = sys.mass_norm(&res)?;
        let (geometry, rank) = classify_geometry(sys, &q);
        let (h, _) = restricted_hessian_at(sys, &q)?;
        Ok(Self {
            system: sys.clone(),
            lambda,
            residual_norm,
            geometry,
            rank,
            orbit_tangent_dim: orbit_dim(sys.dim(), rank),
            iterations,
            hessian: linalg::inertia(&h, INERTIA_REL),
            q,
        })
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Angular speed `k = sqrt(lambda)` of the associated relative equilibrium.
    pub fn k_speed(&self) -> f64 {
        self.lambda.sqrt()
    }

    pub fn restricted_hessian(&self) -> Result<DMatrix<f64>> {
        Ok(restricted_hessian_at(&self.system, &self.q)?.0)
    }

    pub fn inertia(&self) -> InertiaTriple {
        self.hessian.triple
    }

    /// Nullity equals the dimension of the rotation orbit.
    pub fn morse_bott(&self) -> bool {
        morse_bott_test(&self.hessian.triple, self.orbit_tangent_dim)
    }
}

pub fn morse_bott_test(inertia: &InertiaTriple, orbit_tangent_dim: usize) -> bool {
    inertia.n_zero == orbit_tangent_dim
}

/// Centers `q` and rescales it to unit mass norm.
pub fn normalize(sys: &MassSystem, q: &DVector<f64>) -> Result<DVector<f64>> {
    let c = sys.centered(q)?;
    let nrm = sys.mass_norm(&c)?;
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::Input("configuration has zero moment of inertia".into()));
    }
    Ok(c / nrm)
}

/// Rotates a centered configuration so that it spans the leading coordinate
/// axes, then zeroes the remaining coordinates.
pub fn align_to_axes(sys: &MassSystem, q: &DVector<f64>) -> Result<DVector<f64>> {
    let d = sys.dim();
    let p = position_matrix(sys, q);
    let mut v = linalg::svd(&p)?.v;
    if v.determinant() < 0.0 {
        let last = d - 1;
        v.column_mut(last).neg_mut();
    }
    let (_, rank) = classify_geometry(sys, q);
    let mut rotated = p * v;
    for i in 0..sys.n() {
        for k in rank..d {
            rotated[(i, k)] = 0.0;
        }
    }
    Ok(DVector::from_row_slice(rotated.transpose().as_slice()))
}

struct Chart {
    bt: DMatrix<f64>,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
    residual: f64,
}

fn chart(sys: &MassSystem, q: &DVector<f64>) -> Result<Chart> {
    let (res, _) = cc_residual(sys, q)?;
    let residual = sys.mass_norm(&res)?;
    let (hess, bt) = restricted_hessian_at(sys, q)?;
    let m = sys.mass_diag();
    let grad = bt.transpose() * res.component_mul(&m);
    Ok(Chart {
        bt,
        grad,
        hess,
        residual,
    })
}

/// Orthonormal basis (chart coordinates) of the complement of the rotation
/// orbit's tangent directions.
fn non_symmetric_directions(sys: &MassSystem, q: &DVector<f64>, bt: &DMatrix<f64>) -> DMatrix<f64> {
    let m = sys.mass_diag();
    let s = symmetry_vectors(sys, q);
    let coords = bt.transpose() * DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| s[(i, j)] * m[i]);
    let dim = bt.ncols();
    if coords.ncols() == 0 {
        return DMatrix::identity(dim, dim);
    }
    let Ok(svd) = linalg::svd(&coords) else {
        return DMatrix::identity(dim, dim);
    };
    let smax = svd.s.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let span: Vec<DVector<f64>> = svd
        .s
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1e-8 * smax)
        .map(|(i, _)| svd.u.column(i).into_owned())
        .collect();
    if span.is_empty() {
        return DMatrix::identity(dim, dim);
    }
    let z = DMatrix::from_columns(&span);
    linalg::null_space_real(&z.transpose(), RankPolicy::lenient())
        .unwrap_or_else(|_| DMatrix::identity(dim, dim))
}

fn retract(sys: &MassSystem, q: &DVector<f64>, bt: &DMatrix<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
    let moved = q + bt * c;
    normalize(sys, &moved)
}

fn pseudo_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    linalg::pseudo_inverse(a, 1e-12)
        .map(|p| p * b)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

fn newton_direction(ch: &Chart, w: &DMatrix<f64>) -> DVector<f64> {
    let hw = w.transpose() * &ch.hess * w;
    let gw = w.transpose() * &ch.grad;
    w * pseudo_solve(&hw, &(-gw))
}

/// Projected Newton iteration on the inertia ellipsoid.
///
/// Steps are computed in a local chart `q(c) = (q + B c) / |q + B c|_M`
/// from the exact Hessian of the restricted potential, restricted to the
/// complement of the rotation directions, and globalized by backtracking on
/// the mass-norm residual with a damped Gauss-Newton fallback.
pub fn solve_cc(sys: &MassSystem, seed: &DVector<f64>, opts: &SolverOptions) -> Result<CentralConfiguration> {
    sys.check_collision(seed)?;
    let mut q = normalize(sys, seed)?;
    let mut converged_at = None;
    let mut last_residual = f64::INFINITY;
    for iter in 0..opts.max_iters {
        let ch = chart(sys, &q)?;
        last_residual = ch.residual;
        debug!("cc iteration {iter}: residual {:e}", ch.residual);
        if ch.residual < opts.tol && converged_at.is_none() {
            converged_at = Some(iter);
        }
        if let Some(at) = converged_at {
            if iter >= at + opts.polish_steps || ch.residual == 0.0 {
                return CentralConfiguration::finish(sys, q, iter);
            }
        }
        let w = non_symmetric_directions(sys, &q, &ch.bt);
        let dir = newton_direction(&ch, &w);
        let mut accepted = None;
        let mut step = 1.0;
        for _ in 0..30 {
            let cand = retract(sys, &q, &ch.bt, &(&dir * step))?;
            if sys.check_collision(&cand).is_ok() {
                if let Ok((res, _)) = cc_residual(sys, &cand) {
                    let r = sys.mass_norm(&res)?;
                    if r < (1.0 - 1e-4 * step) * ch.residual || (converged_at.is_some() && r <= ch.residual * 2.0) {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if accepted.is_none() {
            // Damped Gauss-Newton: always a descent direction for the residual.
            let h2 = &ch.hess * &ch.hess;
            let hg = &ch.hess * &ch.grad;
            let mut mu = 1e-6 * h2.norm().max(1e-12);
            for _ in 0..40 {
                let sys_m = &h2 + DMatrix::identity(h2.nrows(), h2.ncols()) * mu;
                let c = pseudo_solve(&sys_m, &(-&hg));
                let cand = retract(sys, &q, &ch.bt, &c)?;
                if sys.check_collision(&cand).is_ok() {
                    let (res, _) = cc_residual(sys, &cand)?;
                    if sys.mass_norm(&res)? < ch.residual {
                        accepted = Some(cand);
                        break;
                    }
                }
                mu *= 4.0;
            }
        }
        match accepted {
            Some(next) => q = next,
            None if converged_at.is_some() => return CentralConfiguration::finish(sys, q, iter),
            None => {
                return Err(Error::NoConvergence {
                    iters: iter,
                    residual: ch.residual,
                })
            }
        }
        let ratio = sys.min_distance_ratio(&q);
        if ratio < opts.collision_ratio {
            return Err(Error::CollisionApproach { iter, ratio });
        }
    }
    if converged_at.is_some() {
        return CentralConfiguration::finish(sys, q, opts.max_iters);
    }
    Err(Error::NoConvergence {
        iters: opts.max_iters,
        residual: last_residual,
    })
}
