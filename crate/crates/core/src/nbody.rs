//! Masses, the mass inner product and the homogeneous potential with its
//! first and second derivatives.
//!
//! Configurations are flat vectors in body-major order: coordinate `k` of
//! body `i` sits at index `i * d + k`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A flat configuration vector of length `n * d`.
pub type Configuration = DVector<f64>;

/// Relative collision threshold against the configuration diameter.
pub const COLLISION_REL: f64 = 1e-13;

/// Masses rescaled to total one, the ambient dimension and the homogeneity
/// exponent of the potential `U = sum m_i m_j / r_ij^alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSystem {
    masses: Vec<f64>,
    ambient_dim: usize,
    mass_scale: f64,
    alpha: f64,
}

impl MassSystem {
    pub fn new(masses: &[f64], ambient_dim: usize) -> Result<Self> {
        Self::with_exponent(masses, ambient_dim, 1.0)
    }

    pub fn with_exponent(masses: &[f64], ambient_dim: usize, alpha: f64) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidMasses(format!(
                "need at least two bodies, got {}",
                masses.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidMasses(format!(
                "masses must be positive and finite, got {m}"
            )));
        }
        if ambient_dim == 0 {
            return Err(Error::Input("ambient dimension must be positive".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Input(format!("exponent must be positive, got {alpha}")));
        }
        let total: f64 = masses.iter().sum();
        Ok(Self {
            masses: masses.iter().map(|m| m / total).collect(),
            ambient_dim,
            mass_scale: total,
            alpha,
        })
    }

    pub fn equal(n: usize, ambient_dim: usize) -> Result<Self> {
        Self::new(&vec![1.0; n], ambient_dim)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn dim(&self) -> usize {
        self.ambient_dim
    }

    /// Length `n * d` of a configuration vector.
    pub fn size(&self) -> usize {
        self.n() * self.ambient_dim
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass_scale(&self) -> f64 {
        self.mass_scale
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Diagonal of `M = diag(m_1 I_d, ..., m_n I_d)`.
    pub fn mass_diag(&self) -> DVector<f64> {
        let d = self.ambient_dim;
        DVector::from_fn(self.size(), |i, _| self.masses[i / d])
    }

    pub fn mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.mass_diag())
    }

    pub fn inv_mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.mass_diag().map(|m| 1.0 / m))
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// The mass inner product `<Mu, v>`.
    pub fn mass_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_len(u)?;
        self.check_len(v)?;
        let d = self.ambient_dim;
        Ok(u
            .iter()
            .zip(v.iter())
            .enumerate()
            .map(|(i, (a, b))| self.masses[i / d] * a * b)
            .sum())
    }

    pub fn mass_norm(&self, u: &DVector<f64>) -> Result<f64> {
        Ok(self.mass_inner(u, u)?.sqrt())
    }

    pub fn body<'a>(&self, q: &'a DVector<f64>, i: usize) -> nalgebra::DVectorView<'a, f64> {
        q.rows(i * self.ambient_dim, self.ambient_dim)
    }

    pub fn center_of_mass(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(q)?;
        let mut c = DVector::zeros(self.ambient_dim);
        for i in 0..self.n() {
            c += self.body(q, i) * self.masses[i];
        }
        Ok(c)
    }

    /// Translates `q` so that its center of mass is at the origin.
    pub fn centered(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let c = self.center_of_mass(q)?;
        let d = self.ambient_dim;
        Ok(DVector::from_fn(q.len(), |i, _| q[i] - c[i % d]))
    }

    /// Largest pairwise distance.
    pub fn diameter(&self, q: &DVector<f64>) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                best = best.max((self.body(q, i) - self.body(q, j)).norm());
            }
        }
        best
    }

    /// Smallest pairwise distance divided by the diameter.
    pub fn min_distance_ratio(&self, q: &DVector<f64>) -> f64 {
        let diam = self.diameter(q);
        if diam == 0.0 {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                best = best.min((self.body(q, i) - self.body(q, j)).norm());
            }
        }
        best / diam
    }

    /// Fails when two bodies are closer than `1e-13` times the diameter.
    pub fn check_collision(&self, q: &DVector<f64>) -> Result<()> {
        self.check_len(q)?;
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("configuration has non-finite entries".into()));
        }
        let diam = self.diameter(q);
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let r = (self.body(q, i) - self.body(q, j)).norm();
                if r <= COLLISION_REL * diam || r == 0.0 {
                    return Err(Error::Collision {
                        i,
                        j,
                        distance: r,
                        diameter: diam,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn potential(&self, q: &DVector<f64>) -> Result<f64> {
        self.check_collision(q)?;
        let mut u = 0.0;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let r = (self.body(q, i) - self.body(q, j)).norm();
                u += self.masses[i] * self.masses[j] / r.powf(self.alpha);
            }
        }
        Ok(u)
    }

    pub fn gradient(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_collision(q)?;
        let d = self.ambient_dim;
        let a = self.alpha;
        let mut g = DVector::zeros(self.size());
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let diff = self.body(q, i) - self.body(q, j);
                let r = diff.norm();
                let c = -a * self.masses[i] * self.masses[j] / r.powf(a + 2.0);
                for k in 0..d {
                    g[i * d + k] += c * diff[k];
                    g[j * d + k] -= c * diff[k];
                }
            }
        }
        Ok(g)
    }

    pub fn hessian(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_collision(q)?;
        let d = self.ambient_dim;
        let a = self.alpha;
        let mut h = DMatrix::zeros(self.size(), self.size());
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let diff = self.body(q, i) - self.body(q, j);
                let r = diff.norm();
                let mm = self.masses[i] * self.masses[j];
                let c1 = -a * mm / r.powf(a + 2.0);
                let c2 = a * (a + 2.0) * mm / r.powf(a + 4.0);
                for k in 0..d {
                    for l in 0..d {
                        let mut b = c2 * diff[k] * diff[l];
                        if k == l {
                            b += c1;
                        }
                        h[(i * d + k, i * d + l)] += b;
                        h[(j * d + k, j * d + l)] += b;
                        h[(i * d + k, j * d + l)] -= b;
                        h[(j * d + k, i * d + l)] -= b;
                    }
                }
            }
        }
        Ok(h)
    }
}

/// Positions and momenta `p = M v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
}

impl PhasePoint {
    pub fn new(q: DVector<f64>, p: DVector<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: p.len(),
            });
        }
        Ok(Self { q, p })
    }
}

/// Flattens a list of per-body coordinate vectors.
pub fn flatten(bodies: &[Vec<f64>]) -> Result<DVector<f64>> {
    let d = bodies.first().map(|b| b.len()).unwrap_or(0);
    if let Some(b) = bodies.iter().find(|b| b.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: b.len(),
        });
    }
    Ok(DVector::from_iterator(
        bodies.len() * d,
        bodies.iter().flat_map(|b| b.iter().copied()),
    ))
}

pub fn unflatten(q: &DVector<f64>, d: usize) -> Vec<Vec<f64>> {
    q.as_slice().chunks(d).map(|c| c.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn equilateral() -> (MassSystem, DVector<f64>) {
        let sys = MassSystem::equal(3, 4).unwrap();
        let mut bodies = Vec::new();
        for i in 0..3 {
            let t = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / 3.0;
            bodies.push(vec![t.cos(), t.sin(), 0.0, 0.0]);
        }
        (sys, flatten(&bodies).unwrap())
    }

    fn random_config(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (MassSystem, DVector<f64>) {
        let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let sys = MassSystem::new(&masses, d).unwrap();
        let q = DVector::from_fn(n * d, |_, _| rng.random_range(-1.0..1.0));
        (sys, q)
    }

    #[test]
    fn two_body_potential_by_hand() {
        let sys = MassSystem::new(&[0.5, 0.5], 4).unwrap();
        let q = flatten(&[vec![0.5, 0.0, 0.0, 0.0], vec![-0.5, 0.0, 0.0, 0.0]]).unwrap();
        assert!((sys.potential(&q).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn masses_are_normalised() {
        let sys = MassSystem::new(&[2.0, 3.0, 5.0], 2).unwrap();
        assert!((sys.masses().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert_eq!(sys.mass_scale(), 10.0);
        assert!(MassSystem::new(&[1.0, -1.0], 2).is_err());
    }

    #[test]
    fn coincident_bodies_collide() {
        let sys = MassSystem::equal(3, 2).unwrap();
        let q = DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(sys.potential(&q), Err(Error::Collision { i: 0, j: 1, .. })));
    }

    #[test]
    fn equilateral_values() {
        let (sys, q) = equilateral();
        let lam = 3f64.powf(-1.5);
        assert!((sys.potential(&q).unwrap() - lam).abs() < 1e-14);
        let g = sys.gradient(&q).unwrap();
        let mq = sys.mass_matrix() * &q;
        assert!((g + mq * lam).norm() < 1e-14);
    }

    #[test]
    fn mass_inner_of_ones_is_total_mass() {
        let sys = MassSystem::new(&[1.0, 2.0, 3.0], 1).unwrap();
        let e = DVector::from_element(3, 1.0);
        assert!((sys.mass_inner(&e, &e).unwrap() - 1.0).abs() < 1e-15);
        assert!(sys.mass_inner(&e, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for trial in 0..50 {
            let n = 3 + trial % 3;
            let d = if trial % 2 == 0 { 4 } else { 2 };
            let (sys, q) = random_config(&mut rng, n, d);
            let g = sys.gradient(&q).unwrap();
            let hs = sys.hessian(&q).unwrap();
            let mut fd_g = DVector::zeros(q.len());
            for i in 0..q.len() {
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[i] += h;
                qm[i] -= h;
                fd_g[i] = (sys.potential(&qp).unwrap() - sys.potential(&qm).unwrap()) / (2.0 * h);
                let col = (sys.gradient(&qp).unwrap() - sys.gradient(&qm).unwrap()) / (2.0 * h);
                let rel = (&col - hs.column(i)).norm() / hs.column(i).norm().max(1e-3);
                assert!(rel < 1e-5, "hessian column {i}: {rel}");
            }
            assert!((&fd_g - &g).norm() / g.norm() < 1e-6);
            assert!((&hs - hs.transpose()).amax() < 1e-12);
        }
    }

    #[test]
    fn homogeneity_translation_and_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (sys, q) = random_config(&mut rng, 4, 4);
            let u = sys.potential(&q).unwrap();
            let g = sys.gradient(&q).unwrap();
            assert!((g.dot(&q) + u).abs() < 1e-10 * u);
            let hq = sys.hessian(&q).unwrap() * &q;
            assert!((hq + &g * 2.0).norm() < 1e-10 * g.norm());
            let mut total = DVector::zeros(4);
            for i in 0..4 {
                total += g.rows(i * 4, 4);
            }
            assert!(total.norm() < 1e-12);

            let r = nalgebra::DMatrix::<f64>::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0))
                .qr()
                .q();
            let big = crate::quaternion::block_diag(&r, 4);
            let g_rot = sys.gradient(&(&big * &q)).unwrap();
            assert!((g_rot - &big * &g).norm() < 1e-10);
        }
    }

    #[test]
    fn exponent_hook_scales_homogeneity() {
        let sys = MassSystem::with_exponent(&[1.0, 2.0, 3.0], 2, 2.0).unwrap();
        let q = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.2, -0.4, 1.1]);
        let u = sys.potential(&q).unwrap();
        let g = sys.gradient(&q).unwrap();
        assert!((g.dot(&q) + 2.0 * u).abs() < 1e-12);
        let hq = sys.hessian(&q).unwrap() * &q;
        assert!((hq + &g * 3.0).norm() < 1e-12);
    }
}
