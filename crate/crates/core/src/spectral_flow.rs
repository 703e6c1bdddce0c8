//! Spectral flow of affine Hermitian paths and the mod 2 parity test for
//! Hamiltonian matrices.
//!
//! The spectral flow of a path `T` on `[a, b]` is `n^-(T(a)) - n^-(T(b))`.
//! For an affine path `T(t) = base + t C` with `C` invertible, a crossing at
//! `t_*` contributes the signature of `C` restricted to the generalized
//! kernel of `C^{-1} base + t_* I`.
//!
//! Real symmetric inputs are promoted to complex Hermitian matrices; the
//! Krein matrix is `G = iJ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    clustered_spectrum, generalized_eigenspace, hermitian_defect, hermitian_eigenvalues,
    hermitian_inertia, hermitian_inertia_abs, max_abs_real, nested_kernel, orthogonal_complement,
    singular_values_c, spectral_norm, spectral_norm_c, symplectic_j, to_complex, CMat, EigenCluster, InertiaTriple,
    RankPolicy, C64, CLUSTER_RESOLUTION, INERTIA_REL,
};

/// Tolerance on `||H - H*|| / max(1, ||H||)` for path endpoints.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on the self-adjointness of `S L` in the Fitting split.
pub const PRODUCT_HERMITIAN_TOL: f64 = 1e-10;
/// A restricted crossing form is nondegenerate when its smallest
/// |eigenvalue| exceeds this multiple of `||C||`.
pub const FORM_NONDEGENERACY: f64 = 1e-8;
/// Relative tolerance for "purely imaginary".
pub const IMAGINARY_TOL: f64 = 1e-8;

fn c(t: f64) -> C64 {
    C64::new(t, 0.0)
}

/// The path `t -> base + t * direction` on `[a, b]`.
#[derive(Debug, Clone)]
pub struct AffinePath {
    pub base: CMat,
    pub direction: CMat,
    pub a: f64,
    pub b: f64,
}

impl AffinePath {
    pub fn new(base: CMat, direction: CMat, a: f64, b: f64) -> Result<Self> {
        if !base.is_square() {
            return Err(Error::DimensionMismatch {
                expected: base.nrows(),
                got: base.ncols(),
            });
        }
        if direction.shape() != base.shape() {
            return Err(Error::DimensionMismatch {
                expected: base.nrows(),
                got: direction.nrows(),
            });
        }
        for m in [&base, &direction] {
            let d = hermitian_defect(m);
            if d > HERMITIAN_TOL {
                return Err(Error::NotSelfAdjoint(d));
            }
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Input(format!("interval [{a}, {b}] is empty")));
        }
        Ok(Self {
            base,
            direction,
            a,
            b,
        })
    }

    pub fn from_real(base: &DMatrix<f64>, direction: &DMatrix<f64>, a: f64, b: f64) -> Result<Self> {
        Self::new(to_complex(base), to_complex(direction), a, b)
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn at(&self, t: f64) -> CMat {
        &self.base + &self.direction * c(t)
    }
}

/// `n^-(T(a)) - n^-(T(b))`.
///
/// With `allow_degenerate = false` a numerically singular endpoint is an
/// [`Error::AmbiguousInertia`].
pub fn spectral_flow_endpoints(path: &AffinePath, allow_degenerate: bool) -> Result<i64> {
    let start = hermitian_inertia(&path.at(path.a), INERTIA_REL);
    let end = hermitian_inertia(&path.at(path.b), INERTIA_REL);
    if !allow_degenerate {
        for d in [&start, &end] {
            if d.triple.n_zero > 0 {
                return Err(Error::AmbiguousInertia {
                    value: d.zero_band_max,
                    tol: d.tol,
                });
            }
        }
    }
    Ok(start.triple.n_minus as i64 - end.triple.n_minus as i64)
}

/// One crossing of an affine path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingDatum {
    pub t_star: f64,
    pub generalized_eigenspace_dim: usize,
    pub local_contribution: i64,
    /// Smallest |eigenvalue| of the restricted form, relative to `||C||`.
    pub form_margin: f64,
}

impl CrossingDatum {
    pub fn nondegenerate(&self) -> bool {
        self.form_margin > FORM_NONDEGENERACY
    }
}

/// Crossings of `base + t C` with `t` in the open interval `(lo, hi)`.
///
/// Crossings are the real eigenvalues of `-C^{-1} base`; degenerate
/// restricted forms are reported through `form_margin`, not rejected.
pub fn crossings_in(base: &CMat, direction: &CMat, lo: f64, hi: f64) -> Result<Vec<CrossingDatum>> {
    let cinv = direction
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Input("path direction is not invertible".into()))?;
    let op = -(&cinv * base);
    let scale = spectral_norm_c(&op).max(1.0);
    let real_tol = CLUSTER_RESOLUTION * scale;
    let cnorm = spectral_norm_c(direction);
    let clusters = clustered_spectrum(&op)?;
    let mut out = Vec::new();
    for cl in clusters
        .iter()
        .filter(|cl| cl.im.abs() <= real_tol && cl.re > lo && cl.re < hi)
    {
        if !cl.resolved {
            let separation = clusters
                .iter()
                .filter(|o| !std::ptr::eq(*o, cl))
                .map(|o| (o.value() - cl.value()).norm())
                .fold(f64::INFINITY, f64::min);
            return Err(Error::ClusterError {
                at: format!("t = {:.12e}", cl.re),
                separation,
                resolution: real_tol,
            });
        }
        let gk = generalized_eigenspace(&op, c(cl.re), RankPolicy::lenient().with_scale(scale))?;
        if gk.dim() != cl.algebraic {
            return Err(Error::ClusterError {
                at: format!("t = {:.12e}", cl.re),
                separation: 0.0,
                resolution: real_tol,
            });
        }
        let form = gk.basis.adjoint() * direction * &gk.basis;
        let eigs = hermitian_eigenvalues(&form);
        let margin = eigs.iter().fold(f64::INFINITY, |m, e| m.min(e.abs())) / cnorm;
        let pos = eigs.iter().filter(|e| **e > 0.0).count() as i64;
        let neg = eigs.len() as i64 - pos;
        out.push(CrossingDatum {
            t_star: cl.re,
            generalized_eigenspace_dim: gk.dim(),
            local_contribution: pos - neg,
            form_margin: margin,
        });
    }
    out.sort_by(|x, y| x.t_star.total_cmp(&y.t_star));
    Ok(out)
}

/// Crossing contributions of an admissible path with invertible direction.
///
/// Their sum equals [`spectral_flow_endpoints`].
pub fn crossing_contributions(path: &AffinePath) -> Result<Vec<CrossingDatum>> {
    spectral_flow_endpoints(path, false)?;
    let data = crossings_in(&path.base, &path.direction, path.a, path.b)?;
    if let Some(bad) = data.iter().find(|d| !d.nondegenerate()) {
        return Err(Error::AmbiguousInertia {
            value: bad.form_margin,
            tol: FORM_NONDEGENERACY,
        });
    }
    Ok(data)
}

pub fn total_contribution(data: &[CrossingDatum]) -> i64 {
    data.iter().map(|d| d.local_contribution).sum()
}

/// Orthonormal basis of `ker N^k` for `k` up to `power`.
pub fn generalized_kernel(n_op: &CMat, power: usize) -> Result<CMat> {
    if power == 0 {
        return Err(Error::Input("generalized kernel power must be at least 1".into()));
    }
    Ok(nested_kernel(n_op, power, RankPolicy::default())?.basis)
}

/// Residuals of the Fitting split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittingChecks {
    /// `||S L - (S L)^*||` relative to `max(1, ||S L||)`.
    pub product_defect: f64,
    /// `||V^* S W||` relative to `max(1, ||S||)`.
    pub s_orthogonality: f64,
    /// `||L_1^m||` relative to `max(1, ||L||)`.
    pub nilpotency: f64,
    /// Smallest singular value of `L_2` relative to `max(1, ||L||)`.
    pub l2_min_singular: f64,
    /// Smallest singular value of `[V W]`.
    pub span_min_singular: f64,
}

/// `H = ker L^m (+) im L^m` with the compressions of `S` and `L`.
///
/// `V` and `W` have orthonormal columns; the compressed matrices are
/// `S_1 = V^* S V`, `L_1 = V^* L V` and likewise on `W`.
#[derive(Debug, Clone)]
pub struct FittingSplit {
    pub m: usize,
    pub v: CMat,
    pub w: CMat,
    pub s1: CMat,
    pub l1: CMat,
    pub s2: CMat,
    pub l2: CMat,
    /// `V^* S L V`.
    pub s1l1: CMat,
    pub checks: FittingChecks,
}

pub fn fitting_split(s: &CMat, l: &CMat) -> Result<FittingSplit> {
    let n = s.nrows();
    if !s.is_square() || l.shape() != s.shape() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: l.nrows(),
        });
    }
    let sd = hermitian_defect(s);
    if sd > HERMITIAN_TOL {
        return Err(Error::NotSelfAdjoint(sd));
    }
    let sl = s * l;
    let product_defect = hermitian_defect(&sl);
    if product_defect > PRODUCT_HERMITIAN_TOL {
        return Err(Error::NotSelfAdjoint(product_defect));
    }
    let lnorm = spectral_norm_c(l).max(1.0);
    let policy = RankPolicy::default().with_scale(lnorm);
    let ker = nested_kernel(l, n, policy)?;
    let co_ker = nested_kernel(&l.adjoint(), n, policy)?;
    if ker.dim() != co_ker.dim() {
        return Err(Error::RankAmbiguity {
            value: (ker.dim() as f64 - co_ker.dim() as f64).abs(),
            threshold: policy.rel * lnorm,
        });
    }
    let m = ker.dims.len().max(1);
    let v = ker.basis;
    let w = orthogonal_complement(&co_ker.basis, n)?;

    let s1 = v.adjoint() * s * &v;
    let l1 = v.adjoint() * l * &v;
    let s2 = w.adjoint() * s * &w;
    let l2 = w.adjoint() * l * &w;
    let s1l1 = v.adjoint() * &sl * &v;

    let snorm = spectral_norm_c(s).max(1.0);
    let s_orthogonality = spectral_norm_c(&(v.adjoint() * s * &w)) / snorm;
    let mut l1m = CMat::identity(l1.nrows(), l1.ncols());
    for _ in 0..m {
        l1m = &l1m * &l1;
    }
    let nilpotency = if l1.is_empty() { 0.0 } else { spectral_norm_c(&l1m) / lnorm };
    let l2_min_singular = if l2.is_empty() {
        f64::INFINITY
    } else {
        singular_values_c(&l2).last().copied().unwrap_or(f64::INFINITY) / lnorm
    };
    let mut joined = CMat::zeros(n, v.ncols() + w.ncols());
    joined.view_mut((0, 0), (n, v.ncols())).copy_from(&v);
    joined.view_mut((0, v.ncols()), (n, w.ncols())).copy_from(&w);
    let span_min_singular = if joined.ncols() == n && n > 0 {
        singular_values_c(&joined).last().copied().unwrap_or(0.0)
    } else {
        0.0
    };
    Ok(FittingSplit {
        m,
        v,
        w,
        s1,
        l1,
        s2,
        l2,
        s1l1,
        checks: FittingChecks {
            product_defect,
            s_orthogonality,
            nilpotency,
            l2_min_singular,
            span_min_singular,
        },
    })
}

/// Which side of the degenerate crossing `t = 0` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `[0, eps]`.
    Right,
    /// `[-eps, 0]`.
    Left,
    /// `[-eps, eps]`.
    Both,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(Side::Right),
            "left" => Ok(Side::Left),
            "both" => Ok(Side::Both),
            other => Err(Error::Input(format!("unknown side '{other}'"))),
        }
    }
}

/// Spectral flow of `S L + t S` across the possibly degenerate instant `t = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegenerateStartFlow {
    pub side: Side,
    pub value: i64,
    /// Half the distance from 0 to the nearest other instant where the
    /// kernel dimension can change.
    pub epsilon: f64,
    pub m: usize,
    pub kernel_dim: usize,
    pub s1: InertiaTriple,
    pub s1l1: InertiaTriple,
}

pub fn degenerate_start_flow(s: &CMat, l: &CMat, side: Side) -> Result<DegenerateStartFlow> {
    let split = fitting_split(s, l)?;
    let tol = INERTIA_REL * spectral_norm_c(s).max(spectral_norm_c(&(s * l))).max(1.0);
    let s1 = hermitian_inertia_abs(&split.s1, tol).triple;
    let s1l1 = hermitian_inertia_abs(&split.s1l1, tol).triple;
    let value = match side {
        Side::Right => s1l1.n_minus as i64 - s1.n_minus as i64,
        Side::Left => s1.n_plus as i64 - s1l1.n_minus as i64,
        Side::Both => s1.signature(),
    };
    let epsilon = if split.l2.is_empty() {
        1.0
    } else {
        let nearest = crate::linalg::raw_eigenvalues(&split.l2)?
            .iter()
            .fold(f64::INFINITY, |m, e| m.min(e.norm()));
        0.5 * nearest
    };
    Ok(DegenerateStartFlow {
        side,
        value,
        epsilon,
        m: split.m,
        kernel_dim: split.v.ncols(),
        s1,
        s1l1,
    })
}

/// The Krein matrix `G = iJ` of size `2p`.
pub fn krein_matrix(p: usize) -> CMat {
    symplectic_j(p).map(|x| C64::new(0.0, x))
}

/// Outcome of the parity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityStatus {
    Pass,
    Fail,
    /// The spectrum of `JA` is not purely imaginary or the input is malformed.
    NotApplicable,
    /// A numerical decision could not be taken; see `note`.
    Unresolved,
}

/// Every quantity computed by [`parity_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParityVerdict {
    pub p: usize,
    pub status: ParityStatus,
    pub spectrum: Vec<EigenCluster>,
    pub max_abs_real: f64,
    pub imaginary_tol: f64,
    pub offending_eigenvalue: Option<[f64; 2]>,
    pub n_minus: usize,
    pub n_zero: usize,
    pub genker_dim: Option<usize>,
    /// `dim ker (JA)^k` for `k = 1, 2, ...` until stabilisation.
    pub genker_chain: Vec<usize>,
    pub n_minus_restricted: Option<usize>,
    pub parity_holds: Option<bool>,
    /// Crossings of `A + tG` for `t > 0`.
    pub positive_crossings: Vec<CrossingDatum>,
    /// `2p = 2 * sum dim H_t + dim H_0`.
    pub dimension_ledger: Option<bool>,
    pub krein_nondegenerate: Option<bool>,
    pub zero_jordan_trivial: Option<bool>,
    /// `n^0(A)` and `n^-(A)` both even; checked only when the zero Jordan
    /// structure is trivial.
    pub corollary_holds: Option<bool>,
    pub note: Option<String>,
}

impl ParityVerdict {
    fn empty(p: usize) -> Self {
        Self {
            p,
            status: ParityStatus::NotApplicable,
            spectrum: Vec::new(),
            max_abs_real: f64::NAN,
            imaginary_tol: f64::NAN,
            offending_eigenvalue: None,
            n_minus: 0,
            n_zero: 0,
            genker_dim: None,
            genker_chain: Vec::new(),
            n_minus_restricted: None,
            parity_holds: None,
            positive_crossings: Vec::new(),
            dimension_ledger: None,
            krein_nondegenerate: None,
            zero_jordan_trivial: None,
            corollary_holds: None,
            note: None,
        }
    }
}

/// Tests `n^-(A|ker (JA)^{2p}) = n^-(A) mod 2` for symmetric `A` with
/// purely imaginary `sigma(JA)`.
pub fn parity_check(a: &DMatrix<f64>, p: usize) -> ParityVerdict {
    let mut v = ParityVerdict::empty(p);
    if a.nrows() != 2 * p || a.ncols() != 2 * p {
        v.note = Some(format!("expected a {0}x{0} matrix, got {1}x{2}", 2 * p, a.nrows(), a.ncols()));
        return v;
    }
    let sym_defect = (a - a.transpose()).norm() / a.norm().max(1.0);
    if sym_defect > HERMITIAN_TOL {
        v.note = Some(format!("matrix is not symmetric (defect {sym_defect:e})"));
        return v;
    }
    if let Err(e) = parity_fill(a, p, &mut v) {
        v.status = ParityStatus::Unresolved;
        v.note = Some(e.to_string());
    }
    v
}

fn parity_fill(a: &DMatrix<f64>, p: usize, v: &mut ParityVerdict) -> Result<()> {
    let ja = to_complex(&(symplectic_j(p) * a));
    let a_inertia = crate::linalg::inertia(a, INERTIA_REL).triple;
    v.n_minus = a_inertia.n_minus;
    v.n_zero = a_inertia.n_zero;
    v.spectrum = clustered_spectrum(&ja)?;
    let vals: Vec<C64> = v.spectrum.iter().map(|c| c.value()).collect();
    v.max_abs_real = max_abs_real(&vals);
    v.imaginary_tol = IMAGINARY_TOL * spectral_norm(a).max(1.0);
    if v.max_abs_real >= v.imaginary_tol {
        let worst = v
            .spectrum
            .iter()
            .max_by(|x, y| x.re.abs().total_cmp(&y.re.abs()))
            .map(|c| [c.re, c.im]);
        v.offending_eigenvalue = worst;
        v.status = ParityStatus::NotApplicable;
        return Ok(());
    }
    let gk = nested_kernel(&ja, 2 * p, RankPolicy::default())?;
    v.genker_dim = Some(gk.dim());
    v.genker_chain = gk.dims.clone();
    let zero_trivial = gk.semisimple();
    v.zero_jordan_trivial = Some(zero_trivial);
    let restricted = gk.basis.adjoint() * to_complex(a) * &gk.basis;
    let tol = INERTIA_REL * spectral_norm(a).max(1.0);
    let n_minus_restricted = hermitian_inertia_abs(&restricted, tol).triple.n_minus;
    v.n_minus_restricted = Some(n_minus_restricted);
    let holds = (n_minus_restricted + a_inertia.n_minus).is_multiple_of(2);
    v.parity_holds = Some(holds);

    let crossings = crossings_in(&to_complex(a), &krein_matrix(p), 0.0, f64::INFINITY)?;
    let positive: usize = crossings.iter().map(|d| d.generalized_eigenspace_dim).sum();
    v.dimension_ledger = Some(2 * p == 2 * positive + gk.dim());
    v.krein_nondegenerate = Some(crossings.iter().all(CrossingDatum::nondegenerate));
    v.positive_crossings = crossings;
    if zero_trivial {
        v.corollary_holds = Some(a_inertia.n_zero.is_multiple_of(2) && a_inertia.n_minus.is_multiple_of(2));
    }
    v.status = if holds {
        ParityStatus::Pass
    } else {
        ParityStatus::Fail
    };
    Ok(())
}

/// Seeded generators of test matrices.
pub mod families {
    use nalgebra::DMatrix;
    use rand::Rng;

    use crate::linalg::{symplectic_j, to_complex, CMat, C64};

    use super::AffinePath;

    pub fn random_real<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    pub fn random_complex<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
        let x = random_complex(rng, n, n);
        (&x + x.adjoint()) * C64::new(0.5, 0.0)
    }

    pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
        let x = random_real(rng, n, n);
        (&x + x.transpose()) * 0.5
    }

    /// Random unitary matrix from the QR factorisation of a random matrix.
    pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
        random_complex(rng, n, n).qr().q()
    }

    /// Random well-conditioned invertible matrix `I + 0.3 X`.
    pub fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> CMat {
        CMat::identity(n, n) + random_complex(rng, n, n) * C64::new(0.3 / (n as f64).sqrt(), 0.0)
    }

    /// A path with random Hermitian endpoints-defining matrices on `[-2, 2]`.
    pub fn random_affine_path<R: Rng>(rng: &mut R, n: usize) -> AffinePath {
        let base = random_hermitian(rng, n);
        let direction = random_hermitian(rng, n);
        AffinePath::new(base, direction, -2.0, 2.0).expect("random Hermitian path")
    }

    /// Random symplectic matrix: a product of shears and a block `diag(Q, Q^{-T})`.
    pub fn random_symplectic<R: Rng>(rng: &mut R, p: usize) -> DMatrix<f64> {
        let eye = DMatrix::<f64>::identity(p, p);
        let mut upper = DMatrix::<f64>::identity(2 * p, 2 * p);
        let x = random_symmetric(rng, p) * 0.5;
        upper.view_mut((0, p), (p, p)).copy_from(&x);
        let mut lower = DMatrix::<f64>::identity(2 * p, 2 * p);
        let y = random_symmetric(rng, p) * 0.5;
        lower.view_mut((p, 0), (p, p)).copy_from(&y);
        let q = &eye + random_real(rng, p, p) * (0.3 / (p as f64).sqrt());
        let q_inv_t = q.clone().try_inverse().expect("near-identity block").transpose();
        let mut diag = DMatrix::<f64>::zeros(2 * p, 2 * p);
        diag.view_mut((0, 0), (p, p)).copy_from(&q);
        diag.view_mut((p, p), (p, p)).copy_from(&q_inv_t);
        let s = upper * diag * lower;
        debug_assert!((s.transpose() * symplectic_j(p) * &s - symplectic_j(p)).amax() < 1e-10);
        s
    }

    /// Symmetric positive definite matrix of size `2p`.
    pub fn positive_definite<R: Rng>(rng: &mut R, p: usize) -> DMatrix<f64> {
        let x = random_real(rng, 2 * p, 2 * p);
        &x * x.transpose() + DMatrix::identity(2 * p, 2 * p) * 0.1
    }

    /// `diag(a_1..a_p, b_1..b_p)` with every product `a_k b_k >= 0`, so that
    /// `JA` is purely imaginary, moved by a random symplectic congruence.
    ///
    /// Pairs are drawn from four kinds: both nonzero with the same sign, one
    /// of them zero (a 2x2 Jordan block of `JA` at 0), or both zero.
    pub fn stable_degenerate<R: Rng>(rng: &mut R, p: usize) -> DMatrix<f64> {
        let mut d = DMatrix::<f64>::zeros(2 * p, 2 * p);
        for k in 0..p {
            let mag = |rng: &mut R| rng.random_range(0.5..2.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let (a, b) = match rng.random_range(0..4) {
                0 | 1 => (sign * mag(rng), sign * mag(rng)),
                2 => {
                    if rng.random_bool(0.5) {
                        (sign * mag(rng), 0.0)
                    } else {
                        (0.0, sign * mag(rng))
                    }
                }
                _ => (0.0, 0.0),
            };
            d[(k, k)] = a;
            d[(p + k, p + k)] = b;
        }
        let s = random_symplectic(rng, p);
        let a = s.transpose() * d * &s;
        (&a + a.transpose()) * 0.5
    }

    /// The two diagonal matrices with purely imaginary `JA` used as fixed
    /// references: one with a nontrivial zero Jordan block, one with an odd
    /// dimensional kernel.
    pub fn curated() -> Vec<(&'static str, DMatrix<f64>)> {
        vec![
            (
                "diag(-2,-1,1,-1,0,0)",
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, -1.0, 1.0, -1.0, 0.0, 0.0])),
            ),
            (
                "diag(-2,1,1,-1,1,0)",
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, 1.0, 1.0, -1.0, 1.0, 0.0])),
            ),
        ]
    }

    fn direct_sum(blocks: &[CMat]) -> CMat {
        let n: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut out = CMat::zeros(n, n);
        let mut at = 0;
        for b in blocks {
            out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
            at += b.nrows();
        }
        out
    }

    fn real_block(rows: usize, entries: &[f64]) -> CMat {
        to_complex(&DMatrix::from_row_slice(rows, rows, entries))
    }

    /// A pair `(S, L)` with `S L` Hermitian of size about `n`.
    ///
    /// Three constructions alternate: `L = S^{-1} H` with `H` singular,
    /// `S = G` and `L = G A` for a degenerate symmetric `A`, and direct sums
    /// of nilpotent model blocks with an invertible diagonal part moved by a
    /// random congruence `S -> P^* S P`, `L -> P^{-1} L P`.
    pub fn fitting_pair<R: Rng>(rng: &mut R, n: usize) -> (CMat, CMat) {
        match rng.random_range(0..3) {
            0 => {
                let s = random_hermitian(rng, n);
                let u = random_unitary(rng, n);
                let r = rng.random_range(1..=n.div_ceil(2));
                let d = nalgebra::DVector::from_fn(n, |i, _| {
                    if i < r {
                        C64::new(0.0, 0.0)
                    } else {
                        C64::new(rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0)
                    }
                });
                let h = &u * CMat::from_diagonal(&d) * u.adjoint();
                let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
                let s_inv = s.clone().try_inverse().expect("random Hermitian is invertible");
                (s, s_inv * h)
            }
            1 => {
                let p = n.div_ceil(2).max(1);
                let a = stable_degenerate(rng, p);
                let g = super::krein_matrix(p);
                let l = &g * to_complex(&a);
                (g, l)
            }
            _ => {
                let mut ss = Vec::new();
                let mut ls = Vec::new();
                let mut size = 0;
                while size < n {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    match rng.random_range(0..5) {
                        0 => {
                            ss.push(real_block(2, &[0.0, sign, sign, 0.0]));
                            ls.push(real_block(2, &[0.0, 1.0, 0.0, 0.0]));
                            size += 2;
                        }
                        1 => {
                            ss.push(real_block(3, &[0.0, 0.0, sign, 0.0, sign, 0.0, sign, 0.0, 0.0]));
                            ls.push(real_block(3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]));
                            size += 3;
                        }
                        2 => {
                            ss.push(real_block(1, &[sign]));
                            ls.push(real_block(1, &[0.0]));
                            size += 1;
                        }
                        3 => {
                            ss.push(real_block(1, &[0.0]));
                            ls.push(real_block(1, &[0.0]));
                            size += 1;
                        }
                        _ => {
                            let mu = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                            ss.push(real_block(1, &[sign]));
                            ls.push(real_block(1, &[mu]));
                            size += 1;
                        }
                    }
                }
                let s0 = direct_sum(&ss);
                let l0 = direct_sum(&ls);
                let m = s0.nrows();
                let pm = random_invertible(rng, m);
                let p_inv = pm.clone().try_inverse().expect("near-identity matrix");
                let s = pm.adjoint() * s0 * &pm;
                let s = (&s + s.adjoint()) * C64::new(0.5, 0.0);
                (s, p_inv * l0 * pm)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real(rows: usize, entries: &[f64]) -> CMat {
        to_complex(&DMatrix::from_row_slice(rows, rows, entries))
    }

    fn count_minus(h: &CMat) -> usize {
        hermitian_inertia(h, INERTIA_REL).triple.n_minus
    }

    #[test]
    fn endpoint_flow_basics() {
        let one = real(1, &[1.0]);
        let path = AffinePath::new(CMat::zeros(1, 1), one.clone(), -1.0, 1.0).unwrap();
        assert_eq!(spectral_flow_endpoints(&path, false).unwrap(), 1);
        let constant = AffinePath::new(real(2, &[2.0, 0.0, 0.0, -1.0]), CMat::zeros(2, 2), 0.0, 1.0).unwrap();
        assert_eq!(spectral_flow_endpoints(&constant, false).unwrap(), 0);
        let singular = AffinePath::new(CMat::zeros(1, 1), one, 0.0, 1.0).unwrap();
        assert!(matches!(
            spectral_flow_endpoints(&singular, false),
            Err(Error::AmbiguousInertia { .. })
        ));
    }

    #[test]
    fn endpoint_flow_is_cogredient_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let path = random_affine_path(&mut rng, 6);
            let m = random_invertible(&mut rng, 6);
            let moved = AffinePath::new(
                m.adjoint() * &path.base * &m,
                m.adjoint() * &path.direction * &m,
                path.a,
                path.b,
            );
            let moved = match moved {
                Ok(p) => p,
                Err(_) => {
                    let b = m.adjoint() * &path.base * &m;
                    let d = m.adjoint() * &path.direction * &m;
                    let half = C64::new(0.5, 0.0);
                    AffinePath::new((&b + b.adjoint()) * half, (&d + d.adjoint()) * half, path.a, path.b).unwrap()
                }
            };
            assert_eq!(
                spectral_flow_endpoints(&path, false).unwrap(),
                spectral_flow_endpoints(&moved, false).unwrap()
            );
        }
    }

    #[test]
    fn crossings_sum_to_endpoint_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..100 {
            let n = 2 + trial % 11;
            let path = random_affine_path(&mut rng, n);
            let data = crossing_contributions(&path).unwrap();
            for d in &data {
                assert_eq!((d.local_contribution - d.generalized_eigenspace_dim as i64).rem_euclid(2), 0);
            }
            assert_eq!(total_contribution(&data), spectral_flow_endpoints(&path, false).unwrap());
        }
    }

    #[test]
    fn concatenation_and_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p1 = random_affine_path(&mut rng, 4);
        let p2 = random_affine_path(&mut rng, 3);
        let split = |p: &AffinePath, a: f64, b: f64| {
            AffinePath::new(p.base.clone(), p.direction.clone(), a, b).unwrap()
        };
        let whole = spectral_flow_endpoints(&p1, false).unwrap();
        let parts = spectral_flow_endpoints(&split(&p1, -2.0, 0.37), false).unwrap()
            + spectral_flow_endpoints(&split(&p1, 0.37, 2.0), false).unwrap();
        assert_eq!(whole, parts);
        let mut base = CMat::zeros(7, 7);
        base.view_mut((0, 0), (4, 4)).copy_from(&p1.base);
        base.view_mut((4, 4), (3, 3)).copy_from(&p2.base);
        let mut dir = CMat::zeros(7, 7);
        dir.view_mut((0, 0), (4, 4)).copy_from(&p1.direction);
        dir.view_mut((4, 4), (3, 3)).copy_from(&p2.direction);
        let sum = AffinePath::new(base, dir, -2.0, 2.0).unwrap();
        assert_eq!(
            spectral_flow_endpoints(&sum, false).unwrap(),
            whole + spectral_flow_endpoints(&p2, false).unwrap()
        );
    }

    #[test]
    fn krein_crossings_of_reference_matrices() {
        let refs = curated();
        let g = krein_matrix(3);
        let first = crossings_in(&to_complex(&refs[0].1), &g, 0.0, f64::INFINITY).unwrap();
        assert_eq!(first.len(), 1);
        assert!((first[0].t_star - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(first[0].generalized_eigenspace_dim, 1);
        assert_eq!(first[0].local_contribution.abs(), 1);
        let second = crossings_in(&to_complex(&refs[1].1), &g, 0.0, f64::INFINITY).unwrap();
        let ts: Vec<f64> = second.iter().map(|d| d.t_star).collect();
        assert_eq!(ts.len(), 2);
        assert!((ts[0] - 1.0).abs() < 1e-12 && (ts[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fitting_split_models() {
        let s = real(2, &[0.0, 1.0, 1.0, 0.0]);
        let l = real(2, &[0.0, 1.0, 0.0, 0.0]);
        let f = fitting_split(&s, &l).unwrap();
        assert_eq!((f.m, f.v.ncols(), f.w.ncols()), (2, 2, 0));
        assert!(f.checks.nilpotency < 1e-14);
        let inv = fitting_split(&CMat::identity(3, 3), &real(3, &[2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 4.0])).unwrap();
        assert_eq!((inv.m, inv.v.ncols(), inv.w.ncols()), (1, 0, 3));
        let bad = fitting_split(&CMat::identity(2, 2), &real(2, &[0.0, 1.0, 0.0, 0.0]));
        assert!(matches!(bad, Err(Error::NotSelfAdjoint(_))));
    }

    #[test]
    fn degenerate_start_model_values() {
        let s = real(2, &[0.0, 1.0, 1.0, 0.0]);
        let l = real(2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(degenerate_start_flow(&s, &l, Side::Right).unwrap().value, -1);
        assert_eq!(degenerate_start_flow(&s, &l, Side::Both).unwrap().value, 0);
        assert_eq!(degenerate_start_flow(&s, &l, Side::Left).unwrap().value, 1);
        let pd = real(2, &[2.0, 0.5, 0.5, 1.0]);
        assert_eq!(degenerate_start_flow(&pd, &CMat::zeros(2, 2), Side::Right).unwrap().value, 0);
    }

    #[test]
    fn degenerate_start_matches_endpoint_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..60 {
            let (s, l) = fitting_pair(&mut rng, 3 + trial % 6);
            let split = fitting_split(&s, &l).unwrap();
            assert!(split.checks.s_orthogonality < 1e-10, "{}", split.checks.s_orthogonality);
            let right = degenerate_start_flow(&s, &l, Side::Right).unwrap();
            let eps = right.epsilon;
            let path = |t: f64| &s * &l + &s * C64::new(t, 0.0);
            let (m0, mp, mm) = (count_minus(&path(0.0)), count_minus(&path(eps)), count_minus(&path(-eps)));
            assert_eq!(right.value, m0 as i64 - mp as i64);
            assert_eq!(degenerate_start_flow(&s, &l, Side::Left).unwrap().value, mm as i64 - m0 as i64);
            assert_eq!(degenerate_start_flow(&s, &l, Side::Both).unwrap().value, mm as i64 - mp as i64);
        }
    }

    #[test]
    fn parity_reference_matrices() {
        let refs = curated();
        let v = parity_check(&refs[0].1, 3);
        assert_eq!(v.status, ParityStatus::Pass);
        assert_eq!((v.n_minus, v.genker_dim, v.n_minus_restricted), (3, Some(4), Some(1)));
        assert_eq!(v.zero_jordan_trivial, Some(false));
        assert_eq!(v.dimension_ledger, Some(true));
        let w = parity_check(&refs[1].1, 3);
        assert_eq!(w.status, ParityStatus::Pass);
        assert_eq!((w.n_minus, w.n_minus_restricted), (2, Some(0)));
    }

    #[test]
    fn genker_of_reference_matrix_is_coordinate_span() {
        let a = &curated()[0].1;
        let ja = to_complex(&(symplectic_j(3) * a));
        let basis = generalized_kernel(&ja, 6).unwrap();
        assert_eq!(basis.ncols(), 4);
        let proj = &basis * basis.adjoint();
        for (i, expected) in [0.0, 1.0, 1.0, 0.0, 1.0, 1.0].iter().enumerate() {
            assert!((proj[(i, i)].re - expected).abs() < 1e-12);
        }
        let jordan = real(3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(generalized_kernel(&jordan, 3).unwrap().ncols(), 3);
        assert_eq!(generalized_kernel(&CMat::identity(3, 3), 3).unwrap().ncols(), 0);
    }

    #[test]
    fn parity_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let v = parity_check(&positive_definite(&mut rng, 4), 4);
            assert_eq!(v.status, ParityStatus::Pass);
            assert_eq!((v.n_minus, v.genker_dim), (0, Some(0)));
            assert_eq!(v.corollary_holds, Some(true));
            let w = parity_check(&stable_degenerate(&mut rng, 4), 4);
            assert_eq!(w.status, ParityStatus::Pass, "{w:?}");
            assert_eq!(w.dimension_ledger, Some(true));
            assert_eq!(w.krein_nondegenerate, Some(true));
            if w.zero_jordan_trivial == Some(true) {
                assert_eq!(w.corollary_holds, Some(true));
            }
        }
        let saddle = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let v = parity_check(&saddle, 1);
        assert_eq!(v.status, ParityStatus::NotApplicable);
        assert!(v.offending_eigenvalue.is_some());
    }
}
