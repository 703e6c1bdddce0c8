//! Dense linear-algebra helpers shared by the analysis modules.
//!
//! Rank decisions, generalized kernels and eigenvalue clusters are made
//! against explicit relative thresholds so that every structural decision can
//! be reported together with the margin it was taken at.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Default relative threshold for rank decisions.
pub const RANK_REL: f64 = 1e-10;
/// Default relative threshold for inertia counts.
pub const INERTIA_REL: f64 = 1e-9;
/// Relative resolution below which distinct eigenvalues are not trusted.
pub const CLUSTER_RESOLUTION: f64 = 1e-8;

const CLUSTER_PROBES: [f64; 4] = [1e-4, 1e-6, 1e-7, CLUSTER_RESOLUTION];

/// Counts of negative, zero and positive eigenvalues of a self-adjoint form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct InertiaTriple {
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
}

impl InertiaTriple {
    pub fn dim(&self) -> usize {
        self.n_minus + self.n_zero + self.n_plus
    }

    pub fn signature(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }
}

/// Inertia together with the tolerance and the spectral gap around it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InertiaDetail {
    pub triple: InertiaTriple,
    pub tol: f64,
    /// Largest |eigenvalue| counted as zero (0 when there is none).
    pub zero_band_max: f64,
    /// Smallest |eigenvalue| counted as nonzero (infinite when there is none).
    pub nonzero_min: f64,
    pub eigenvalues: Vec<f64>,
}

fn classify(eigs: Vec<f64>, tol_rel: f64) -> InertiaDetail {
    let norm = eigs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    classify_abs(eigs, tol_rel * norm)
}

fn classify_abs(eigs: Vec<f64>, tol: f64) -> InertiaDetail {
    let mut t = InertiaTriple::default();
    let mut zero_band_max = 0.0_f64;
    let mut nonzero_min = f64::INFINITY;
    for &e in &eigs {
        if e.abs() <= tol {
            t.n_zero += 1;
            zero_band_max = zero_band_max.max(e.abs());
        } else {
            nonzero_min = nonzero_min.min(e.abs());
            if e < 0.0 {
                t.n_minus += 1;
            } else {
                t.n_plus += 1;
            }
        }
    }
    let mut eigenvalues = eigs;
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    InertiaDetail {
        triple: t,
        tol,
        zero_band_max,
        nonzero_min,
        eigenvalues,
    }
}

/// Eigenvalues of the symmetric part of a real square matrix.
pub fn symmetric_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let s = (h + h.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.iter().copied().collect()
}

/// Eigenvalues of the Hermitian part of a complex square matrix.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let s = (h + h.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(s).eigenvalues.iter().copied().collect()
}

/// Inertia of a real symmetric matrix with tolerance `tol_rel * ||H||`.
pub fn inertia(h: &DMatrix<f64>, tol_rel: f64) -> InertiaDetail {
    classify(symmetric_eigenvalues(h), tol_rel)
}

/// Inertia of a Hermitian matrix with tolerance `tol_rel * ||H||`.
pub fn hermitian_inertia(h: &CMat, tol_rel: f64) -> InertiaDetail {
    classify(hermitian_eigenvalues(h), tol_rel)
}

/// Inertia of a Hermitian matrix with an absolute tolerance, for compressed
/// forms whose own norm may be zero.
pub fn hermitian_inertia_abs(h: &CMat, tol: f64) -> InertiaDetail {
    classify_abs(hermitian_eigenvalues(h), tol)
}

/// Inertia that refuses to count a numerically zero eigenvalue.
pub fn nondegenerate_inertia(h: &CMat, tol_rel: f64) -> Result<InertiaTriple> {
    let d = hermitian_inertia(h, tol_rel);
    if d.triple.n_zero > 0 {
        return Err(Error::AmbiguousInertia {
            value: d.zero_band_max,
            tol: d.tol,
        });
    }
    Ok(d.triple)
}

/// Relative asymmetry `||H - H*|| / max(1, ||H||)` in the Frobenius norm.
pub fn hermitian_defect(h: &CMat) -> f64 {
    (h - h.adjoint()).norm() / h.norm().max(1.0)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Singular value decomposition `a = U diag(s) V^*` with full `U`, `V` and
/// `min(m, n)` singular values in descending order.
///
/// Computed by faer: nalgebra's SVD can return an inaccurate factorization
/// for tall matrices with repeated singular values.
#[derive(Debug, Clone)]
pub struct Svd<T: nalgebra::Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

macro_rules! faer_svd {
    ($name:ident, $t:ty, $re:expr) => {
        pub fn $name(a: &DMatrix<$t>) -> Result<Svd<$t>> {
            let (m, n) = a.shape();
            if m == 0 || n == 0 {
                return Ok(Svd {
                    u: DMatrix::identity(m, m),
                    s: Vec::new(),
                    v: DMatrix::identity(n, n),
                });
            }
            let f = faer::Mat::<$t>::from_fn(m, n, |i, j| a[(i, j)]);
            let svd = f.svd().map_err(|e| Error::EigenFailure(format!("SVD: {e:?}")))?;
            let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
            Ok(Svd {
                u: DMatrix::from_fn(m, m, |i, j| u[(i, j)]),
                s: (0..m.min(n)).map(|i| $re(s[i])).collect(),
                v: DMatrix::from_fn(n, n, |i, j| v[(i, j)]),
            })
        }
    };
}

faer_svd!(svd, f64, |x: f64| x);
faer_svd!(svd_c, C64, |x: C64| x.re);

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
        .singular_values()
        .unwrap_or_else(|_| a.singular_values().iter().copied().collect())
}

pub fn singular_values_c(a: &CMat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    faer::Mat::<C64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
        .singular_values()
        .unwrap_or_else(|_| a.singular_values().iter().copied().collect())
}

/// Smallest singular value, `+inf` for an empty matrix.
pub fn min_singular(a: &DMatrix<f64>) -> f64 {
    singular_values(a).last().copied().unwrap_or(f64::INFINITY)
}

/// Largest singular value.
pub fn spectral_norm_c(m: &CMat) -> f64 {
    singular_values_c(m).first().copied().unwrap_or(0.0)
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Moore-Penrose pseudo-inverse, dropping singular values below `rel * sigma_max`.
pub fn pseudo_inverse(a: &DMatrix<f64>, rel: f64) -> Result<DMatrix<f64>> {
    let (m, n) = a.shape();
    let d = svd(a)?;
    let top = d.s.first().copied().unwrap_or(0.0);
    let mut out = DMatrix::zeros(n, m);
    for (i, &s) in d.s.iter().enumerate() {
        if s > rel * top {
            out += d.v.column(i) * d.u.column(i).transpose() / s;
        }
    }
    Ok(out)
}

/// The standard symplectic matrix `[[0, -I], [I, 0]]` of size `2n`.
pub fn symplectic_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// How strictly a rank decision is taken.
#[derive(Debug, Clone, Copy)]
pub struct RankPolicy {
    pub rel: f64,
    /// Scale the threshold is relative to; `None` uses `max(1, sigma_max)`.
    pub scale: Option<f64>,
    /// Raise [`Error::RankAmbiguity`] when a singular value falls within a
    /// factor 10 of the threshold.
    pub strict: bool,
}

impl Default for RankPolicy {
    fn default() -> Self {
        Self {
            rel: RANK_REL,
            scale: None,
            strict: true,
        }
    }
}

impl RankPolicy {
    pub fn lenient() -> Self {
        Self {
            strict: false,
            ..Self::default()
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }
}

/// Orthonormal basis of the null space of `a` together with the threshold used.
pub fn null_space(a: &CMat, policy: RankPolicy) -> Result<CMat> {
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    if m == 0 {
        return Ok(CMat::identity(n, n));
    }
    let d = svd_c(a)?;
    let sv = &d.s;
    let smax = sv.iter().fold(0.0_f64, |x, &y| x.max(y));
    let scale = policy.scale.unwrap_or(smax.max(1.0));
    let thr = policy.rel * scale;
    let mut cols = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if policy.strict && s >= thr / 10.0 && s <= thr * 10.0 {
            return Err(Error::RankAmbiguity {
                value: s,
                threshold: thr,
            });
        }
        if s < thr {
            cols.push(d.v.column(i).into_owned());
        }
    }
    for i in sv.len()..n {
        cols.push(d.v.column(i).into_owned());
    }
    Ok(if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    })
}

/// Real counterpart of [`null_space`].
pub fn null_space_real(a: &DMatrix<f64>, policy: RankPolicy) -> Result<DMatrix<f64>> {
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if m == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let d = svd(a)?;
    let sv = &d.s;
    let smax = sv.iter().fold(0.0_f64, |x, &y| x.max(y));
    let thr = policy.rel * policy.scale.unwrap_or(smax.max(1.0));
    let mut cols = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if policy.strict && s >= thr / 10.0 && s <= thr * 10.0 {
            return Err(Error::RankAmbiguity {
                value: s,
                threshold: thr,
            });
        }
        if s < thr {
            cols.push(d.v.column(i).into_owned());
        }
    }
    for i in sv.len()..n {
        cols.push(d.v.column(i).into_owned());
    }
    Ok(if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    })
}

/// Numerical rank of a real matrix at relative threshold `rel`.
pub fn numerical_rank(a: &DMatrix<f64>, rel: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * smax).count()
}

/// Orthonormal basis of the orthogonal complement of the column span of `q`
/// (whose columns are assumed orthonormal) in `C^n`.
pub fn orthogonal_complement(q: &CMat, n: usize) -> Result<CMat> {
    if q.ncols() == 0 {
        return Ok(CMat::identity(n, n));
    }
    null_space(&q.adjoint(), RankPolicy::lenient())
}

/// Nested generalized kernel `ker N^k` built one power at a time.
#[derive(Debug, Clone)]
pub struct NestedKernel {
    /// Orthonormal basis of the largest kernel reached.
    pub basis: CMat,
    /// `dims[k]` is `dim ker N^(k+1)`.
    pub dims: Vec<usize>,
}

impl NestedKernel {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Geometric multiplicity `dim ker N`.
    pub fn geometric(&self) -> usize {
        self.dims.first().copied().unwrap_or(0)
    }

    /// Whether every Jordan block at this eigenvalue is trivial.
    pub fn semisimple(&self) -> bool {
        self.geometric() == self.dim()
    }
}

/// `ker N^k` for `k` up to `max_power` (or until the chain stabilises), using
/// `V_{k+1} = ker((I - Q_k Q_k^*) N)`.
pub fn nested_kernel(n_op: &CMat, max_power: usize, policy: RankPolicy) -> Result<NestedKernel> {
    let dim = n_op.nrows();
    let policy = RankPolicy {
        scale: Some(policy.scale.unwrap_or_else(|| spectral_norm_c(n_op).max(1.0))),
        ..policy
    };
    let mut q = CMat::zeros(dim, 0);
    let mut dims = Vec::new();
    for _ in 0..max_power.max(1) {
        let proj = &q * q.adjoint();
        let op = (CMat::identity(dim, dim) - proj) * n_op;
        let next = null_space(&op, policy)?;
        let grew = next.ncols() > q.ncols();
        // Re-orthonormalise against the previous level so that the nested
        // structure is kept exactly.
        q = next;
        dims.push(q.ncols());
        if !grew || q.ncols() == dim {
            break;
        }
    }
    // Drop the trailing repeated level so that dims is strictly increasing.
    while dims.len() > 1 && dims[dims.len() - 1] == dims[dims.len() - 2] {
        dims.pop();
    }
    if dims == [0] {
        dims.clear();
    }
    Ok(NestedKernel { basis: q, dims })
}

/// Generalized eigenspace of `n_op` at `mu`.
pub fn generalized_eigenspace(n_op: &CMat, mu: C64, policy: RankPolicy) -> Result<NestedKernel> {
    let dim = n_op.nrows();
    let shifted = n_op - CMat::identity(dim, dim) * mu;
    let scale = policy
        .scale
        .unwrap_or_else(|| spectral_norm_c(n_op).max(1.0));
    nested_kernel(&shifted, dim, policy.with_scale(scale))
}

/// Raw eigenvalues from a complex Schur decomposition.
pub fn raw_eigenvalues(n_op: &CMat) -> Result<Vec<C64>> {
    if n_op.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(n_op.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::EigenFailure("Schur iteration did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::EigenFailure("Schur form is not triangular".into()))?;
    Ok(ev.iter().copied().collect())
}

/// One eigenvalue cluster with its multiplicities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenCluster {
    pub re: f64,
    pub im: f64,
    pub algebraic: usize,
    pub geometric: usize,
    /// `false` when raw eigenvalues closer than the resolution could not be
    /// confirmed as a single eigenvalue.
    pub resolved: bool,
}

impl EigenCluster {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn semisimple(&self) -> bool {
        self.geometric == self.algebraic
    }
}

fn single_linkage(vals: &[C64], thr: f64) -> Vec<Vec<usize>> {
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let nx = p[c];
            p[c] = r;
            c = nx;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (vals[i] - vals[j]).norm() <= thr {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_index = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_index[r] == usize::MAX {
            root_index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_index[r]].push(i);
    }
    groups
}

fn cluster_level(
    n_op: &CMat,
    vals: &[C64],
    level: usize,
    scale: f64,
    out: &mut Vec<EigenCluster>,
) -> Result<()> {
    let thr = CLUSTER_PROBES[level] * scale;
    for g in single_linkage(vals, thr) {
        let members: Vec<C64> = g.iter().map(|&i| vals[i]).collect();
        if members.len() == 1 {
            let v = members[0];
            out.push(EigenCluster {
                re: v.re,
                im: v.im,
                algebraic: 1,
                geometric: 1,
                resolved: true,
            });
            continue;
        }
        let s = members.len();
        let mean = members.iter().fold(C64::new(0.0, 0.0), |a, &b| a + b) / s as f64;
        let gk = generalized_eigenspace(n_op, mean, RankPolicy::lenient().with_scale(scale))?;
        if gk.dim() == s {
            out.push(EigenCluster {
                re: mean.re,
                im: mean.im,
                algebraic: s,
                geometric: gk.geometric(),
                resolved: true,
            });
        } else if level + 1 < CLUSTER_PROBES.len() {
            cluster_level(n_op, &members, level + 1, scale, out)?;
        } else {
            for v in members {
                out.push(EigenCluster {
                    re: v.re,
                    im: v.im,
                    algebraic: 1,
                    geometric: 1,
                    resolved: false,
                });
            }
        }
    }
    Ok(())
}

/// Spectrum grouped into verified clusters.
///
/// The zero generalized eigenspace is split off first by a nested kernel
/// computation; the remaining eigenvalues come from the compression of the
/// operator onto its orthogonal complement.  Nearby raw eigenvalues are
/// replaced by their mean only when the generalized kernel at the mean has
/// exactly the cluster's size, which recovers Jordan blocks split by
/// rounding.
pub fn clustered_spectrum(n_op: &CMat) -> Result<Vec<EigenCluster>> {
    let dim = n_op.nrows();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let scale = spectral_norm_c(n_op).max(1.0);
    let zero = nested_kernel(n_op, dim, RankPolicy::lenient().with_scale(scale))?;
    let mut out = Vec::new();
    if zero.dim() > 0 {
        out.push(EigenCluster {
            re: 0.0,
            im: 0.0,
            algebraic: zero.dim(),
            geometric: zero.geometric(),
            resolved: true,
        });
    }
    if zero.dim() < dim {
        let comp = orthogonal_complement(&zero.basis, dim)?;
        let reduced = comp.adjoint() * n_op * &comp;
        let vals = raw_eigenvalues(&reduced)?;
        cluster_level(&reduced, &vals, 0, scale, &mut out)?;
    }
    out.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(out)
}

/// Eigenvalues expanded from clusters, each repeated by its algebraic multiplicity.
pub fn expand_clusters(clusters: &[EigenCluster]) -> Vec<C64> {
    clusters
        .iter()
        .flat_map(|c| std::iter::repeat_n(c.value(), c.algebraic))
        .collect()
}

/// Hausdorff distance between two finite subsets of the complex plane.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let directed = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Largest deviation of a greedy one-to-one matching of two multisets, or
/// `None` when their sizes differ.
pub fn multiset_deviation(a: &[C64], b: &[C64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            pairs.push(((p - q).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ua = vec![false; a.len()];
    let mut ub = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for (d, i, j) in pairs {
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            worst = worst.max(d);
        }
    }
    Some(worst)
}

/// Two-pass modified Gram-Schmidt of `candidate` against `existing` in the
/// inner product `<x, W y>`; returns the residual and its `W`-norm.
pub fn weighted_gram_schmidt(
    existing: &[DVector<f64>],
    candidate: &DVector<f64>,
    weight: &DVector<f64>,
) -> (DVector<f64>, f64) {
    let ip = |x: &DVector<f64>, y: &DVector<f64>| -> f64 {
        x.iter().zip(y.iter()).zip(weight.iter()).map(|((a, b), w)| a * b * w).sum()
    };
    let mut v = candidate.clone();
    for _ in 0..2 {
        for e in existing {
            let c = ip(e, &v);
            v -= e * c;
        }
    }
    let nrm = ip(&v, &v).max(0.0).sqrt();
    (v, nrm)
}

/// Largest absolute real part over a spectrum.
pub fn max_abs_real(vals: &[C64]) -> f64 {
    vals.iter().fold(0.0, |a, v| a.max(v.re.abs()))
}
