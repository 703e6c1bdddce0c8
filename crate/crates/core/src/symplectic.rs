//! Invariant symplectic splitting `E1 + E2 + E3` of the linearized system,
//! the M-orthogonal change of basis commuting with the rotation generator,
//! and the reduced matrices `L3`, `B3`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::central_config::{CentralConfiguration, Geometry};
use crate::error::{Error, Result};
use crate::linalg::{self, InertiaTriple, RankPolicy, INERTIA_REL};
use crate::quaternion::{on_bodies, plane_generator, QuaternionAction};
use crate::rotating_frame::{translation, FrameMode, LinearizedSystem};

/// Which invariant splitting applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCase {
    NonplanarRe,
    PlanarReCollinearCc,
    PlanarRePlanarCc,
    Planar2,
}

impl SplitCase {
    pub fn resolve(mode: FrameMode, geometry: Geometry) -> Result<Self> {
        Ok(match (mode, geometry) {
            (FrameMode::Double4, _) => SplitCase::NonplanarRe,
            (FrameMode::Simple4, Geometry::Collinear) => SplitCase::PlanarReCollinearCc,
            (FrameMode::Simple4, Geometry::PlanarNoncollinear) => SplitCase::PlanarRePlanarCc,
            (FrameMode::Simple4, Geometry::SpatialNonplanar) => {
                return Err(Error::ModeMismatch(
                    "simple4 needs a planar or collinear configuration".into(),
                ))
            }
            (FrameMode::Planar2, _) => SplitCase::Planar2,
        })
    }

    /// Dimension of the reduced space `E3` for `n` bodies.
    pub fn e3_dim(self, n: usize) -> usize {
        match self {
            SplitCase::NonplanarRe | SplitCase::PlanarReCollinearCc => 8 * n - 16,
            SplitCase::PlanarRePlanarCc => 8 * n - 20,
            SplitCase::Planar2 => 4 * n - 8,
        }
    }

    /// Number of configuration directions spanned by `E2`.
    pub fn e2_config_dim(self) -> usize {
        match self {
            SplitCase::NonplanarRe | SplitCase::PlanarReCollinearCc => 4,
            SplitCase::PlanarRePlanarCc => 6,
            SplitCase::Planar2 => 2,
        }
    }
}

/// An invariant subspace with the matrix of `L` restricted to it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantBlock {
    /// Basis vectors as columns.
    pub basis: DMatrix<f64>,
    /// Matrix `R` with `L basis = basis R`.
    pub restriction: DMatrix<f64>,
    /// `||L basis - basis R|| / (||L|| ||basis||)`.
    pub invariance_residual: f64,
    /// Smallest singular value of the Gram matrix of `omega_0` on the block,
    /// relative to `||basis||^2`.
    pub omega_min_singular: f64,
}

fn restrict(l: &DMatrix<f64>, basis: &DMatrix<f64>) -> InvariantBlock {
    let lb = l * basis;
    let r = linalg::pseudo_inverse(basis, 1e-13).expect("SVD of a finite basis") * &lb;
    let bnorm = linalg::spectral_norm(basis).max(f64::MIN_POSITIVE);
    let lnorm = linalg::spectral_norm(l).max(f64::MIN_POSITIVE);
    let residual = (&lb - basis * &r).norm() / (lnorm * bnorm);
    let j = linalg::symplectic_j(l.nrows() / 2);
    let omega = basis.transpose() * j * basis;
    let omega_min = if omega.is_empty() {
        f64::INFINITY
    } else {
        linalg::min_singular(&omega) / (bnorm * bnorm)
    };
    InvariantBlock {
        basis: basis.clone(),
        restriction: r,
        invariance_residual: residual,
        omega_min_singular: omega_min,
    }
}

fn lift_config(x: &DVector<f64>, n: usize) -> DVector<f64> {
    let mut v = DVector::zeros(2 * n);
    v.rows_mut(0, n).copy_from(x);
    v
}

fn lift_momentum(y: &DVector<f64>, n: usize) -> DVector<f64> {
    let mut v = DVector::zeros(2 * n);
    v.rows_mut(n, n).copy_from(y);
    v
}

/// Basis `u_l = (e_l, 0)`, `v_l = (0, M e_l)` of the translation block, in
/// the order `u1, u2, v1, v2, u3, u4, v3, v4` (or `u1, u2, v1, v2` in the plane).
pub fn build_e1(ls: &LinearizedSystem) -> DMatrix<f64> {
    let sys = &ls.cc.system;
    let (n, d, big) = (sys.n(), sys.dim(), sys.size());
    let m = sys.mass_diag();
    let u = |l: usize| lift_config(&translation(n, d, l), big);
    let v = |l: usize| lift_momentum(&translation(n, d, l).component_mul(&m), big);
    let mut cols = Vec::new();
    for pair in (0..d).collect::<Vec<_>>().chunks(2) {
        for &l in pair {
            cols.push(u(l));
        }
        for &l in pair {
            cols.push(v(l));
        }
    }
    DMatrix::from_columns(&cols)
}

/// Configuration vectors generating the rotation/dilation block.
fn e2_config_vectors(ls: &LinearizedSystem, case: SplitCase) -> Vec<DVector<f64>> {
    let sys = &ls.cc.system;
    let q = &ls.cc.q;
    match case {
        SplitCase::NonplanarRe | SplitCase::PlanarReCollinearCc => {
            let qa = QuaternionAction::new(sys.n());
            vec![q.clone(), &qa.i * q, &qa.j * q, &qa.k * q]
        }
        SplitCase::PlanarRePlanarCc => {
            let g = |l, r| on_bodies(&plane_generator(4, l, r), sys.n()) * q;
            vec![q.clone(), g(0, 1), g(0, 2), g(0, 3), g(1, 2), g(1, 3)]
        }
        SplitCase::Planar2 => {
            let g = on_bodies(&plane_generator(2, 0, 1), sys.n()) * q;
            vec![q.clone(), g]
        }
    }
}

/// Basis `z_j = (c_j, 0)`, `w_j = (0, M c_j)` of the rotation/dilation
/// block, ordered in groups `z_{2i+1}, z_{2i+2}, w_{2i+1}, w_{2i+2}`.
pub fn build_e2(ls: &LinearizedSystem, case: SplitCase) -> Result<DMatrix<f64>> {
    let sys = &ls.cc.system;
    let big = sys.size();
    let m = sys.mass_diag();
    let cs = e2_config_vectors(ls, case);
    let mut cols = Vec::new();
    for pair in cs.chunks(2) {
        for c in pair {
            cols.push(lift_config(c, big));
        }
        for c in pair {
            cols.push(lift_momentum(&c.component_mul(&m), big));
        }
    }
    let basis = DMatrix::from_columns(&cols);
    let gram = basis.transpose() * &basis;
    let sv = linalg::singular_values(&gram);
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    if smin <= 1e-12 * smax {
        return Err(Error::DegenerateBasis(format!(
            "rotation block vectors are dependent (Gram singular value ratio {:e})",
            smin / smax
        )));
    }
    Ok(basis)
}

fn i2(k: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -k, k, 0.0])
}

fn quad_block(tl: &DMatrix<f64>, bl: &DMatrix<f64>, br: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(tl);
    m.view_mut((0, 2), (2, 2)).copy_from(&DMatrix::identity(2, 2));
    m.view_mut((2, 0), (2, 2)).copy_from(bl);
    m.view_mut((2, 2), (2, 2)).copy_from(br);
    m
}

fn direct_sum(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        m.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    m
}

/// Restriction of `L` to the translation block in the basis of [`build_e1`],
/// derived from `L u_l = (K e_l, 0)` and `L v_l = u_l + (0, M K e_l)`.
pub fn expected_e1(mode: FrameMode, k: f64) -> DMatrix<f64> {
    let z = DMatrix::zeros(2, 2);
    match mode {
        FrameMode::Double4 => direct_sum(&[quad_block(&i2(k), &z, &i2(k)), quad_block(&i2(-k), &z, &i2(-k))]),
        FrameMode::Simple4 => direct_sum(&[quad_block(&i2(k), &z, &i2(k)), quad_block(&z, &z, &z)]),
        FrameMode::Planar2 => quad_block(&i2(k), &z, &i2(k)),
    }
}

/// Restriction of `L` to the rotation/dilation block in the basis of
/// [`build_e2`], with `A = diag(2k^2, -k^2)` and `B = -k^2 I`.
pub fn expected_e2(case: SplitCase, k: f64) -> DMatrix<f64> {
    let k2 = k * k;
    let a = DMatrix::from_row_slice(2, 2, &[2.0 * k2, 0.0, 0.0, -k2]);
    let b = DMatrix::identity(2, 2) * (-k2);
    let z = DMatrix::zeros(2, 2);
    match case {
        SplitCase::NonplanarRe => direct_sum(&[quad_block(&i2(k), &a, &i2(k)), quad_block(&i2(k), &b, &i2(k))]),
        SplitCase::PlanarReCollinearCc => direct_sum(&[quad_block(&i2(k), &a, &i2(k)), quad_block(&z, &b, &z)]),
        SplitCase::PlanarRePlanarCc => direct_sum(&[
            quad_block(&i2(k), &a, &i2(k)),
            quad_block(&z, &b, &z),
            quad_block(&z, &b, &z),
        ]),
        SplitCase::Planar2 => quad_block(&i2(k), &a, &i2(k)),
    }
}

/// M-orthogonal change of basis commuting with `K`, with index sets of the
/// columns spanning the configuration parts of `E1`, `E2`, `E3`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChangeOfBasis {
    pub a: DMatrix<f64>,
    pub e1: Vec<usize>,
    pub e2: Vec<usize>,
    pub e3: Vec<usize>,
}

const SKIP_TOL: f64 = 1e-8;

struct MGs<'a> {
    w: &'a DVector<f64>,
    basis: Vec<DVector<f64>>,
}

impl MGs<'_> {
    fn ip(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.iter().zip(y.iter()).zip(self.w.iter()).map(|((a, b), w)| a * b * w).sum()
    }

    /// Residual of `s` after two projection passes, normalized, or `None`
    /// when it lies within the skip tolerance of the current span.
    fn orthonormalize(&self, s: &DVector<f64>) -> Option<DVector<f64>> {
        let s_norm = self.ip(s, s).sqrt();
        let mut v = s.clone();
        for _ in 0..2 {
            for e in &self.basis {
                let c = self.ip(e, &v);
                v -= e * c;
            }
        }
        let nrm = self.ip(&v, &v).sqrt();
        if nrm <= SKIP_TOL * s_norm.max(f64::MIN_POSITIVE) {
            None
        } else {
            Some(v / nrm)
        }
    }
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Builds the change of basis for the given case.
pub fn build_a(cc: &CentralConfiguration, case: SplitCase) -> Result<ChangeOfBasis> {
    let sys = &cc.system;
    let (n, d, big) = (sys.n(), sys.dim(), sys.size());
    let w = sys.mass_diag();
    let q = &cc.q;
    let mut gs = MGs { w: &w, basis: Vec::new() };
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let (e1, e2): (Vec<usize>, Vec<usize>);
    match case {
        SplitCase::NonplanarRe => {
            let qa = QuaternionAction::new(n);
            let quad = |r: &DVector<f64>| vec![r.clone(), &qa.i * r, -(&qa.j * r), &qa.k * r];
            let push = |r: &DVector<f64>, gs: &mut MGs, cols: &mut Vec<DVector<f64>>| {
                for c in quad(r) {
                    gs.basis.push(c.clone());
                    cols.push(c);
                }
            };
            push(&translation(n, 4, 0), &mut gs, &mut cols);
            let r = gs.orthonormalize(q).ok_or_else(|| Error::DegenerateBasis("q lies in the translation span".into()))?;
            push(&r, &mut gs, &mut cols);
            for i in 0..big {
                if cols.len() == big {
                    break;
                }
                if let Some(r) = gs.orthonormalize(&unit(big, i)) {
                    push(&r, &mut gs, &mut cols);
                }
            }
            e1 = (0..4).collect();
            e2 = (4..8).collect();
        }
        SplitCase::PlanarReCollinearCc | SplitCase::PlanarRePlanarCc => {
            let k12 = on_bodies(&plane_generator(4, 0, 1), n);
            let mut xy: Vec<DVector<f64>> = Vec::new();
            let mut zw: Vec<DVector<f64>> = Vec::new();
            let mut gs_zw = MGs { w: &w, basis: Vec::new() };
            let add_xy = |r: DVector<f64>, gs: &mut MGs, xy: &mut Vec<DVector<f64>>| {
                let r2 = &k12 * &r;
                gs.basis.push(r.clone());
                gs.basis.push(r2.clone());
                xy.push(r);
                xy.push(r2);
            };
            let add_zw = |r: &DVector<f64>, gs: &mut MGs, zw: &mut Vec<DVector<f64>>| -> Result<()> {
                let v = gs
                    .orthonormalize(r)
                    .ok_or_else(|| Error::DegenerateBasis("dependent out-of-plane rotation vectors".into()))?;
                gs.basis.push(v.clone());
                zw.push(v);
                Ok(())
            };
            add_xy(translation(n, 4, 0), &mut gs, &mut xy);
            add_zw(&translation(n, 4, 2), &mut gs_zw, &mut zw)?;
            add_zw(&translation(n, 4, 3), &mut gs_zw, &mut zw)?;
            let r = gs.orthonormalize(q).ok_or_else(|| Error::DegenerateBasis("q lies in the translation span".into()))?;
            add_xy(r, &mut gs, &mut xy);
            if case == SplitCase::PlanarReCollinearCc {
                let qa = QuaternionAction::new(n);
                add_zw(&-(&qa.j * q), &mut gs_zw, &mut zw)?;
                add_zw(&(&qa.k * q), &mut gs_zw, &mut zw)?;
            } else {
                for (l, r) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
                    add_zw(&(on_bodies(&plane_generator(4, l, r), n) * q), &mut gs_zw, &mut zw)?;
                }
            }
            for i in 0..big {
                let s = unit(big, i);
                if i % 4 < 2 {
                    if xy.len() < 2 * n {
                        if let Some(r) = gs.orthonormalize(&s) {
                            add_xy(r, &mut gs, &mut xy);
                        }
                    }
                } else if zw.len() < 2 * n {
                    if let Some(r) = gs_zw.orthonormalize(&s) {
                        gs_zw.basis.push(r.clone());
                        zw.push(r);
                    }
                }
            }
            if xy.len() != 2 * n || zw.len() != 2 * n {
                return Err(Error::GramSchmidtBreakdown {
                    found: xy.len() + zw.len(),
                    needed: big,
                });
            }
            for j in 0..n {
                cols.push(xy[2 * j].clone());
                cols.push(xy[2 * j + 1].clone());
                cols.push(zw[2 * j].clone());
                cols.push(zw[2 * j + 1].clone());
            }
            e1 = (0..4).collect();
            e2 = if case == SplitCase::PlanarRePlanarCc {
                vec![4, 5, 6, 7, 10, 11]
            } else {
                (4..8).collect()
            };
        }
        SplitCase::Planar2 => {
            let k12 = on_bodies(&plane_generator(2, 0, 1), n);
            let push = |r: DVector<f64>, gs: &mut MGs, cols: &mut Vec<DVector<f64>>| {
                let r2 = &k12 * &r;
                gs.basis.push(r.clone());
                gs.basis.push(r2.clone());
                cols.push(r);
                cols.push(r2);
            };
            push(translation(n, 2, 0), &mut gs, &mut cols);
            let r = gs.orthonormalize(q).ok_or_else(|| Error::DegenerateBasis("q lies in the translation span".into()))?;
            push(r, &mut gs, &mut cols);
            for i in 0..big {
                if cols.len() == big {
                    break;
                }
                if let Some(r) = gs.orthonormalize(&unit(big, i)) {
                    push(r, &mut gs, &mut cols);
                }
            }
            e1 = vec![0, 1];
            e2 = vec![2, 3];
        }
    }
    if cols.len() != big {
        return Err(Error::GramSchmidtBreakdown {
            found: cols.len(),
            needed: big,
        });
    }
    let _ = d;
    let used: Vec<usize> = e1.iter().chain(e2.iter()).copied().collect();
    let e3 = (0..big).filter(|i| !used.contains(i)).collect();
    Ok(ChangeOfBasis {
        a: DMatrix::from_columns(&cols),
        e1,
        e2,
        e3,
    })
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Comparison of `B3` with the block form obtained by the triangular congruence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalFormRecord {
    pub b3_inertia: InertiaTriple,
    /// Inertia of the reduced Hessian `D + lambda I` on the configuration part of `E3`.
    pub reduced_hessian_inertia: InertiaTriple,
    /// `(n+(H), n0(H), n-(H) + dim)`, the inertia `B3` has when `K^2 = -lambda I`.
    pub predicted_b3_inertia: InertiaTriple,
    /// `|| C B3 C^T - diag(-D + K^2, I) ||`.
    pub congruence_residual: f64,
    /// `|| K^2 + lambda I ||`; zero when the rotation acts on every coordinate.
    pub k_squared_defect: f64,
    pub exact_match: bool,
    pub nullity_match: bool,
    pub index_parity_match: bool,
}

/// Cross-checks of the splitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitChecks {
    /// `||A^T M A - I||_max`.
    pub a_orthogonality: f64,
    /// `||A K - K A||_max`.
    pub a_commutation: f64,
    /// `||(A^T)^{-1} - M A||_max` on the `E1`, `E2` columns.
    pub a_inverse_transpose: f64,
    /// Largest invariance residual over the three blocks.
    pub invariance: [f64; 3],
    pub omega_min_singular: [f64; 3],
    /// Hausdorff distance between the spectrum of `L` and the union of the
    /// block spectra.
    pub spectrum_union_hausdorff: f64,
    /// Hausdorff distance between the spectra of `L3` and of `L` restricted
    /// to the symplectic complement of `E1 + E2`.
    pub complement_hausdorff: f64,
    /// `sigma_min / sigma_max` of `[E1 E2 E3]`.
    pub direct_sum_conditioning: f64,
    /// Deviation of the `E1`, `E2` restrictions from the derived forms.
    pub e1_form_deviation: f64,
    pub e2_form_deviation: f64,
}

/// The full splitting and reduced system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymplecticSplit {
    pub case: SplitCase,
    pub mode: FrameMode,
    pub e1: InvariantBlock,
    pub e2: InvariantBlock,
    /// `E3` as columns of `diag(A, M A)`.
    pub e3: InvariantBlock,
    /// `E3` as the `omega_0`-orthogonal complement of `E1 + E2`.
    pub e3_complement: InvariantBlock,
    pub change_of_basis: ChangeOfBasis,
    pub k3: DMatrix<f64>,
    pub d3: DMatrix<f64>,
    pub l3: DMatrix<f64>,
    pub b3: DMatrix<f64>,
    pub lambda: f64,
    pub checks: SplitChecks,
}

impl SymplecticSplit {
    pub fn dim(&self) -> usize {
        self.b3.nrows()
    }
}

fn cluster_values(m: &DMatrix<f64>) -> Result<Vec<linalg::C64>> {
    Ok(linalg::expand_clusters(&linalg::clustered_spectrum(&linalg::to_complex(m))?))
}

/// Builds the splitting, the reduced matrices and every cross-check.
///
/// Fails with [`Error::InvarianceViolation`] when any of the three blocks
/// is not invariant to `1e-8 ||L||`.
pub fn decompose(ls: &LinearizedSystem) -> Result<SymplecticSplit> {
    let cc = &ls.cc;
    let case = SplitCase::resolve(ls.mode, cc.geometry)?;
    let sys = &cc.system;
    let big = sys.size();
    let m = sys.mass_matrix();
    let mdiag = sys.mass_diag();

    let b1 = build_e1(ls);
    let b2 = build_e2(ls, case)?;
    let e1 = restrict(&ls.l, &b1);
    let e2 = restrict(&ls.l, &b2);

    let cob = build_a(cc, case)?;
    let a = &cob.a;
    let at_m_a = a.transpose() * &m * a;
    let a_orthogonality = (at_m_a - DMatrix::identity(big, big)).amax();
    let a_commutation = (a * &ls.k - &ls.k * a).amax();
    let a_inv_t = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateBasis("change of basis is singular".into()))?
        .transpose();
    let ma = &m * a;
    let first: Vec<usize> = cob.e1.iter().chain(cob.e2.iter()).copied().collect();
    let a_inverse_transpose = first
        .iter()
        .map(|&c| (a_inv_t.column(c) - ma.column(c)).amax())
        .fold(0.0, f64::max);

    let e3i = &cob.e3;
    let p = e3i.len();
    let dfull = a.transpose() * &ls.hess_u * a;
    let kfull = a.transpose() * &m * &ls.k * a;
    let d3 = {
        let s = select(&dfull, e3i, e3i);
        (&s + s.transpose()) * 0.5
    };
    let k3 = select(&kfull, e3i, e3i);
    let mut l3 = DMatrix::zeros(2 * p, 2 * p);
    l3.view_mut((0, 0), (p, p)).copy_from(&k3);
    l3.view_mut((0, p), (p, p)).copy_from(&DMatrix::identity(p, p));
    l3.view_mut((p, 0), (p, p)).copy_from(&d3);
    l3.view_mut((p, p), (p, p)).copy_from(&k3);
    let b3 = linalg::symplectic_j(p) * &l3;

    // E3 from the change of basis: columns of diag(A, M A).
    let mut e3_cols = Vec::with_capacity(2 * p);
    for &c in e3i {
        e3_cols.push(lift_config(&a.column(c).into_owned(), big));
    }
    for &c in e3i {
        e3_cols.push(lift_momentum(&a.column(c).component_mul(&mdiag), big));
    }
    let b3_basis = DMatrix::from_columns(&e3_cols);
    let e3 = restrict(&ls.l, &b3_basis);

    // Independent route: symplectic orthogonal complement of E1 + E2.
    let b12 = {
        let mut cols: Vec<DVector<f64>> = b1.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(b2.column_iter().map(|c| c.into_owned()));
        DMatrix::from_columns(&cols)
    };
    let jb12 = ls.j() * &b12;
    let comp = linalg::null_space_real(&jb12.transpose(), RankPolicy::lenient())?;
    let e3_complement = restrict(&ls.l, &comp);
    let lnorm = linalg::spectral_norm(&ls.l);
    for (what, block) in [("E1", &e1), ("E2", &e2)] {
        if block.invariance_residual > 1e-8 {
            return Err(Error::InvarianceViolation {
                what: what.into(),
                residual: block.invariance_residual * lnorm,
                bound: 1e-8 * lnorm,
            });
        }
    }
    if e3_complement.invariance_residual > 1e-8 {
        return Err(Error::InvarianceViolation {
            what: "symplectic complement of E1 + E2".into(),
            residual: e3_complement.invariance_residual * lnorm,
            bound: 1e-8 * lnorm,
        });
    }
    if e3.invariance_residual > 1e-8 {
        return Err(Error::InvarianceViolation {
            what: "E3 from the change of basis".into(),
            residual: e3.invariance_residual * lnorm,
            bound: 1e-8 * lnorm,
        });
    }

    let spec_l3 = cluster_values(&l3)?;
    let spec_comp = cluster_values(&e3_complement.restriction)?;
    let complement_hausdorff = linalg::hausdorff(&spec_l3, &spec_comp);
    let mut union = cluster_values(&e1.restriction)?;
    union.extend(cluster_values(&e2.restriction)?);
    union.extend(spec_l3.iter().copied());
    let spec_l = cluster_values(&ls.l)?;
    let spectrum_union_hausdorff = linalg::hausdorff(&spec_l, &union);

    let all = {
        let mut cols: Vec<DVector<f64>> = b12.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(b3_basis.column_iter().map(|c| c.into_owned()));
        DMatrix::from_columns(&cols)
    };
    let sv = linalg::singular_values(&all);
    let direct_sum_conditioning = sv[sv.len() - 1] / sv[0];

    let k = ls.k_speed;
    let e1_form_deviation = (&e1.restriction - expected_e1(ls.mode, k)).amax();
    let e2_form_deviation = (&e2.restriction - expected_e2(case, k)).amax();

    let checks = SplitChecks {
        a_orthogonality,
        a_commutation,
        a_inverse_transpose,
        invariance: [e1.invariance_residual, e2.invariance_residual, e3.invariance_residual],
        omega_min_singular: [e1.omega_min_singular, e2.omega_min_singular, e3.omega_min_singular],
        spectrum_union_hausdorff,
        complement_hausdorff,
        direct_sum_conditioning,
        e1_form_deviation,
        e2_form_deviation,
    };
    Ok(SymplecticSplit {
        case,
        mode: ls.mode,
        e1,
        e2,
        e3,
        e3_complement,
        change_of_basis: cob,
        k3,
        d3,
        l3,
        b3,
        lambda: cc.lambda,
        checks,
    })
}

/// Compares the inertia of `B3` with the inertia predicted from the reduced
/// Hessian via the congruence `[[I, K], [0, I]] B3 [[I, 0], [-K, I]] = diag(-D + K^2, I)`.
pub fn n3_normal_form(split: &SymplecticSplit) -> NormalFormRecord {
    let p = split.d3.nrows();
    let k = &split.k3;
    let mut c = DMatrix::identity(2 * p, 2 * p);
    c.view_mut((0, p), (p, p)).copy_from(k);
    let congruent = &c * &split.b3 * c.transpose();
    let k2 = k * k;
    let mut target = DMatrix::zeros(2 * p, 2 * p);
    target.view_mut((0, 0), (p, p)).copy_from(&(-&split.d3 + &k2));
    target.view_mut((p, p), (p, p)).copy_from(&DMatrix::identity(p, p));
    let congruence_residual = (congruent - target).amax();
    let k_squared_defect = (&k2 + DMatrix::identity(p, p) * split.lambda).amax();

    let h = &split.d3 + DMatrix::identity(p, p) * split.lambda;
    let h_in = linalg::inertia(&h, INERTIA_REL).triple;
    let b3_in = linalg::inertia(&split.b3, INERTIA_REL).triple;
    let predicted = InertiaTriple {
        n_minus: h_in.n_plus,
        n_zero: h_in.n_zero,
        n_plus: h_in.n_minus + p,
    };
    NormalFormRecord {
        b3_inertia: b3_in,
        reduced_hessian_inertia: h_in,
        predicted_b3_inertia: predicted,
        congruence_residual,
        k_squared_defect,
        exact_match: predicted == b3_in,
        nullity_match: predicted.n_zero == b3_in.n_zero,
        index_parity_match: predicted.n_minus % 2 == b3_in.n_minus % 2,
    }
}

/// Ranks of `span{K_lr q}` without and with the vector `i q i` (left and
/// right multiplication by the quaternion unit `i`).
pub fn right_action_rank_test(cc: &CentralConfiguration) -> (usize, usize) {
    let n = cc.n();
    let q = &cc.q;
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for l in 0..4 {
        for r in (l + 1)..4 {
            cols.push(on_bodies(&plane_generator(4, l, r), n) * q);
        }
    }
    let without = linalg::numerical_rank(&DMatrix::from_columns(&cols), 1e-10);
    let both = crate::quaternion::dyn4(&(crate::quaternion::qi() * crate::quaternion::qi_right()));
    cols.push(on_bodies(&both, n) * q);
    let with = linalg::numerical_rank(&DMatrix::from_columns(&cols), 1e-10);
    (without, with)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::central_config::{align_to_axes, CentralConfiguration};
    use crate::nbody::MassSystem;
    use crate::presets::Preset;
    use crate::rotating_frame::linearize;

    fn preset_cc(p: Preset, ambient: usize) -> CentralConfiguration {
        let sys = MassSystem::new(&p.equal_masses(), ambient).unwrap();
        let q = align_to_axes(&sys, &crate::central_config::normalize(&sys, &p.seed(ambient).unwrap()).unwrap()).unwrap();
        CentralConfiguration::from_configuration(&sys, &q, 1e-12).unwrap()
    }

    fn all_cases() -> Vec<(Preset, usize, FrameMode)> {
        vec![
            (Preset::Lagrange, 2, FrameMode::Planar2),
            (Preset::Lagrange, 4, FrameMode::Simple4),
            (Preset::Lagrange, 4, FrameMode::Double4),
            (Preset::Euler, 2, FrameMode::Planar2),
            (Preset::Euler, 4, FrameMode::Simple4),
            (Preset::Euler, 4, FrameMode::Double4),
            (Preset::Tetrahedron, 4, FrameMode::Double4),
            (Preset::Square, 4, FrameMode::Simple4),
            (Preset::Square, 4, FrameMode::Double4),
            (Preset::Square, 2, FrameMode::Planar2),
        ]
    }

    #[test]
    fn splits_satisfy_invariants() {
        for (p, amb, mode) in all_cases() {
            let cc = preset_cc(p, amb);
            let ls = linearize(&cc, mode).unwrap();
            let s = decompose(&ls).unwrap();
            let c = &s.checks;
            let tag = format!("{} {:?}", p.name(), mode);
            assert_eq!(s.dim(), s.case.e3_dim(cc.n()), "{tag}");
            assert!(c.a_orthogonality < 1e-10, "{tag} {c:?}");
            assert!(c.a_commutation < 1e-10, "{tag} {c:?}");
            assert!(c.a_inverse_transpose < 1e-10, "{tag} {c:?}");
            assert!(c.invariance.iter().all(|r| *r < 1e-9), "{tag} {c:?}");
            assert!(c.spectrum_union_hausdorff < 1e-7, "{tag} {c:?}");
            assert!(c.complement_hausdorff < 1e-8, "{tag} {c:?}");
            assert!(c.e1_form_deviation < 1e-9, "{tag} {c:?}");
            assert!(c.e2_form_deviation < 1e-9, "{tag} {c:?}");
            assert!(c.omega_min_singular.iter().all(|w| *w > 1e-12), "{tag} {c:?}");
            assert!((&s.b3 - s.b3.transpose()).amax() < 1e-12, "{tag}");
        }
    }

    #[test]
    fn normal_form_bookkeeping() {
        for (p, amb, mode) in all_cases() {
            let cc = preset_cc(p, amb);
            let s = decompose(&linearize(&cc, mode).unwrap()).unwrap();
            let nf = n3_normal_form(&s);
            let tag = format!("{} {:?}", p.name(), mode);
            assert!(nf.congruence_residual < 1e-9, "{tag} {nf:?}");
            assert!(nf.nullity_match && nf.index_parity_match, "{tag} {nf:?}");
            if mode != FrameMode::Simple4 {
                assert!(nf.k_squared_defect < 1e-12, "{tag}");
                assert!(nf.exact_match, "{tag} {nf:?}");
            }
        }
    }

    #[test]
    fn tetrahedron_reduced_nullity() {
        let cc = preset_cc(Preset::Tetrahedron, 4);
        assert!(cc.morse_bott());
        let s = decompose(&linearize(&cc, FrameMode::Double4).unwrap()).unwrap();
        assert_eq!(s.dim(), 16);
        let nf = n3_normal_form(&s);
        assert_eq!(nf.b3_inertia.n_zero, cc.inertia().n_zero - 3);
        assert_eq!(nf.b3_inertia.n_zero, 3);
    }

    #[test]
    fn right_multiplication_leaves_the_algebra() {
        let cc = preset_cc(Preset::Tetrahedron, 4);
        let (without, with) = right_action_rank_test(&cc);
        assert_eq!(with, without + 1);
    }

    #[test]
    fn planar_rotation_block_gram_pairing() {
        let cc = preset_cc(Preset::Lagrange, 4);
        let ls = linearize(&cc, FrameMode::Simple4).unwrap();
        let b2 = build_e2(&ls, SplitCase::PlanarRePlanarCc).unwrap();
        assert_eq!(b2.ncols(), 12);
        let j = ls.j();
        let omega = |a: usize, b: usize| (j.clone() * b2.column(a)).dot(&b2.column(b));
        let sum_x2: f64 = (0..3).map(|i| cc.system.masses()[i] * cc.q[4 * i].powi(2)).sum();
        // z3 and w3 sit at columns 4 and 6.
        assert!((omega(4, 6) - sum_x2).abs() < 1e-14);
        assert!(sum_x2 > 0.0);
        let e2 = restrict(&ls.l, &b2);
        assert!(e2.invariance_residual < 1e-12);
    }

    #[test]
    fn collinear_simple_block_matches_double_span() {
        let cc = preset_cc(Preset::Euler, 4);
        let ls = linearize(&cc, FrameMode::Simple4).unwrap();
        let b2 = build_e2(&ls, SplitCase::PlanarReCollinearCc).unwrap();
        assert_eq!(b2.ncols(), 8);
        let e2 = restrict(&ls.l, &b2);
        assert!(e2.invariance_residual < 1e-12);
        // L z1 = k z2 + 2 k^2 w1.
        let k = ls.k_speed;
        let col = e2.restriction.column(0);
        assert!((col[1] - k).abs() < 1e-12 && (col[2] - 2.0 * k * k).abs() < 1e-12);
    }
}
