//! Spectral and linear stability of relative equilibria and the parity
//! instability criteria.
//!
//! A relative equilibrium is spectrally stable when `J B3` has purely
//! imaginary spectrum and linearly stable when moreover `J B3` is
//! diagonalizable. The criteria evaluated here only ever conclude
//! instability; every other outcome is reported as inconclusive.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::central_config::{CentralConfiguration, Geometry};
use crate::error::{Error, Result};
use crate::linalg::{
    self, clustered_spectrum, hermitian_inertia_abs, max_abs_real, nested_kernel, spectral_norm,
    symplectic_j, to_complex, EigenCluster, InertiaTriple, RankPolicy, C64, INERTIA_REL,
};
use crate::rotating_frame::{linearize, FrameMode};
use crate::symplectic::{decompose, n3_normal_form, NormalFormRecord, SplitCase, SplitChecks};

/// Relative tolerance on real parts for spectral stability.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Keys of [`StabilityReport::theorem_verdicts`].
pub const THEOREM_KEYS: [&str; 5] = ["main-1", "main-2.1", "main-2.2a", "main-2.2b", "planar-case"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Unstable,
    Inconclusive,
    NotApplicable,
}

/// What an "unstable" verdict asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstabilityKind {
    Spectral,
    Linear,
}

/// One numerically verified hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    /// Distance of the underlying numerical decision from its threshold,
    /// as a ratio (> 1 means the decision is safe); absent for purely
    /// combinatorial hypotheses.
    pub margin: Option<f64>,
}

impl Hypothesis {
    fn new(name: &str, holds: bool, margin: Option<f64>) -> Self {
        Self {
            name: name.to_string(),
            holds,
            margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremDetail {
    pub verdict: Verdict,
    pub kind: InstabilityKind,
    pub hypotheses: Vec<Hypothesis>,
}

impl TheoremDetail {
    fn not_applicable(kind: InstabilityKind, why: &str) -> Self {
        Self {
            verdict: Verdict::NotApplicable,
            kind,
            hypotheses: vec![Hypothesis::new(why, false, None)],
        }
    }

    fn from_hypotheses(kind: InstabilityKind, hypotheses: Vec<Hypothesis>) -> Self {
        let verdict = if hypotheses.iter().all(|h| h.holds) {
            Verdict::Unstable
        } else {
            Verdict::Inconclusive
        };
        Self {
            verdict,
            kind,
            hypotheses,
        }
    }
}

/// Spectral stability of `J B3`: the flag and `max |Re lambda|`.
pub fn spectral_stability(b3: &DMatrix<f64>) -> Result<(bool, f64)> {
    let (stable, max_re, _, _) = spectral_data(b3)?;
    Ok((stable, max_re))
}

fn hamiltonian(b3: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !b3.is_square() || !b3.nrows().is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: b3.nrows() + b3.nrows() % 2,
            got: b3.ncols(),
        });
    }
    Ok(symplectic_j(b3.nrows() / 2) * b3)
}

fn spectral_data(b3: &DMatrix<f64>) -> Result<(bool, f64, f64, Vec<EigenCluster>)> {
    let jb = hamiltonian(b3)?;
    let clusters = clustered_spectrum(&to_complex(&jb))?;
    let vals: Vec<C64> = clusters.iter().map(EigenCluster::value).collect();
    let max_re = max_abs_real(&vals);
    let tol = SPECTRAL_TOL * spectral_norm(b3).max(1.0);
    Ok((max_re < tol, max_re, tol, clusters))
}

/// Linear stability of `J B3`: spectral stability and equal geometric and
/// algebraic multiplicity at every eigenvalue.
pub fn linear_stability(b3: &DMatrix<f64>) -> Result<bool> {
    let (stable, _, _, clusters) = spectral_data(b3)?;
    linear_from_clusters(stable, &clusters)
}

fn linear_from_clusters(spectrally_stable: bool, clusters: &[EigenCluster]) -> Result<bool> {
    if !spectrally_stable {
        return Ok(false);
    }
    if let Some(c) = clusters.iter().find(|c| !c.resolved) {
        return Err(Error::ClusterError {
            at: format!("{:+.6e}{:+.6e}i", c.re, c.im),
            separation: 0.0,
            resolution: linalg::CLUSTER_RESOLUTION,
        });
    }
    Ok(clusters.iter().all(EigenCluster::semisimple))
}

/// Everything the classifier computed for one relative equilibrium.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub mode: FrameMode,
    pub case: SplitCase,
    pub geometry: Geometry,
    pub n: usize,
    pub k_speed: f64,
    pub lambda: f64,
    pub b3_dim: usize,
    /// Spectrum of `J B3` in verified clusters.
    pub spectrum: Vec<EigenCluster>,
    pub spectrally_stable: bool,
    pub max_abs_real: f64,
    pub spectral_tol: f64,
    pub linearly_stable: bool,
    pub zero_jordan_nontrivial: bool,
    pub n_minus_b3: usize,
    pub n_zero_b3: usize,
    pub n_plus_b3: usize,
    /// Inertia gap of `B3`: smallest nonzero |eigenvalue| over the tolerance.
    pub b3_inertia_margin: f64,
    /// Power used for the generalized kernel `ker (J B3)^power`.
    pub genker_power: usize,
    pub genker_dim: usize,
    pub genker_chain: Vec<usize>,
    pub n_minus_restricted: usize,
    pub theorem_verdicts: BTreeMap<String, Verdict>,
    pub theorem_details: BTreeMap<String, TheoremDetail>,
    /// The general form of the second item of the inertia theorem, for
    /// Morse-Bott degenerate inputs as well.
    pub main_2_2_general: TheoremDetail,
    pub cc_inertia: InertiaTriple,
    pub morse_bott: bool,
    pub orbit_tangent_dim: usize,
    /// `n^+(q) = n^-(B3)`, the index identity behind the inertia theorem.
    pub index_identity: Option<bool>,
    pub normal_form: NormalFormRecord,
    pub split_checks: SplitChecks,
    /// Contradictions between a verdict and the direct spectrum, plus
    /// violated structural invariants. Expected to be empty.
    pub alerts: Vec<String>,
}

impl StabilityReport {
    pub fn verdict(&self, key: &str) -> Option<Verdict> {
        self.theorem_verdicts.get(key).copied()
    }

    pub fn any_unstable_verdict(&self) -> bool {
        self.theorem_verdicts.values().any(|v| *v == Verdict::Unstable) || self.main_2_2_general.verdict == Verdict::Unstable
    }
}

/// Runs linearization, reduction and every criterion for `cc` rotating in `mode`.
pub fn classify(cc: &CentralConfiguration, mode: FrameMode) -> Result<StabilityReport> {
    let ls = linearize(cc, mode)?;
    let split = decompose(&ls)?;
    let normal_form = n3_normal_form(&split);
    let b3 = &split.b3;
    let dim = b3.nrows();
    let n = cc.n();

    let (spectrally_stable, max_abs_real, spectral_tol, spectrum) = spectral_data(b3)?;
    let linearly_stable = linear_from_clusters(spectrally_stable, &spectrum)?;

    let b3_detail = linalg::inertia(b3, INERTIA_REL);
    let b3_in = b3_detail.triple;
    let b3_inertia_margin = b3_detail.nonzero_min / b3_detail.tol.max(f64::MIN_POSITIVE);

    let genker_power = split.case.e3_dim(n);
    let jb = to_complex(&hamiltonian(b3)?);
    let scale = spectral_norm(b3).max(1.0);
    let gk = nested_kernel(&jb, genker_power, RankPolicy::lenient().with_scale(scale))?;
    let zero_jordan_nontrivial = !gk.semisimple();
    let restricted = gk.basis.adjoint() * to_complex(b3) * &gk.basis;
    let n_minus_restricted = hermitian_inertia_abs(&restricted, INERTIA_REL * scale).triple.n_minus;

    let q_in = cc.inertia();
    let morse_bott = cc.morse_bott();
    let orbit = cc.orbit_tangent_dim;
    let planar_q = matches!(cc.geometry, Geometry::Collinear | Geometry::PlanarNoncollinear);

    let parity_odd = (n_minus_restricted + b3_in.n_minus) % 2 == 1;
    let parity_hyp = |name: &str| Hypothesis::new(name, parity_odd, Some(b3_inertia_margin));
    let restricted_even = Hypothesis::new(
        "n^-(B3 on ker (J B3)^power) even",
        n_minus_restricted.is_multiple_of(2),
        Some(b3_inertia_margin),
    );
    let mb = Hypothesis::new("q Morse-Bott nondegenerate", morse_bott, Some(cc.hessian.nonzero_min / cc.hessian.tol.max(f64::MIN_POSITIVE)));

    let in_four = mode != FrameMode::Planar2;
    let mut details = BTreeMap::new();
    let main_2_2_general;
    if in_four {
        details.insert(
            "main-1".to_string(),
            TheoremDetail::from_hypotheses(
                InstabilityKind::Spectral,
                vec![parity_hyp("n^-(B3 on ker (J B3)^power) - n^-(B3) odd")],
            ),
        );
        let item1 = (cc.geometry == Geometry::SpatialNonplanar && morse_bott) || (!morse_bott && q_in.n_zero.is_multiple_of(2));
        details.insert(
            "main-2.1".to_string(),
            TheoremDetail::from_hypotheses(
                InstabilityKind::Linear,
                vec![Hypothesis::new(
                    "q nonplanar and Morse-Bott nondegenerate, or Morse-Bott degenerate with n^0(q) even",
                    item1,
                    mb.margin,
                )],
            ),
        );
        details.insert(
            "main-2.2a".to_string(),
            TheoremDetail::from_hypotheses(
                InstabilityKind::Spectral,
                vec![
                    restricted_even.clone(),
                    mb.clone(),
                    Hypothesis::new("q nonplanar", cc.geometry == Geometry::SpatialNonplanar, None),
                    Hypothesis::new("n^-(q) even", q_in.n_minus.is_multiple_of(2), mb.margin),
                ],
            ),
        );
        details.insert(
            "main-2.2b".to_string(),
            TheoremDetail::from_hypotheses(
                InstabilityKind::Spectral,
                vec![
                    restricted_even.clone(),
                    mb.clone(),
                    Hypothesis::new("q planar", planar_q, None),
                    Hypothesis::new("n^-(q) odd", q_in.n_minus % 2 == 1, mb.margin),
                ],
            ),
        );
        main_2_2_general = TheoremDetail::from_hypotheses(
            InstabilityKind::Spectral,
            vec![
                restricted_even,
                Hypothesis::new("n^-(q) + n^0(q) even", (q_in.n_minus + q_in.n_zero).is_multiple_of(2), mb.margin),
            ],
        );
        details.insert(
            "planar-case".to_string(),
            TheoremDetail::not_applicable(InstabilityKind::Spectral, "relative equilibrium is not in the plane"),
        );
    } else {
        for key in ["main-1", "main-2.1", "main-2.2a", "main-2.2b"] {
            let kind = if key == "main-2.1" {
                InstabilityKind::Linear
            } else {
                InstabilityKind::Spectral
            };
            details.insert(key.to_string(), TheoremDetail::not_applicable(kind, "relative equilibrium is not in R^4"));
        }
        main_2_2_general = TheoremDetail::not_applicable(InstabilityKind::Spectral, "relative equilibrium is not in R^4");
        let mut hyps = vec![parity_hyp("n^-(B3 on ker (J B3)^power) - n^-(B3) odd")];
        if !zero_jordan_nontrivial {
            hyps = vec![
                Hypothesis::new("J B3 has no nontrivial Jordan block at 0", true, None),
                Hypothesis::new("n^-(B3) odd", b3_in.n_minus % 2 == 1, Some(b3_inertia_margin)),
            ];
        }
        details.insert(
            "planar-case".to_string(),
            TheoremDetail::from_hypotheses(InstabilityKind::Spectral, hyps),
        );
    }

    let index_identity = in_four.then_some(q_in.n_plus == b3_in.n_minus);

    let mut alerts = Vec::new();
    let mut check = |name: &str, d: &TheoremDetail| {
        if d.verdict != Verdict::Unstable {
            return;
        }
        let contradicted = match d.kind {
            InstabilityKind::Spectral => spectrally_stable,
            InstabilityKind::Linear => linearly_stable,
        };
        if contradicted {
            alerts.push(format!(
                "{name} concludes {:?} instability but the reduced spectrum is {} (max |Re| = {max_abs_real:e})",
                d.kind,
                if linearly_stable { "linearly stable" } else { "spectrally stable" }
            ));
        }
    };
    for (k, d) in &details {
        check(k, d);
    }
    check("main-2.2", &main_2_2_general);
    if b3_in.n_zero % 2 == 1 && !zero_jordan_nontrivial {
        alerts.push(format!(
            "n^0(B3) = {} is odd but the zero Jordan structure of J B3 was found trivial",
            b3_in.n_zero
        ));
    }
    if gk.dim() % 2 == 1 {
        alerts.push(format!("generalized kernel of J B3 has odd dimension {}", gk.dim()));
    }

    Ok(StabilityReport {
        mode,
        case: split.case,
        geometry: cc.geometry,
        n,
        k_speed: ls.k_speed,
        lambda: cc.lambda,
        b3_dim: dim,
        spectrum,
        spectrally_stable,
        max_abs_real,
        spectral_tol,
        linearly_stable,
        zero_jordan_nontrivial,
        n_minus_b3: b3_in.n_minus,
        n_zero_b3: b3_in.n_zero,
        n_plus_b3: b3_in.n_plus,
        b3_inertia_margin,
        genker_power,
        genker_dim: gk.dim(),
        genker_chain: gk.dims.clone(),
        n_minus_restricted,
        theorem_verdicts: details.iter().map(|(k, d)| (k.clone(), d.verdict)).collect(),
        theorem_details: details,
        main_2_2_general,
        cc_inertia: q_in,
        morse_bott,
        orbit_tangent_dim: orbit,
        index_identity,
        normal_form,
        split_checks: split.checks,
        alerts,
    })
}
