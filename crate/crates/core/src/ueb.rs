//! Unitary error bases, tight teleportation and dense coding, and the two
//! classifiers that recover a basis and certify a maximally entangled
//! resource from a tight scheme.
//!
//! ```
//! use entverify::ueb::{is_ueb, weyl_basis};
//! let u = weyl_basis(3);
//! assert!(is_ueb(u.elements(), 1e-12).verdict);
//! ```

use crate::algebra::{MultimatrixAlgebra, ResourceState};
use crate::channel::{minimal_dilation, Channel, ChannelError, TraceConvention};
use crate::linalg::{c, eye, op_norm, random_unitary, zeros, CMat, C64};
use crate::schemes::{is_entanglement_reversible, ReversibilityCertificate, SchemeError};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UebError {
    #[error("shape: {0}")]
    Shape(String),
    #[error("not a unitary error basis (unitarity {unitarity:e}, orthogonality {orthogonality:e}, count ok: {count_ok})")]
    NotUeb { unitarity: f64, orthogonality: f64, count_ok: bool },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// `d²` unitaries on `C^d`, orthonormal for `(A, B) ↦ Tr(A†B)/d`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryErrorBasis {
    d: usize,
    elements: Vec<CMat>,
}

impl UnitaryErrorBasis {
    /// Validate with [`is_ueb`] at tolerance `tol`.
    pub fn new(elements: Vec<CMat>, tol: f64) -> Result<Self, UebError> {
        let rep = is_ueb(&elements, tol);
        if rep.ragged {
            return Err(UebError::Shape("elements must be nonempty square matrices of equal size".into()));
        }
        if !rep.verdict {
            return Err(UebError::NotUeb {
                unitarity: rep.unitarity_residual,
                orthogonality: rep.orthogonality_residual,
                count_ok: rep.count_ok,
            });
        }
        Ok(UnitaryErrorBasis { d: elements[0].nrows(), elements })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Multiply element `i` by `phases[i]`.
    pub fn with_phases(&self, phases: &[C64]) -> Self {
        let elements = self.elements.iter().zip(phases).map(|(u, p)| u * *p).collect();
        UnitaryErrorBasis { d: self.d, elements }
    }
}

/// Shift-and-clock basis `X^a Z^b`, element index `a·d + b`.
pub fn weyl_basis(d: usize) -> UnitaryErrorBasis {
    assert!(d >= 1, "weyl_basis needs d >= 1");
    let mut x = zeros(d, d);
    for k in 0..d {
        x[((k + 1) % d, k)] = c(1.0);
    }
    let w = (2.0 * std::f64::consts::PI / d as f64) * C64::i();
    let z = CMat::from_fn(d, d, |r, s| if r == s { (w * r as f64).exp() } else { c(0.0) });
    let mut elements = Vec::with_capacity(d * d);
    let mut xa = eye(d);
    for _ in 0..d {
        let mut zb = eye(d);
        for _ in 0..d {
            elements.push(&xa * &zb);
            zb = &zb * &z;
        }
        xa = &xa * &x;
    }
    UnitaryErrorBasis { d, elements }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UebReport {
    pub verdict: bool,
    pub unitarity_residual: f64,
    pub orthogonality_residual: f64,
    pub count_ok: bool,
    pub ragged: bool,
}

/// Check unitarity, trace-orthogonality and the count `d²`.
pub fn is_ueb(candidate: &[CMat], tol: f64) -> UebReport {
    let ragged = candidate.is_empty()
        || candidate.iter().any(|u| u.nrows() != u.ncols() || u.nrows() != candidate[0].nrows() || u.nrows() == 0);
    if ragged {
        return UebReport {
            verdict: false,
            unitarity_residual: f64::INFINITY,
            orthogonality_residual: f64::INFINITY,
            count_ok: false,
            ragged,
        };
    }
    let d = candidate[0].nrows();
    let unitarity = candidate.iter().map(|u| op_norm(&(u.adjoint() * u - eye(d)))).fold(0.0, f64::max);
    let mut orth: f64 = 0.0;
    for (i, a) in candidate.iter().enumerate() {
        for (j, b) in candidate.iter().enumerate() {
            let g = (b.adjoint() * a).trace() / c(d as f64);
            let want = if i == j { c(1.0) } else { c(0.0) };
            orth = orth.max((g - want).norm());
        }
    }
    let count_ok = candidate.len() == d * d;
    UebReport {
        verdict: count_ok && unitarity < tol && orth < tol,
        unitarity_residual: unitarity,
        orthogonality_residual: orth,
        count_ok,
        ragged,
    }
}

/// `U_i ↦ e^{iθ_i} V U_i W` applied to the Weyl basis with Haar-random `V`, `W`.
pub fn random_ueb(d: usize, seed: u64) -> UnitaryErrorBasis {
    let mut rng = crate::random::rng(seed);
    let v = random_unitary(&mut rng, d);
    let w = random_unitary(&mut rng, d);
    let elements = weyl_basis(d)
        .elements
        .iter()
        .map(|u| {
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            &v * u * &w * C64::from_polar(1.0, th)
        })
        .collect();
    UnitaryErrorBasis { d, elements }
}

/// Bell measurement `B(C^d) ⊗ B(C^d) → [d²]` in the basis
/// `b_i = (1 ⊗ U_i†)|η⟩/√d` (auxiliary factor first), so that outcome `i`
/// leaves the partner with `U_i ψ`.
pub fn teleportation_channel(u: &UnitaryErrorBasis) -> Result<Channel, UebError> {
    let d = u.d;
    let kraus: Vec<Vec<CMat>> = u
        .elements
        .iter()
        .map(|ui| {
            // ⟨b_i|[(a, x)] = conj(U_i†[x, a]) / √d = U_i[a, x] / √d
            vec![CMat::from_fn(1, d * d, |_, ax| ui[(ax / d, ax % d)] / c((d as f64).sqrt()))]
        })
        .collect();
    Ok(Channel::from_kraus(MultimatrixAlgebra::matrix(d), MultimatrixAlgebra::classical(d * d), d, &kraus)?)
}

/// Controlled unitary `[d²] ⊗ B(C^d) → B(C^d)`, `(i, ρ) ↦ U_i† ρ U_i`.
pub fn dense_coding_channel(u: &UnitaryErrorBasis) -> Result<Channel, UebError> {
    let d = u.d;
    let kraus: Vec<Vec<CMat>> = u.elements.iter().map(|ui| vec![ui.adjoint()]).collect();
    Ok(Channel::from_kraus(MultimatrixAlgebra::classical(d * d), MultimatrixAlgebra::matrix(d), d, &kraus)?)
}

/// Greedy matching of two bases up to per-element phase.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMatch {
    /// `perm[i]` is the element of `b` matched with `a[i]`.
    pub perm: Vec<usize>,
    /// `a[i] ≈ phases[i] · b[perm[i]]`.
    pub phases: Vec<C64>,
    /// `max_i ‖a_i − phase_i b_perm(i)‖`.
    pub residual: f64,
}

pub fn match_up_to_phase(a: &[CMat], b: &[CMat]) -> Option<PhaseMatch> {
    if a.len() != b.len() || a.is_empty() || a.iter().chain(b).any(|m| m.shape() != a[0].shape()) {
        return None;
    }
    let n = a.len();
    let d = a[0].nrows() as f64;
    let overlaps: Vec<Vec<C64>> = a.iter().map(|x| b.iter().map(|y| (y.adjoint() * x).trace() / c(d)).collect()).collect();
    let mut pairs: Vec<(f64, usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (overlaps[i][j].norm(), i, j)).collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, i, j) in pairs {
        if perm[i] == usize::MAX && !used[j] {
            perm[i] = j;
            used[j] = true;
        }
    }
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let o = overlaps[i][perm[i]];
            if o.norm() > 0.0 {
                o / o.norm()
            } else {
                c(1.0)
            }
        })
        .collect();
    let residual = (0..n).map(|i| op_norm(&(&a[i] - &b[perm[i]] * phases[i]))).fold(0.0, f64::max);
    Some(PhaseMatch { perm, phases, residual })
}

/// The classifier check that failed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Tightness,
    UebUnitarity,
    UebOrthogonality,
    Purity,
    Reversibility,
    MaximalEntanglement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refusal {
    pub stage: Stage,
    /// The residual of the failed check.
    pub residual: f64,
    /// Other quantities computed before the refusal, by name.
    pub details: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxEntCertificate {
    /// The scalar `s` such that `s · ω` is unitary.
    pub scale: f64,
    pub omega_unitarity_residual: f64,
    pub reversibility_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub ueb: UnitaryErrorBasis,
    pub certificate: MaxEntCertificate,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Teleportation,
    DenseCoding,
}

fn unitarity_of_scaled(omega: &CMat, s: f64) -> f64 {
    let x = omega * c(s);
    op_norm(&(x.adjoint() * &x - eye(omega.ncols())))
}

fn classify(m: &Channel, w: &ResourceState, tol: f64, kind: Kind) -> Result<Result<Classification, Refusal>, UebError> {
    let h = m.aux_dim();
    let (sys, msg) = match kind {
        Kind::Teleportation => (m.source(), m.target()),
        Kind::DenseCoding => (m.target(), m.source()),
    };
    if sys.num_factors() != 1 {
        return Err(UebError::Shape("the quantum side must be a single matrix algebra B(C^d)".into()));
    }
    let d = sys.factors()[0];
    if h != d || msg.factors().len() != d * d || msg.factors().iter().any(|&x| x != 1) {
        return Err(UebError::Shape(format!(
            "expected auxiliary dimension {d} and a classical algebra [{}], got auxiliary dimension {h} and factors {:?}",
            d * d,
            msg.factors()
        )));
    }
    if w.h1() != d || w.h2() != d {
        return Err(UebError::Shape(format!("resource state must act on C^{d} ⊗ C^{d}")));
    }
    let m = m.to_convention(TraceConvention::Matrix);
    let dil = minimal_dilation(&m)?;
    let mut details: Vec<(String, f64)> = vec![];
    let refuse = |stage, residual, details: &Vec<(String, f64)>| Ok(Err(Refusal { stage, residual, details: details.clone() }));
    let env: Vec<usize> = dil.env_dims().iter().flatten().copied().collect();
    let total: usize = env.iter().sum();
    details.push(("environment_total".into(), total as f64));
    if env.iter().any(|&r| r != 1) {
        let worst = env.iter().map(|&r| (r as f64 - 1.0).abs()).fold(0.0, f64::max);
        return refuse(Stage::Tightness, worst, &details);
    }
    let elements: Vec<CMat> = (0..d * d)
        .map(|i| match kind {
            // τ_i is the row ⟨η|(1 ⊗ u_i†)... reshaped: u_i[a, x] = τ_i[(a, x)]
            Kind::Teleportation => {
                let t = dil.tau_block(0, i);
                CMat::from_fn(d, d, |a, x| t[(0, a * d + x)])
            }
            Kind::DenseCoding => dil.tau_block(i, 0).adjoint(),
        })
        .collect();
    let rep = is_ueb(&elements, tol);
    details.push(("ueb_unitarity".into(), rep.unitarity_residual));
    details.push(("ueb_orthogonality".into(), rep.orthogonality_residual));
    if rep.unitarity_residual >= tol {
        return refuse(Stage::UebUnitarity, rep.unitarity_residual, &details);
    }
    if rep.orthogonality_residual >= tol {
        return refuse(Stage::UebOrthogonality, rep.orthogonality_residual, &details);
    }
    let omega = match w.omega() {
        Some(o) => o.clone(),
        None => {
            let rho = w.density();
            let purity = (&rho * &rho).trace().re;
            return refuse(Stage::Purity, 1.0 - purity, &details);
        }
    };
    let rev = is_entanglement_reversible(&m, w, tol)?;
    let scale = match (&rev.certificate, kind) {
        (ReversibilityCertificate::Pure { kappa, .. }, Kind::Teleportation) => {
            let mods: Vec<f64> = kappa.blocks().iter().flat_map(|b| b.iter().map(|x| x.norm())).collect();
            mods.iter().sum::<f64>() / mods.len().max(1) as f64
        }
        _ => d as f64,
    };
    let om_res = unitarity_of_scaled(&omega, scale);
    details.push(("omega_unitarity".into(), om_res));
    details.push(("reversibility".into(), rev.solve_residual()));
    if !rev.verdict {
        return refuse(Stage::Reversibility, rev.solve_residual(), &details);
    }
    if om_res >= tol {
        return refuse(Stage::MaximalEntanglement, om_res, &details);
    }
    Ok(Ok(Classification {
        ueb: UnitaryErrorBasis { d, elements },
        certificate: MaxEntCertificate {
            scale,
            omega_unitarity_residual: om_res,
            reversibility_residual: rev.solve_residual(),
        },
    }))
}

/// Recover the basis of a tight teleportation scheme `B(C^d) ⊗ B(C^d) → [d²]`.
///
/// The outer `Err` is a shape error; the inner one names the first failed check.
pub fn classify_tight_teleportation(
    m: &Channel,
    w: &ResourceState,
    tol: f64,
) -> Result<Result<Classification, Refusal>, UebError> {
    classify(m, w, tol, Kind::Teleportation)
}

/// Recover the basis of a tight dense coding scheme `[d²] ⊗ B(C^d) → B(C^d)`.
pub fn classify_tight_dense_coding(
    n: &Channel,
    w: &ResourceState,
    tol: f64,
) -> Result<Result<Classification, Refusal>, UebError> {
    classify(n, w, tol, Kind::DenseCoding)
}
