//! Quantum bijections, entanglement-reversibility and entanglement-invertibility.
//!
//! Conventions used throughout:
//!
//! - A channel `M : A ⊗ B(H1) → B` is paired with a resource state `W` on
//!   `H1 ⊗ H2` and a candidate inverse `N : B ⊗ B(H2) → A`.
//! - `N` is a left inverse when `N ∘ (M ⊗ 1) ∘ (1 ⊗ W) = 1_A`, and an inverse
//!   when additionally `M ∘ (N ⊗ 1) ∘ (1 ⊗ swap ∘ W) = 1_B`.
//!   [`check_entanglement_pair`] evaluates both as superoperators and is the
//!   reference every predicate here is tested against.
//! - For a pure `W` given by `ω : H1 → H2` the operators
//!   `G_ijk : X_i → H2 ⊗ Y_j`, `G_ijk |x⟩ = (h1 h2)^{1/4} Σ_a ω|a⟩ ⊗ K_ijk(|a⟩ ⊗ |x⟩)`,
//!   built from the matrix-normalized Kraus operators `K_ijk` of a minimal
//!   dilation, carry all information about `(M ⊗ 1)(1 ⊗ W)`. A left inverse
//!   exists exactly when `G_ijk† G_i'jk' = δ_ii' ν_ij[k, k'] · 1` for some
//!   positive `ν_ij`.
//!
//! ```
//! use entverify::schemes::{is_entanglement_reversible, VERDICT_TOL};
//! use entverify::ueb::{teleportation_channel, weyl_basis};
//! use entverify::algebra::ResourceState;
//!
//! let m = teleportation_channel(&weyl_basis(2)).unwrap();
//! let rep = is_entanglement_reversible(&m, &ResourceState::max_entangled(2), VERDICT_TOL).unwrap();
//! assert!(rep.verdict);
//! ```

use crate::algebra::{split_omega, AlgebraError, MultimatrixAlgebra, OmegaSplit, ResourceState, RANK_CUTOFF};
use crate::channel::{
    apply_choi_on_factor, compose_channels, dilation_to_channel, kraus_to_vec, minimal_dilation, Channel,
    ChannelError, Dilation, TraceConvention,
};
use crate::diagram::{BlockMap, Chain, OneMorphism};
use crate::linalg::{
    apply_choi_first, c, eigh, eye, isometry_residual, kron, max_of, op_norm, partial_trace, permute_operator,
    pinv, pinv_sqrt, unit, vec_row, zeros, CMat, C64,
};
use thiserror::Error;

/// Default tolerance on operator-norm residuals for verdicts.
pub const VERDICT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("the dilation is not minimal")]
    NotMinimal,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("channel is not a quantum bijection (worst biunitarity residual {0:e})")]
    NotBiunitary(f64),
    #[error("dim(A) = {dim_a} but dim(B) = {dim_b}")]
    DimensionMismatch { dim_a: usize, dim_b: usize },
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("map is not an isometry (residual {0:e})")]
    NotIsometry(f64),
}

/// The state `W` as a channel `C → B(H1 ⊗ H2)`.
pub fn state_channel(w: &ResourceState) -> Channel {
    let rho = permute_operator(&w.density(), &[w.h2(), w.h1()], &[1, 0]);
    Channel::from_choi(
        MultimatrixAlgebra::matrix(1),
        MultimatrixAlgebra::matrix(w.h1() * w.h2()),
        0,
        TraceConvention::Matrix,
        vec![rho],
    )
    .expect("state shapes")
}

// ---------------------------------------------------------------------------
// Biunitarity

#[derive(Clone, Debug, PartialEq)]
pub struct BiunitarityReport {
    /// `[first, second]` composite, `‖I†I − 1‖`.
    pub isometry_residuals: [f64; 2],
    /// `[first, second]` composite, `‖II† − 1‖`.
    pub coisometry_residuals: [f64; 2],
    pub verdict: bool,
    pub tol: f64,
}

impl BiunitarityReport {
    pub fn worst(&self) -> f64 {
        max_of(self.isometry_residuals.iter().chain(&self.coisometry_residuals).copied())
    }
}

/// `H ⊗ X → Y ⊗ E`: `h^{-1/4} n_X^{-1/2} τ n_Y^{1/2}` (discs on the regions of `X` and `Y`).
pub fn first_composite(d: &Dilation) -> BlockMap {
    let h = d.h() as f64;
    let (sf, tf) = (d.source().factors().to_vec(), d.target().factors().to_vec());
    d.tau().scale(|s, t| c(h.powf(-0.25) * (sf[s[2]] as f64).powf(-0.25) * (tf[t[1]] as f64).powf(0.25)))
}

/// `τ` bent into `X ⊗ E* → H ⊗ Y` with a cup on `H` and a cap on `E`, no scalars.
pub fn bent_tau(d: &Dilation) -> BlockMap {
    let hw = OneMorphism::hilbert(d.h());
    let xw = d.source().splitting();
    let yw = d.target().splitting();
    let ew = d.environment();
    let id = |w: &OneMorphism| BlockMap::identity(&Chain::single(w.clone()));
    let step1 = BlockMap::tensor(&BlockMap::tensor(&BlockMap::cup(&hw), &id(&xw)).unwrap(), &id(&ew.dual())).unwrap();
    let step2 = BlockMap::tensor(&BlockMap::tensor(&id(&hw.dual()), d.tau()).unwrap(), &id(&ew.dual())).unwrap();
    let step3 = BlockMap::tensor(&BlockMap::tensor(&id(&hw.dual()), &id(&yw)).unwrap(), &BlockMap::cap(&ew)).unwrap();
    let bent = BlockMap::compose(&step3, &BlockMap::compose(&step2, &step1).unwrap()).unwrap();
    let target = Chain::new(vec![hw, yw]).unwrap();
    bent.relabel(bent.source().clone(), target).expect("H* and H have equal dimensions")
}

/// `X ⊗ E* → H ⊗ Y`: the bent dilation with `h^{-1/4} n_X^{1/2} · n_Y^{-1/2}`.
pub fn second_composite(d: &Dilation) -> BlockMap {
    let h = d.h() as f64;
    let (sf, tf) = (d.source().factors().to_vec(), d.target().factors().to_vec());
    bent_tau(d).scale(|s, _| c(h.powf(-0.25) * (sf[s[1]] as f64).powf(0.25) * (tf[s[2]] as f64).powf(-0.25)))
}

/// Unitarity residuals of both composites of a minimal dilation.
pub fn biunitarity(d: &Dilation, tol: f64) -> Result<BiunitarityReport, SchemeError> {
    if !d.is_minimal() {
        return Err(SchemeError::NotMinimal);
    }
    let a = first_composite(d);
    let b = second_composite(d);
    let iso = [a.isometry_residual(), b.isometry_residual()];
    let co = [a.coisometry_residual(), b.coisometry_residual()];
    let verdict = iso.iter().chain(&co).all(|&r| r < tol);
    Ok(BiunitarityReport { isometry_residuals: iso, coisometry_residuals: co, verdict, tol })
}

/// Matrix-normalized Kraus operators `K_ijk : H ⊗ X_i → Y_j` of a dilation.
pub fn dilation_kraus(d: &Dilation, i: usize, j: usize) -> Vec<CMat> {
    let t = d.tau_block(i, j);
    let r = d.env_dims()[j][i];
    let e = d.target().factors()[j];
    let din = t.ncols();
    let s = (e as f64 / din as f64).powf(0.25);
    (0..r).map(|k| CMat::from_fn(e, din, |y, a| t[(y * r + k, a)] * c(s))).collect()
}

/// Residuals of the three defining equations of a quantum bijection.
///
/// - `multiplication`: `G_ijk† G_i'jk' = δ_ii' δ_kk' (e_j / (h d_i)) · 1` for the
///   operators `G` of the canonical maximally entangled state.
/// - `comultiplication`: the Heisenberg dual `M*` is multiplicative on matrix units of `B`.
/// - `unit`: `Σ_i (d_i/e_j) Tr_{X_i} C_ij = 1_{H ⊗ Y_j}` for the matrix-form Choi blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct QbijEquations {
    pub multiplication: f64,
    pub comultiplication: f64,
    pub unit: f64,
}

impl QbijEquations {
    pub fn all_pass(&self, tol: f64) -> bool {
        self.multiplication < tol && self.comultiplication < tol && self.unit < tol
    }
}

pub fn check_qbij_equations(d: &Dilation) -> Result<QbijEquations, SchemeError> {
    if !d.is_minimal() {
        return Err(SchemeError::NotMinimal);
    }
    let h = d.h();
    let (m, n) = (d.source().num_factors(), d.target().num_factors());
    let (sf, tf) = (d.source().factors(), d.target().factors());
    let bell = eye(h) / c(h as f64);
    let g = gen_ops(d, &bell);
    let mut mult: f64 = 0.0;
    for j in 0..n {
        for i in 0..m {
            for i2 in 0..m {
                for (k, a) in g[i][j].iter().enumerate() {
                    for (k2, b) in g[i2][j].iter().enumerate() {
                        let mut want = zeros(sf[i], sf[i2]);
                        if i == i2 && k == k2 {
                            want = eye(sf[i]) * c(tf[j] as f64 / (h * sf[i]) as f64);
                        }
                        mult = mult.max(op_norm(&(a.adjoint() * b - want)));
                    }
                }
            }
        }
    }
    let ch = dilation_to_channel(d).to_convention(TraceConvention::Matrix);
    // Heisenberg dual on matrix units of B
    let kraus: Vec<Vec<Vec<CMat>>> = (0..m).map(|i| (0..n).map(|j| dilation_kraus(d, i, j)).collect()).collect();
    let dual = |j: usize, b: &CMat| -> Vec<CMat> {
        (0..m)
            .map(|i| {
                let din = h * sf[i];
                let mut acc = zeros(din, din);
                for k in &kraus[i][j] {
                    acc += k.adjoint() * b * k;
                }
                acc
            })
            .collect()
    };
    let mut comult: f64 = 0.0;
    for j in 0..n {
        let e = tf[j];
        let images: Vec<Vec<CMat>> = (0..e * e).map(|pq| dual(j, &unit(e, pq / e, pq % e))).collect();
        for pq in 0..e * e {
            for sr in 0..e * e {
                let (p, q, s, r) = (pq / e, pq % e, sr / e, sr % e);
                for i in 0..m {
                    let lhs = &images[pq][i] * &images[sr][i];
                    let rhs = if q == s { images[p * e + r][i].clone() } else { zeros(lhs.nrows(), lhs.ncols()) };
                    comult = comult.max(op_norm(&(lhs - rhs)));
                }
            }
        }
    }
    let mut unit_res: f64 = 0.0;
    for j in 0..n {
        let e = tf[j];
        let mut acc = zeros(h * e, h * e);
        for i in 0..m {
            let pt = partial_trace(ch.choi_block(i, j), &[h, sf[i], e], &[1]);
            acc += pt * c(sf[i] as f64 / e as f64);
        }
        unit_res = unit_res.max(op_norm(&(acc - eye(h * e))));
    }
    Ok(QbijEquations { multiplication: mult, comultiplication: comult, unit: unit_res })
}

/// A channel `A ⊗ B(H) → B` whose minimal dilation is biunitary.
#[derive(Clone, Debug)]
pub struct QuantumBijection {
    channel: Channel,
    dilation: Dilation,
    report: BiunitarityReport,
}

impl QuantumBijection {
    pub fn new(channel: &Channel, tol: f64) -> Result<Self, SchemeError> {
        let channel = channel.with_explicit_aux().to_convention(TraceConvention::Matrix);
        let dilation = minimal_dilation(&channel)?;
        let report = biunitarity(&dilation, tol)?;
        if !report.verdict {
            return Err(SchemeError::NotBiunitary(report.worst()));
        }
        Ok(QuantumBijection { channel, dilation, report })
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn dilation(&self) -> &Dilation {
        &self.dilation
    }

    pub fn report(&self) -> &BiunitarityReport {
        &self.report
    }

    pub fn h(&self) -> usize {
        self.channel.h()
    }
}

/// Channel with Kraus operators `(1 ⊗ ⟨k|) V_j†` for a 2-morphism `V : X ⊗ E* → H ⊗ Y`,
/// i.e. block `(j, i)` of the result maps `H ⊗ Y_j → X_i`.
fn channel_from_second(v: &BlockMap, d: &Dilation) -> Channel {
    let (m, n) = (d.source().num_factors(), d.target().num_factors());
    let (sf, _) = (d.source().factors(), d.target().factors());
    let mut kraus = vec![vec![]; n * m];
    for j in 0..n {
        for i in 0..m {
            let r = d.env_dims()[j][i];
            let blk = v.block(&[0, i, j], &[0, 0, j]).expect("second composite key");
            let adj = blk.adjoint();
            for k in 0..r {
                let rows: Vec<usize> = (0..sf[i]).map(|x| x * r + k).collect();
                kraus[j * m + i].push(adj.select_rows(rows.iter()));
            }
        }
    }
    Channel::from_kraus(d.target().clone(), d.source().clone(), d.h(), &kraus).expect("inverse shapes")
}

/// The inverse of a quantum bijection with respect to the canonical maximally entangled state.
pub fn entanglement_inverse_maxent(q: &QuantumBijection) -> Channel {
    channel_from_second(&second_composite(&q.dilation), &q.dilation)
}

// ---------------------------------------------------------------------------
// Oracle

/// Both residuals of the pair of inverse equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairResiduals {
    pub left: f64,
    pub right: f64,
}

impl PairResiduals {
    pub fn passes(&self, tol: f64) -> bool {
        self.left < tol && self.right < tol
    }
}

fn check_pair_shapes(m: &Channel, n: &Channel, w: &ResourceState) -> Result<(), SchemeError> {
    if n.source() != m.target() || n.target() != m.source() {
        return Err(SchemeError::Shape("N must map the target of M back to its source".into()));
    }
    if m.h() != w.h1() {
        return Err(SchemeError::Shape(format!("M has auxiliary dimension {}, W has h1 = {}", m.h(), w.h1())));
    }
    if n.h() != w.h2() {
        return Err(SchemeError::Shape(format!("N has auxiliary dimension {}, W has h2 = {}", n.h(), w.h2())));
    }
    Ok(())
}

/// Left residual only: `‖N ∘ (M ⊗ 1) ∘ (1 ⊗ W) − 1_A‖` as superoperators.
pub fn left_residual(m: &Channel, n: &Channel, w: &ResourceState) -> Result<f64, SchemeError> {
    let sup = left_superoperator(m, n, w)?;
    Ok(op_norm(&(&sup - eye(sup.nrows()))))
}

/// Right residual only: `‖M ∘ (N ⊗ 1) ∘ (1 ⊗ swap ∘ W) − 1_B‖` as superoperators.
pub fn right_residual(m: &Channel, n: &Channel, w: &ResourceState) -> Result<f64, SchemeError> {
    let sup = right_superoperator(m, n, w)?;
    Ok(op_norm(&(&sup - eye(sup.nrows()))))
}

/// `N ∘ (M ⊗ 1) ∘ (1 ⊗ W)` on the row-major vectorization of `A`.
pub fn left_superoperator(m: &Channel, n: &Channel, w: &ResourceState) -> Result<CMat, SchemeError> {
    check_pair_shapes(m, n, w)?;
    let (h1, h2) = (w.h1(), w.h2());
    let w12 = permute_operator(&w.density(), &[h2, h1], &[1, 0]);
    let mb = m.blocks_in(TraceConvention::Matrix);
    let nb = n.blocks_in(TraceConvention::Matrix);
    let (a, b) = (m.source(), m.target());
    let (ma, nbn) = (a.num_factors(), b.num_factors());
    let dim_a = a.dim();
    let mut sup = zeros(dim_a, dim_a);
    let mut col = 0;
    for i in 0..ma {
        let di = a.factors()[i];
        for p in 0..di {
            for q in 0..di {
                let z = permute_operator(&kron(&w12, &unit(di, p, q)), &[h1, h2, di], &[0, 2, 1]);
                let mut out: Vec<CMat> = a.factors().iter().map(|&d| zeros(d, d)).collect();
                for j in 0..nbn {
                    let e = b.factors()[j];
                    let y = apply_choi_first(&mb[i * nbn + j], h1 * di, e, &z);
                    let y = permute_operator(&y, &[e, h2], &[1, 0]);
                    for (i2, o) in out.iter_mut().enumerate() {
                        *o += apply_choi_first(&nb[j * ma + i2], h2 * e, a.factors()[i2], &y);
                    }
                }
                let v: Vec<C64> = out.iter().flat_map(|o| vec_row(o).iter().copied().collect::<Vec<_>>()).collect();
                for (r, x) in v.into_iter().enumerate() {
                    sup[(r, col)] = x;
                }
                col += 1;
            }
        }
    }
    Ok(sup)
}

/// `M ∘ (N ⊗ 1) ∘ (1 ⊗ swap ∘ W)` on the row-major vectorization of `B`.
pub fn right_superoperator(m: &Channel, n: &Channel, w: &ResourceState) -> Result<CMat, SchemeError> {
    check_pair_shapes(m, n, w)?;
    let (h1, h2) = (w.h1(), w.h2());
    let w21 = w.density();
    let mb = m.blocks_in(TraceConvention::Matrix);
    let nb = n.blocks_in(TraceConvention::Matrix);
    let (a, b) = (m.source(), m.target());
    let (ma, nbn) = (a.num_factors(), b.num_factors());
    let dim_b = b.dim();
    let mut sup = zeros(dim_b, dim_b);
    let mut col = 0;
    for j in 0..nbn {
        let e = b.factors()[j];
        for p in 0..e {
            for q in 0..e {
                let z = permute_operator(&kron(&unit(e, p, q), &w21), &[e, h2, h1], &[1, 0, 2]);
                let mut out: Vec<CMat> = b.factors().iter().map(|&d| zeros(d, d)).collect();
                for i in 0..ma {
                    let di = a.factors()[i];
                    let x = apply_choi_first(&nb[j * ma + i], h2 * e, di, &z);
                    let x = permute_operator(&x, &[di, h1], &[1, 0]);
                    for (j2, o) in out.iter_mut().enumerate() {
                        *o += apply_choi_first(&mb[i * nbn + j2], h1 * di, b.factors()[j2], &x);
                    }
                }
                let v: Vec<C64> = out.iter().flat_map(|o| vec_row(o).iter().copied().collect::<Vec<_>>()).collect();
                for (r, x) in v.into_iter().enumerate() {
                    sup[(r, col)] = x;
                }
                col += 1;
            }
        }
    }
    Ok(sup)
}

/// Evaluate both inverse equations as full superoperators.
pub fn check_entanglement_pair(m: &Channel, n: &Channel, w: &ResourceState) -> Result<PairResiduals, SchemeError> {
    Ok(PairResiduals { left: left_residual(m, n, w)?, right: right_residual(m, n, w)? })
}

// ---------------------------------------------------------------------------
// Reversibility

/// `G_ijk` for every block and Kraus index: `[i][j][k]`, each `(h2 e_j) × d_i`.
pub fn gen_ops(d: &Dilation, omega: &CMat) -> Vec<Vec<Vec<CMat>>> {
    let (m, n) = (d.source().num_factors(), d.target().num_factors());
    let (h1, h2) = (omega.ncols(), omega.nrows());
    let s = c(((h1 * h2) as f64).powf(0.25));
    let sf = d.source().factors();
    let tf = d.target().factors();
    (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    dilation_kraus(d, i, j)
                        .into_iter()
                        .map(|k| {
                            let (di, e) = (sf[i], tf[j]);
                            let mut g = zeros(h2 * e, di);
                            for b in 0..h2 {
                                for a in 0..h1 {
                                    let w = omega[(b, a)];
                                    if w == C64::new(0.0, 0.0) {
                                        continue;
                                    }
                                    for y in 0..e {
                                        for x in 0..di {
                                            g[(b * e + y, x)] += w * k[(y, a * di + x)];
                                        }
                                    }
                                }
                            }
                            g * s
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Solve `Gs_ijk† Gt_i'jk' = δ_ii' ν_ij[k, k'] · 1` by projection; returns `ν`
/// on `E*` and the worst residual.
fn solve_nu(d: &Dilation, gs: &[Vec<Vec<CMat>>], gt: &[Vec<Vec<CMat>>]) -> (BlockMap, f64) {
    let (m, n) = (d.source().num_factors(), d.target().num_factors());
    let sf = d.source().factors();
    let mut res: f64 = 0.0;
    let estar = Chain::single(d.environment().dual());
    let nu = BlockMap::from_fn(estar.clone(), estar, |s, _| {
        let (i, j) = (s[0], s[1]);
        let r = d.env_dims()[j][i];
        let di = sf[i];
        let mut v = zeros(r, r);
        for k in 0..r {
            for k2 in 0..r {
                let p = gs[i][j][k].adjoint() * &gt[i][j][k2];
                v[(k, k2)] = p.trace() / c(di as f64);
                res = res.max(op_norm(&(p - eye(di) * v[(k, k2)])));
            }
        }
        v
    })
    .expect("environment chain");
    for j in 0..n {
        for i in 0..m {
            for i2 in 0..m {
                if i == i2 {
                    continue;
                }
                for a in &gs[i][j] {
                    for b in &gt[i2][j] {
                        res = res.max(op_norm(&(a.adjoint() * b)));
                    }
                }
            }
        }
    }
    (nu, res)
}

/// `dim(A)`, `dim(B)` and their comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimsVerdict {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl DimsVerdict {
    pub fn of(m: &Channel) -> Self {
        DimsVerdict { dim_a: m.source().dim(), dim_b: m.target().dim() }
    }

    pub fn equal(&self) -> bool {
        self.dim_a == self.dim_b
    }

    pub fn le(&self) -> bool {
        self.dim_a <= self.dim_b
    }
}

/// Result of reducing a channel along the support of a pure state.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub m_bar: Channel,
    pub w_bar: ResourceState,
    pub split: OmegaSplit,
    /// `τ_ij (q^T ⊗ 1)` rescaled to satisfy the trace-preservation isometry condition.
    pub dilation: Dilation,
    /// The scalar used for that rescaling.
    pub dilation_scale: f64,
}

/// Restrict `M` to the support of `ω` on `H1` and `W` to the reduced pair.
pub fn reduce_by_omega(m: &Channel, w: &ResourceState) -> Result<Reduction, SchemeError> {
    let omega = w.omega().ok_or_else(|| SchemeError::Shape("reduction needs a pure state".into()))?;
    if m.h() != w.h1() {
        return Err(SchemeError::Shape(format!("M has auxiliary dimension {}, W has h1 = {}", m.h(), w.h1())));
    }
    let split = split_omega(omega)?;
    let r = split.rank;
    let (sm, tm) = (m.source().num_factors(), m.target().num_factors());
    let d = minimal_dilation(m)?;
    let emb = split.q.transpose();
    let mut kraus = vec![];
    let mut taus = vec![];
    for i in 0..sm {
        let lift = kron(&emb, &eye(m.source().factors()[i]));
        for j in 0..tm {
            kraus.push(dilation_kraus(&d, i, j).iter().map(|k| k * &lift).collect::<Vec<_>>());
            taus.push(d.tau_block(i, j) * &lift);
        }
    }
    let m_bar = Channel::from_kraus(m.source().clone(), m.target().clone(), r, &kraus)?;
    let raw = Dilation::from_blocks(m.source().clone(), m.target().clone(), r, d.env_dims().to_vec(), taus.clone())?;
    // Σ_j √(e_j/(r d_i)) τ̄†τ̄ = s0 · 1; rescale by s0^{-1/2}
    let s0 = {
        let din = r * m.source().factors()[0];
        let mut acc = zeros(din, din);
        for j in 0..tm {
            let t = raw.tau_block(0, j);
            acc += t.adjoint() * t * c((m.target().factors()[j] as f64 / din as f64).sqrt());
        }
        acc.trace().re / din as f64
    };
    let scale = s0.powf(-0.5);
    let taus: Vec<CMat> = taus.into_iter().map(|t| t * c(scale)).collect();
    let dilation = Dilation::from_blocks(m.source().clone(), m.target().clone(), r, d.env_dims().to_vec(), taus)?;
    let h12 = ((w.h1() * w.h2()) as f64).powf(0.25);
    let w_bar = ResourceState::pure_normalized(&split.omega_bar * c(h12 / (r as f64).sqrt()))?;
    Ok(Reduction { m_bar, w_bar, split, dilation, dilation_scale: scale })
}

/// Evidence that a left inverse exists.
#[derive(Clone, Debug)]
pub enum ReversibilityCertificate {
    Pure {
        /// `κ` on `E*` of the reduced minimal dilation.
        kappa: BlockMap,
        nu: BlockMap,
        /// Worst residual of the ν-solve.
        nu_residual: f64,
        /// Smallest eigenvalue of ν over all blocks.
        nu_min_eig: f64,
        /// Isometry residuals of the two composites; coisometry residuals alongside.
        isometry_residuals: [f64; 2],
        coisometry_residuals: [f64; 2],
        rank: usize,
    },
    Mixed {
        weights: Vec<f64>,
        /// `nu[s][t]` on `E*` for each pair of pure components.
        nu: Vec<Vec<BlockMap>>,
        residuals: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug)]
pub struct ReversibilityReport {
    pub verdict: bool,
    pub certificate: ReversibilityCertificate,
    pub dims: DimsVerdict,
    /// Left residual of the explicit recovery channel under the oracle.
    pub oracle_left_residual: f64,
    pub tol: f64,
}

impl ReversibilityReport {
    pub fn oracle_agrees(&self) -> bool {
        self.verdict == (self.oracle_left_residual < self.tol)
    }

    /// Worst residual of the certificate equations.
    pub fn solve_residual(&self) -> f64 {
        match &self.certificate {
            ReversibilityCertificate::Pure { nu_residual, .. } => *nu_residual,
            ReversibilityCertificate::Mixed { residuals, .. } => max_of(residuals.iter().flatten().copied()),
        }
    }
}

/// `(ω ⊗ 1_Y) ∘ bent(τ) ∘ (1_X ⊗ κ)`.
pub fn generalized_second(d: &Dilation, omega: &CMat, kappa: &BlockMap) -> BlockMap {
    let hch = Chain::single(OneMorphism::hilbert(d.h()));
    let om = BlockMap::new(hch.clone(), hch, vec![omega.clone()]).expect("ω on H");
    let idy = BlockMap::identity(&Chain::single(d.target().splitting()));
    let idx = BlockMap::identity(&Chain::single(d.source().splitting()));
    let left = BlockMap::tensor(&om, &idy).unwrap();
    let right = BlockMap::tensor(&idx, kappa).unwrap();
    BlockMap::compose(&left, &BlockMap::compose(&bent_tau(d), &right).unwrap()).unwrap()
}

fn pure_certificate(d: &Dilation, omega: &CMat, rank: usize) -> (ReversibilityCertificate, bool, f64) {
    let g = gen_ops(d, omega);
    let (nu, res) = solve_nu(d, &g, &g);
    let lmax = max_of(nu.blocks().iter().map(op_norm));
    let min_eig = nu.blocks().iter().filter(|b| b.nrows() > 0).map(crate::linalg::min_eig).fold(f64::INFINITY, f64::min);
    let (sf, tf) = (d.source().factors().to_vec(), d.target().factors().to_vec());
    let r4 = (rank as f64).powf(0.25);
    let kappa = nu
        .map_blocks(|s, _, b| {
            let (i, j) = (s[0], s[1]);
            pinv_sqrt(b, RANK_CUTOFF * lmax) * c(r4 * (tf[j] as f64 / sf[i] as f64).powf(0.25))
        })
        .unwrap();
    let first = first_composite(d);
    let second = generalized_second(d, omega, &kappa);
    let iso = [first.isometry_residual(), second.isometry_residual()];
    let co = [first.coisometry_residual(), second.coisometry_residual()];
    let invertible = min_eig > RANK_CUTOFF * lmax;
    let ok = invertible && res.is_finite();
    (
        ReversibilityCertificate::Pure {
            kappa,
            nu,
            nu_residual: res,
            nu_min_eig: if min_eig.is_finite() { min_eig } else { 0.0 },
            isometry_residuals: iso,
            coisometry_residuals: co,
            rank,
        },
        ok,
        max_of([res, iso[0], iso[1]]),
    )
}

/// Decide whether `M` has a left inverse with the help of `W`.
pub fn is_entanglement_reversible(m: &Channel, w: &ResourceState, tol: f64) -> Result<ReversibilityReport, SchemeError> {
    let m = m.to_convention(TraceConvention::Matrix);
    if m.h() != w.h1() {
        return Err(SchemeError::Shape(format!("M has auxiliary dimension {}, W has h1 = {}", m.h(), w.h1())));
    }
    let dims = DimsVerdict::of(&m);
    let (certificate, verdict) = match w.omega() {
        Some(_) => {
            let red = reduce_by_omega(&m, w)?;
            let d = minimal_dilation(&red.m_bar)?;
            let (cert, ok, worst) = pure_certificate(&d, red.w_bar.omega().unwrap(), red.split.rank);
            (cert, ok && worst < tol && dims.le())
        }
        None => {
            let d = minimal_dilation(&m)?;
            let comps = w.components();
            let gs: Vec<_> = comps.iter().map(|(_, om)| gen_ops(&d, om)).collect();
            let mut nus = vec![];
            let mut res = vec![];
            for s in 0..comps.len() {
                let mut row_nu = vec![];
                let mut row_res = vec![];
                for t in 0..comps.len() {
                    let (nu, r) = solve_nu(&d, &gs[s], &gs[t]);
                    row_nu.push(nu);
                    row_res.push(r);
                }
                nus.push(row_nu);
                res.push(row_res);
            }
            let worst = max_of(res.iter().flatten().copied());
            (
                ReversibilityCertificate::Mixed {
                    weights: comps.iter().map(|(p, _)| *p).collect(),
                    nu: nus,
                    residuals: res,
                },
                worst < tol && dims.le(),
            )
        }
    };
    let candidate = recovery_channel(&m, w)?;
    let oracle_left_residual = left_residual(&m, &candidate, w)?;
    Ok(ReversibilityReport { verdict, certificate, dims, oracle_left_residual, tol })
}

/// Default anchor state used when extending a reduced inverse: maximally mixed on `A`.
fn maximally_mixed(a: &MultimatrixAlgebra) -> Vec<CMat> {
    let total = a.total_rep_dim() as f64;
    a.factors().iter().map(|&d| eye(d) / c(total)).collect()
}

/// Recovery channel `B ⊗ B(H2) → A` built from the Knill–Laflamme structure of
/// the operators `G` of all pure components of `W`.
///
/// When a left inverse exists this is one; otherwise it is a valid channel
/// (the range of the `G` is projected and re-normalized) used as the
/// candidate that the oracle refutes.
pub fn recovery_channel(m: &Channel, w: &ResourceState) -> Result<Channel, SchemeError> {
    let m = m.to_convention(TraceConvention::Matrix);
    let d = minimal_dilation(&m)?;
    let (a, b) = (m.source().clone(), m.target().clone());
    let (ma, nb) = (a.num_factors(), b.num_factors());
    let h2 = w.h2();
    let comps = w.components();
    let gs: Vec<_> = comps.iter().map(|(_, om)| gen_ops(&d, om)).collect();
    let anchor = maximally_mixed(&a);
    let mut choi: Vec<CMat> = vec![];
    let mut blocks: Vec<Vec<CMat>> = vec![vec![]; nb * ma];
    for j in 0..nb {
        let dim = h2 * b.factors()[j];
        let mut fprimes: Vec<(usize, CMat)> = vec![];
        for i in 0..ma {
            let di = a.factors()[i];
            let fs: Vec<CMat> = comps
                .iter()
                .zip(&gs)
                .flat_map(|((p, _), g)| g[i][j].iter().map(move |x| x * c(p.sqrt())))
                .collect();
            if fs.is_empty() {
                continue;
            }
            let gram = CMat::from_fn(fs.len(), fs.len(), |x, y| (fs[x].adjoint() * &fs[y]).trace() / c(di as f64));
            let (vals, vecs) = eigh(&gram);
            let lmax = vals.last().copied().unwrap_or(0.0);
            for (mu, &v) in vals.iter().enumerate() {
                if v > RANK_CUTOFF * lmax && v > 0.0 {
                    let mut f = zeros(dim, di);
                    for (al, fa) in fs.iter().enumerate() {
                        f += fa * vecs[(al, mu)];
                    }
                    fprimes.push((i, f / c(v.sqrt())));
                }
            }
        }
        let mut q = zeros(dim, dim);
        for (_, f) in &fprimes {
            q += f * f.adjoint();
        }
        let qh = pinv_sqrt(&q, 1e-12);
        let support = &qh * &q * &qh;
        for (i, f) in &fprimes {
            blocks[j * ma + *i].push(f.adjoint() * &qh);
        }
        let pc = eye(dim) - support;
        for i in 0..ma {
            let mut cb = zeros(dim * a.factors()[i], dim * a.factors()[i]);
            for k in &blocks[j * ma + i] {
                let v = kraus_to_vec(k);
                cb += &v * v.adjoint();
            }
            cb += kron(&pc.transpose(), &anchor[i]);
            choi.push(cb);
        }
    }
    Ok(Channel::from_choi(b, a, h2, TraceConvention::Matrix, choi)?)
}

/// The unique left inverse for a pure `W` when `dim(A) = dim(B)`.
///
/// Degenerate `ω` is handled by reducing, inverting the reduced problem and
/// extending with [`extend_left_inverse`] (maximally mixed anchor).
pub fn entanglement_left_inverse(
    m: &Channel,
    w: &ResourceState,
    cert: &ReversibilityReport,
) -> Result<Channel, SchemeError> {
    if !cert.verdict {
        return Err(SchemeError::InvalidCertificate("the certificate does not certify reversibility".into()));
    }
    if !cert.dims.equal() {
        return Err(SchemeError::DimensionMismatch { dim_a: cert.dims.dim_a, dim_b: cert.dims.dim_b });
    }
    let m = m.to_convention(TraceConvention::Matrix);
    let red = reduce_by_omega(&m, w)?;
    let d = minimal_dilation(&red.m_bar)?;
    let kappa = match &cert.certificate {
        ReversibilityCertificate::Pure { kappa, .. } => kappa,
        ReversibilityCertificate::Mixed { .. } => {
            return Err(SchemeError::InvalidCertificate("a pure-state certificate is required".into()))
        }
    };
    if kappa.source() != &Chain::single(d.environment().dual()) {
        return Err(SchemeError::InvalidCertificate("κ does not live on the environment of M".into()));
    }
    let second = generalized_second(&d, red.w_bar.omega().unwrap(), kappa);
    let n_bar = channel_from_second(&second, &d);
    if red.split.rank == w.h2() && red.split.iota.nrows() == red.split.rank {
        return extend_left_inverse(&n_bar, &red.split.iota, w.h2(), None);
    }
    extend_left_inverse(&n_bar, &red.split.iota, w.h2(), None)
}

/// `N(ρ ⊗ σ) = N̄(ρ ⊗ (ι†σι + Tr((1 − ιι†)σ) · anchor))`.
///
/// The anchor defaults to the maximally mixed state on `C^r`.
pub fn extend_left_inverse(
    n_bar: &Channel,
    iota: &CMat,
    target_h2: usize,
    anchor: Option<&CMat>,
) -> Result<Channel, SchemeError> {
    let r = iota.ncols();
    if iota.nrows() != target_h2 || n_bar.h() != r {
        return Err(SchemeError::Shape(format!(
            "ι is {}×{}, expected {}×{}",
            iota.nrows(),
            r,
            target_h2,
            n_bar.h()
        )));
    }
    let res = isometry_residual(iota);
    if res > 1e-9 {
        return Err(SchemeError::NotIsometry(res));
    }
    let default_anchor = eye(r) / c(r as f64);
    let anchor = anchor.unwrap_or(&default_anchor);
    if anchor.nrows() != r || anchor.ncols() != r {
        return Err(SchemeError::Shape("anchor must be a state on C^r".into()));
    }
    let comp = eye(target_h2) - iota * iota.adjoint();
    let mut lam = zeros(target_h2 * r, target_h2 * r);
    for a in 0..target_h2 {
        for b in 0..target_h2 {
            let img = iota.adjoint() * unit(target_h2, a, b) * iota + anchor * comp[(b, a)];
            let mut blk = lam.view_mut((a * r, b * r), (r, r));
            blk += img;
        }
    }
    let nb = n_bar.to_convention(TraceConvention::Matrix);
    let (src, tgt) = (nb.source().clone(), nb.target().clone());
    let (n, m) = (src.num_factors(), tgt.num_factors());
    let mut choi = vec![];
    for j in 0..n {
        let e = src.factors()[j];
        let din = target_h2 * e;
        let v = vec_row(&eye(din));
        let omega = &v * v.adjoint();
        let step = apply_choi_on_factor(&lam, target_h2, r, &omega, &[din, target_h2, e], 1);
        for i in 0..m {
            choi.push(apply_choi_on_factor(nb.choi_block(j, i), r * e, tgt.factors()[i], &step, &[din, r * e], 1));
        }
    }
    Ok(Channel::from_choi(src, tgt, target_h2, TraceConvention::Matrix, choi)?)
}

// ---------------------------------------------------------------------------
// Intertwiners

#[derive(Clone, Debug)]
pub struct IntertwinerReport {
    pub verdict: bool,
    pub residual: f64,
    /// `u : E1 → E2` solving `τ2 (f ⊗ 1) = (1 ⊗ u) τ1` in the least-squares sense.
    pub u: BlockMap,
}

/// Test `τ2 ∘ (f ⊗ 1_X) = (1_Y ⊗ u) ∘ τ1` for some `u`, with `f : H1 → H2`.
pub fn intertwiner(f: &CMat, d1: &Dilation, d2: &Dilation, tol: f64) -> Result<IntertwinerReport, SchemeError> {
    if d1.source() != d2.source() || d1.target() != d2.target() {
        return Err(SchemeError::Shape("dilations are between different algebras".into()));
    }
    if f.ncols() != d1.h() || f.nrows() != d2.h() {
        return Err(SchemeError::Shape(format!(
            "f is {}×{}, expected {}×{}",
            f.nrows(),
            f.ncols(),
            d2.h(),
            d1.h()
        )));
    }
    let regroup = |t: &CMat, e: usize, r: usize| -> CMat {
        let din = t.ncols();
        CMat::from_fn(r, e * din, |k, ya| t[((ya / din) * r + k, ya % din)])
    };
    let mut res: f64 = 0.0;
    let (e1, e2) = (Chain::single(d1.environment()), Chain::single(d2.environment()));
    let u = BlockMap::from_fn(e1, e2, |s, _| {
        let (j, i) = (s[0], s[1]);
        let e = d1.target().factors()[j];
        let (r1, r2) = (d1.env_dims()[j][i], d2.env_dims()[j][i]);
        let lhs = d2.tau_block(i, j) * kron(f, &eye(d1.source().factors()[i]));
        let t1 = d1.tau_block(i, j);
        let u = regroup(&lhs, e, r2) * pinv(&regroup(t1, e, r1), 1e-12);
        res = res.max(op_norm(&(kron(&eye(e), &u) * t1 - lhs)));
        u
    })
    .expect("environment chains");
    Ok(IntertwinerReport { verdict: res < tol, residual: res, u })
}

pub fn is_intertwiner(
    f: &CMat,
    q1: &QuantumBijection,
    q2: &QuantumBijection,
    tol: f64,
) -> Result<IntertwinerReport, SchemeError> {
    intertwiner(f, &q1.dilation, &q2.dilation, tol)
}

// ---------------------------------------------------------------------------
// Invertibility

#[derive(Clone, Debug)]
pub struct InvertibilityReport {
    pub verdict: bool,
    pub reversibility: ReversibilityReport,
    /// Per pure component (one for a pure `W`): biunitarity of the reduced channel.
    pub biunitarity: Vec<Option<BiunitarityReport>>,
    /// Per pure component: the intertwiner test for `ω̄†ω̄`.
    pub intertwiner: Vec<Option<IntertwinerReport>>,
    /// The constructed inverse (or best candidate) and its oracle residuals.
    pub inverse: Channel,
    pub oracle: PairResiduals,
    pub tol: f64,
}

impl InvertibilityReport {
    pub fn oracle_agrees(&self) -> bool {
        self.verdict == self.oracle.passes(self.tol)
    }
}

fn pure_invertibility_parts(
    m: &Channel,
    w: &ResourceState,
    tol: f64,
) -> Result<(Option<BiunitarityReport>, Option<IntertwinerReport>, bool), SchemeError> {
    let red = reduce_by_omega(m, w)?;
    let d = minimal_dilation(&red.m_bar)?;
    let bu = biunitarity(&d, tol)?;
    let ob = red.w_bar.omega().unwrap();
    let f = ob.adjoint() * ob;
    let it = intertwiner(&f, &d, &d, tol)?;
    let ok = bu.verdict && it.verdict;
    Ok((Some(bu), Some(it), ok))
}

/// Decide whether `M` has a two-sided inverse with the help of `W`.
pub fn is_entanglement_invertible(
    m: &Channel,
    w: &ResourceState,
    tol: f64,
) -> Result<InvertibilityReport, SchemeError> {
    let m = m.to_convention(TraceConvention::Matrix);
    let rev = is_entanglement_reversible(&m, w, tol)?;
    let (bus, its, verdict) = match w.omega() {
        Some(_) => {
            let (b, i, ok) = pure_invertibility_parts(&m, w, tol)?;
            (vec![b], vec![i], ok)
        }
        None => {
            let mut bus = vec![];
            let mut its = vec![];
            let mut ok = rev.verdict;
            for (_, om) in w.components() {
                let wc = ResourceState::pure_normalized(om)?;
                let (b, i, o) = pure_invertibility_parts(&m, &wc, tol)?;
                bus.push(b);
                its.push(i);
                ok &= o;
            }
            (bus, its, ok)
        }
    };
    let inverse = if rev.verdict && rev.dims.equal() && w.is_pure() {
        entanglement_left_inverse(&m, w, &rev)?
    } else {
        recovery_channel(&m, w)?
    };
    let oracle = check_entanglement_pair(&m, &inverse, w)?;
    Ok(InvertibilityReport { verdict, reversibility: rev, biunitarity: bus, intertwiner: its, inverse, oracle, tol })
}

// ---------------------------------------------------------------------------
// Constructions

/// `M1 ⊕ M2` with auxiliary `H1 ⊕ H2`, acting block-diagonally.
pub fn direct_sum_channels(m1: &Channel, m2: &Channel) -> Result<Channel, SchemeError> {
    if m1.source() != m2.source() || m1.target() != m2.target() {
        return Err(SchemeError::Shape("direct sums need equal source and target algebras".into()));
    }
    let (m1, m2) = (m1.to_convention(TraceConvention::Matrix), m2.to_convention(TraceConvention::Matrix));
    let (h1, h2) = (m1.h(), m2.h());
    let h = h1 + h2;
    let (a, b) = (m1.source().clone(), m1.target().clone());
    let mut choi = vec![];
    for i in 0..a.num_factors() {
        let di = a.factors()[i];
        for j in 0..b.num_factors() {
            let e = b.factors()[j];
            let mut cb = zeros(h * di * e, h * di * e);
            for (ch, off, hh) in [(&m1, 0, h1), (&m2, h1, h2)] {
                let src = ch.choi_block(i, j);
                let blk = hh * di * e;
                for r in 0..blk {
                    for s in 0..blk {
                        cb[(off * di * e + r, off * di * e + s)] = src[(r, s)];
                    }
                }
            }
            choi.push(cb);
        }
    }
    Ok(Channel::from_choi(a, b, h, TraceConvention::Matrix, choi)?)
}

pub fn direct_sum_qbij(q1: &QuantumBijection, q2: &QuantumBijection, tol: f64) -> Result<QuantumBijection, SchemeError> {
    QuantumBijection::new(&direct_sum_channels(&q1.channel, &q2.channel)?, tol)
}

/// `q2 ∘ q1` with auxiliary `H2 ⊗ H1`.
pub fn compose_qbij(q2: &QuantumBijection, q1: &QuantumBijection, tol: f64) -> Result<QuantumBijection, SchemeError> {
    QuantumBijection::new(&compose_channels(&q2.channel, &q1.channel)?, tol)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm_all(xs: &[usize]) -> usize {
    xs.iter().fold(1, |acc, &x| acc / gcd(acc, x) * x)
}

/// Repeated direct sum of a channel with itself.
fn direct_power(ch: &Channel, copies: usize) -> Result<Channel, SchemeError> {
    let mut acc = ch.clone();
    for _ in 1..copies {
        acc = direct_sum_channels(&acc, ch)?;
    }
    Ok(acc)
}

/// `A ⊗ B(C^μ) → [dim A]`: measure the factor, then teleport with `μ/d_i` copies.
fn measure_and_teleport(a: &MultimatrixAlgebra) -> Result<Channel, SchemeError> {
    use crate::ueb::{teleportation_channel, weyl_basis};
    let mu = lcm_all(a.factors());
    let total = a.dim();
    let target = MultimatrixAlgebra::classical(total);
    let mut choi = vec![];
    let mut off = 0;
    for &d in a.factors() {
        let tel = teleportation_channel(&weyl_basis(d)).map_err(|e| SchemeError::Shape(e.to_string()))?;
        let t = direct_power(&tel, mu / d)?;
        for j in 0..total {
            if j >= off && j < off + d * d {
                choi.push(t.choi_block(0, j - off).clone());
            } else {
                choi.push(zeros(mu * d, mu * d));
            }
        }
        off += d * d;
    }
    Ok(Channel::from_choi(a.clone(), target, mu, TraceConvention::Matrix, choi)?)
}

/// `[dim B] ⊗ B(C^μ) → B`: dense coding with `μ/e_j` copies on outcome segment `j`.
fn dense_decode(b: &MultimatrixAlgebra) -> Result<Channel, SchemeError> {
    use crate::ueb::{dense_coding_channel, weyl_basis};
    let mu = lcm_all(b.factors());
    let total = b.dim();
    let source = MultimatrixAlgebra::classical(total);
    let n = b.num_factors();
    let mut choi = vec![zeros(0, 0); total * n];
    let mut off = 0;
    for (j, &e) in b.factors().iter().enumerate() {
        let dc = dense_coding_channel(&weyl_basis(e)).map_err(|x| SchemeError::Shape(x.to_string()))?;
        let t = direct_power(&dc, mu / e)?;
        for l in 0..total {
            for jj in 0..n {
                let ej = b.factors()[jj];
                if jj == j && l >= off && l < off + e * e {
                    choi[l * n + jj] = t.choi_block(l - off, 0).clone();
                } else if jj == j || choi[l * n + jj].nrows() == 0 {
                    choi[l * n + jj] = zeros(mu * ej, mu * ej);
                }
            }
        }
        off += e * e;
    }
    Ok(Channel::from_choi(source, b.clone(), mu, TraceConvention::Matrix, choi)?)
}

/// A quantum bijection `A → B` through the classical algebra `[dim A]`.
pub fn construct_qbij(a: &MultimatrixAlgebra, b: &MultimatrixAlgebra, tol: f64) -> Result<QuantumBijection, SchemeError> {
    if a.dim() != b.dim() {
        return Err(SchemeError::DimensionMismatch { dim_a: a.dim(), dim_b: b.dim() });
    }
    let first = measure_and_teleport(a)?;
    let second = dense_decode(b)?;
    QuantumBijection::new(&compose_channels(&second, &first)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ueb::{dense_coding_channel, teleportation_channel, weyl_basis};

    #[test]
    fn identity_is_qbij() {
        let a = MultimatrixAlgebra::new(vec![1, 2]).unwrap();
        let q = QuantumBijection::new(&Channel::identity(&a), VERDICT_TOL).unwrap();
        assert!(q.report().verdict);
        let inv = entanglement_inverse_maxent(&q);
        assert!(inv.distance(&Channel::identity(&a).with_explicit_aux()).unwrap() < 1e-9);
    }

    #[test]
    fn pauli_teleportation_biunitary() {
        let m = teleportation_channel(&weyl_basis(2)).unwrap();
        let d = minimal_dilation(&m).unwrap();
        let rep = biunitarity(&d, VERDICT_TOL).unwrap();
        assert!(rep.verdict, "{rep:?}");
        assert!(rep.worst() < 1e-10);
        let eqs = check_qbij_equations(&d).unwrap();
        assert!(eqs.all_pass(1e-9), "{eqs:?}");
    }

    #[test]
    fn pauli_inverse_is_dense_coding() {
        let u = weyl_basis(2);
        let q = QuantumBijection::new(&teleportation_channel(&u).unwrap(), VERDICT_TOL).unwrap();
        let inv = entanglement_inverse_maxent(&q);
        let dc = dense_coding_channel(&u).unwrap();
        assert!(inv.distance(&dc).unwrap() < 1e-9);
        let w = ResourceState::max_entangled(2);
        let r = check_entanglement_pair(q.channel(), &inv, &w).unwrap();
        assert!(r.passes(1e-9), "{r:?}");
    }

    #[test]
    fn product_state_breaks_teleportation() {
        let u = weyl_basis(2);
        let m = teleportation_channel(&u).unwrap();
        let n = dense_coding_channel(&u).unwrap();
        let mut om = zeros(2, 2);
        om[(0, 0)] = c(0.5f64.sqrt());
        let w = ResourceState::pure(om, 1e-12).unwrap();
        assert!(check_entanglement_pair(&m, &n, &w).unwrap().left > 0.1);
    }

    #[test]
    fn construct_small() {
        let a = MultimatrixAlgebra::new(vec![1, 2]).unwrap();
        let b = MultimatrixAlgebra::classical(5);
        let q = construct_qbij(&a, &b, VERDICT_TOL).unwrap();
        assert_eq!(q.h(), 2);
        assert!(construct_qbij(&a, &MultimatrixAlgebra::classical(4), VERDICT_TOL).is_err());
    }
}
