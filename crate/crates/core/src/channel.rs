//! Completely positive maps `A ⊗ B(H) → B` between multimatrix algebras.
//!
//! # Representation
//!
//! A [`Channel`] stores one Choi matrix per factor pair `(i, j)`. Block
//! `(i, j)` describes the map `B(H ⊗ X_i) → B(Y_j)` through
//! `C = Σ_ab |a⟩⟨b| ⊗ Φ(|a⟩⟨b|)` with the input factor first, and the input
//! space ordered auxiliary first. An auxiliary dimension of 0 means no
//! auxiliary input and behaves like `H = C`.
//!
//! The trace convention records how the stored blocks are normalized.
//! Matrix-convention blocks are ordinary trace-preserving maps; the special
//! convention preserves the weighted trace `Σ d_i Tr`, and the two forms of
//! one channel differ by the factor `h·d_i/e_j` on block `(i, j)`. Every
//! operational method (`apply`, superoperators, composition) acts with the
//! matrix normalization.
//!
//! # Dilations
//!
//! [`minimal_dilation`] writes the special form of each block as
//! `√(h d_i / e_j) · Tr_E(τ_ij · τ_ij†)` with `τ_ij : H ⊗ X_i → Y_j ⊗ E_ji`.
//! With this scaling the channel is trace preserving exactly when
//! `Σ_j √(e_j/(h d_i)) τ_ij† τ_ij = 1` for every `i`.
//!
//! ```
//! use entverify::algebra::MultimatrixAlgebra;
//! use entverify::channel::{minimal_dilation, dilation_to_channel, Channel};
//!
//! let c = Channel::identity(&MultimatrixAlgebra::new(vec![1, 2]).unwrap());
//! let d = minimal_dilation(&c).unwrap();
//! assert_eq!(d.env_dims(), &[vec![1, 0], vec![0, 1]]);
//! let back = dilation_to_channel(&d);
//! assert!(back.distance(&c).unwrap() < 1e-10);
//! ```

use crate::algebra::{AlgebraElement, MultimatrixAlgebra, RANK_CUTOFF};
use crate::diagram::{BlockMap, Chain, OneMorphism};
use crate::linalg::{
    apply_choi_first, c, eigh, eye, fix_phase, kron, max_of, op_norm, partial_trace, permute_operator, pinv, psd_sqrt,
    unit, zeros, CMat, C64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("expected {expected} Choi blocks, got {got}")]
    BlockCount { expected: usize, got: usize },
    #[error("Choi block ({i}, {j}) has shape {got:?}, expected {expected}×{expected}")]
    BlockShape { i: usize, j: usize, got: (usize, usize), expected: usize },
    #[error("Choi block ({i}, {j}) is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPositive { i: usize, j: usize, min_eig: f64 },
    #[error("element does not match the source algebra: {0}")]
    ElementShape(String),
    #[error("auxiliary input has shape {got:?}, expected {h}×{h}")]
    AuxShape { got: (usize, usize), h: usize },
    #[error("channels are not composable: {0}")]
    NotComposable(String),
    #[error("dilation is malformed: {0}")]
    BadDilation(String),
    #[error("dilations describe different channels (Choi distance {0:e})")]
    DifferentChannels(f64),
    #[error("no environment map relates the dilations (residual {0:e})")]
    NoRelation(f64),
}

/// Which trace the stored Choi blocks are normalized against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceConvention {
    Matrix,
    Special,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    source: MultimatrixAlgebra,
    target: MultimatrixAlgebra,
    aux_dim: usize,
    convention: TraceConvention,
    choi: Vec<CMat>,
}

/// Apply the map with Choi matrix `choi` (`din → dout`) to factor `k` of an
/// operator on `⊗ dims`.
pub fn apply_choi_on_factor(choi: &CMat, din: usize, dout: usize, z: &CMat, dims: &[usize], k: usize) -> CMat {
    let n = dims.len();
    let mut perm = vec![k];
    perm.extend((0..n).filter(|&x| x != k));
    let moved = if k == 0 { z.clone() } else { permute_operator(z, dims, &perm) };
    let out = apply_choi_first(choi, din, dout, &moved);
    if k == 0 {
        return out;
    }
    let mut new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    new_dims[0] = dout;
    // inverse permutation back to the original order
    let mut inv = vec![0; n];
    for (pos, &p) in perm.iter().enumerate() {
        inv[p] = pos;
    }
    permute_operator(&out, &new_dims, &inv)
}

impl Channel {
    /// Build from Choi blocks listed row-major over `(i, j)`; shapes are
    /// validated, positivity is not (see [`Channel::from_choi_checked`]).
    pub fn from_choi(
        source: MultimatrixAlgebra,
        target: MultimatrixAlgebra,
        aux_dim: usize,
        convention: TraceConvention,
        choi: Vec<CMat>,
    ) -> Result<Self, ChannelError> {
        let (m, n) = (source.num_factors(), target.num_factors());
        if choi.len() != m * n {
            return Err(ChannelError::BlockCount { expected: m * n, got: choi.len() });
        }
        let h = aux_dim.max(1);
        for i in 0..m {
            for j in 0..n {
                let b = &choi[i * n + j];
                let expected = h * source.factors()[i] * target.factors()[j];
                if b.nrows() != expected || b.ncols() != expected {
                    return Err(ChannelError::BlockShape { i, j, got: (b.nrows(), b.ncols()), expected });
                }
            }
        }
        Ok(Channel { source, target, aux_dim, convention, choi })
    }

    /// Like [`Channel::from_choi`], additionally rejecting non-positive blocks.
    pub fn from_choi_checked(
        source: MultimatrixAlgebra,
        target: MultimatrixAlgebra,
        aux_dim: usize,
        convention: TraceConvention,
        choi: Vec<CMat>,
    ) -> Result<Self, ChannelError> {
        let ch = Channel::from_choi(source, target, aux_dim, convention, choi)?;
        let rep = is_cp(&ch);
        if !rep.verdict {
            let (i, j, min_eig) = rep.worst_block();
            return Err(ChannelError::NotPositive { i, j, min_eig });
        }
        Ok(ch)
    }

    /// Build a matrix-convention channel from Kraus operators `K : H ⊗ X_i → Y_j`,
    /// one list per block, row-major over `(i, j)`.
    pub fn from_kraus(
        source: MultimatrixAlgebra,
        target: MultimatrixAlgebra,
        aux_dim: usize,
        kraus: &[Vec<CMat>],
    ) -> Result<Self, ChannelError> {
        let (m, n) = (source.num_factors(), target.num_factors());
        if kraus.len() != m * n {
            return Err(ChannelError::BlockCount { expected: m * n, got: kraus.len() });
        }
        let h = aux_dim.max(1);
        let mut choi = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                let (din, dout) = (h * source.factors()[i], target.factors()[j]);
                let mut cb = zeros(din * dout, din * dout);
                for k in &kraus[i * n + j] {
                    if k.nrows() != dout || k.ncols() != din {
                        return Err(ChannelError::BlockShape { i, j, got: (k.nrows(), k.ncols()), expected: din * dout });
                    }
                    let v = kraus_to_vec(k);
                    cb += &v * v.adjoint();
                }
                choi.push(cb);
            }
        }
        Channel::from_choi(source, target, aux_dim, TraceConvention::Matrix, choi)
    }

    /// The identity channel on `A` (no auxiliary input).
    pub fn identity(alg: &MultimatrixAlgebra) -> Self {
        let m = alg.num_factors();
        let kraus: Vec<Vec<CMat>> = (0..m * m)
            .map(|k| if k / m == k % m { vec![eye(alg.factors()[k / m])] } else { vec![] })
            .collect();
        Channel::from_kraus(alg.clone(), alg.clone(), 0, &kraus).expect("identity shapes")
    }

    pub fn source(&self) -> &MultimatrixAlgebra {
        &self.source
    }

    pub fn target(&self) -> &MultimatrixAlgebra {
        &self.target
    }

    /// Declared auxiliary dimension (0 = none).
    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    /// Auxiliary dimension with "none" read as 1.
    pub fn h(&self) -> usize {
        self.aux_dim.max(1)
    }

    pub fn convention(&self) -> TraceConvention {
        self.convention
    }

    pub fn in_dim(&self, i: usize) -> usize {
        self.h() * self.source.factors()[i]
    }

    pub fn out_dim(&self, j: usize) -> usize {
        self.target.factors()[j]
    }

    /// Raw stored Choi block `(i, j)`.
    pub fn choi_block(&self, i: usize, j: usize) -> &CMat {
        &self.choi[i * self.target.num_factors() + j]
    }

    pub fn choi_blocks(&self) -> &[CMat] {
        &self.choi
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        self.in_dim(i) as f64 / self.out_dim(j) as f64
    }

    /// Choi blocks rescaled to the requested convention.
    pub fn blocks_in(&self, conv: TraceConvention) -> Vec<CMat> {
        let n = self.target.num_factors();
        self.choi
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let w = self.weight(k / n, k % n);
                match (self.convention, conv) {
                    (TraceConvention::Matrix, TraceConvention::Special) => b * c(w),
                    (TraceConvention::Special, TraceConvention::Matrix) => b / c(w),
                    _ => b.clone(),
                }
            })
            .collect()
    }

    /// The same channel with blocks stored in another convention.
    pub fn to_convention(&self, conv: TraceConvention) -> Channel {
        Channel { choi: self.blocks_in(conv), convention: conv, ..self.clone() }
    }

    /// Reinterpret the stored blocks under another convention without rescaling.
    pub fn relabel_convention(&self, conv: TraceConvention) -> Channel {
        Channel { convention: conv, ..self.clone() }
    }

    /// Replace "no auxiliary input" by an explicit one-dimensional one.
    pub fn with_explicit_aux(&self) -> Channel {
        Channel { aux_dim: self.h(), ..self.clone() }
    }

    /// Largest operator-norm distance between matrix-form Choi blocks.
    pub fn distance(&self, other: &Channel) -> Result<f64, ChannelError> {
        if self.source != other.source || self.target != other.target || self.h() != other.h() {
            return Err(ChannelError::NotComposable("channels have different shapes".into()));
        }
        let a = self.blocks_in(TraceConvention::Matrix);
        let b = other.blocks_in(TraceConvention::Matrix);
        Ok(max_of(a.iter().zip(&b).map(|(x, y)| op_norm(&(x - y)))))
    }

    /// Action of block `(i, j)` (matrix normalization) on an operator of `H ⊗ X_i`.
    pub fn apply_block(&self, i: usize, j: usize, z: &CMat) -> CMat {
        let cb = self.blocks_in(TraceConvention::Matrix).swap_remove(i * self.target.num_factors() + j);
        apply_choi_first(&cb, self.in_dim(i), self.out_dim(j), z)
    }

    /// `M(x ⊗ aux)`; `aux` is required exactly when the auxiliary dimension is positive.
    pub fn apply(&self, x: &AlgebraElement, aux: Option<&CMat>) -> Result<AlgebraElement, ChannelError> {
        if x.blocks.len() != self.source.num_factors() {
            return Err(ChannelError::ElementShape(format!("{} blocks", x.blocks.len())));
        }
        let auxm = match (self.aux_dim, aux) {
            (0, None) => eye(1),
            (h, Some(a)) if h > 0 => {
                if a.nrows() != h || a.ncols() != h {
                    return Err(ChannelError::AuxShape { got: (a.nrows(), a.ncols()), h });
                }
                a.clone()
            }
            (h, _) => return Err(ChannelError::AuxShape { got: (0, 0), h }),
        };
        let blocks = self.blocks_in(TraceConvention::Matrix);
        let n = self.target.num_factors();
        let mut out = AlgebraElement::zero(&self.target);
        for (i, xi) in x.blocks.iter().enumerate() {
            if xi.nrows() != self.source.factors()[i] {
                return Err(ChannelError::ElementShape(format!("block {i}")));
            }
            let z = kron(&auxm, xi);
            for j in 0..n {
                out.blocks[j] += apply_choi_first(&blocks[i * n + j], self.in_dim(i), self.out_dim(j), &z);
            }
        }
        Ok(out)
    }

    /// Full superoperator `dim(B) × Σ_i (h d_i)²` on row-major vectorized blocks.
    pub fn as_superoperator(&self) -> CMat {
        let (m, n) = (self.source.num_factors(), self.target.num_factors());
        let blocks = self.blocks_in(TraceConvention::Matrix);
        let cols: usize = (0..m).map(|i| self.in_dim(i).pow(2)).sum();
        let mut s = zeros(self.target.dim(), cols);
        let mut col = 0;
        for i in 0..m {
            let din = self.in_dim(i);
            for a in 0..din {
                for b in 0..din {
                    let z = unit(din, a, b);
                    let mut row = 0;
                    for j in 0..n {
                        let e = self.out_dim(j);
                        let y = apply_choi_first(&blocks[i * n + j], din, e, &z);
                        for p in 0..e {
                            for q in 0..e {
                                s[(row + p * e + q, col)] = y[(p, q)];
                            }
                        }
                        row += e * e;
                    }
                    col += 1;
                }
            }
        }
        s
    }
}

/// Choi vector of a Kraus operator: `Σ_a |a⟩ ⊗ K|a⟩`.
pub fn kraus_to_vec(k: &CMat) -> CMat {
    let (dout, din) = (k.nrows(), k.ncols());
    CMat::from_fn(din * dout, 1, |r, _| k[(r % dout, r / dout)])
}

/// Inverse of [`kraus_to_vec`].
pub fn vec_to_kraus(v: &[C64], din: usize, dout: usize) -> CMat {
    CMat::from_fn(dout, din, |y, a| v[a * dout + y])
}

/// Kraus operators of a single Choi block (matrix normalization, rank cutoff
/// relative to `scale`).
pub fn choi_to_kraus(choi: &CMat, din: usize, dout: usize, cutoff: f64) -> Vec<CMat> {
    let (vals, vecs) = eigh(choi);
    let mut out = vec![];
    for k in (0..vals.len()).rev() {
        if vals[k] > cutoff && vals[k] > 0.0 {
            let mut v: Vec<C64> = vecs.column(k).iter().copied().collect();
            fix_phase(&mut v);
            out.push(vec_to_kraus(&v, din, dout) * c(vals[k].sqrt()));
        }
    }
    out
}

/// Report of [`is_cp`].
#[derive(Clone, Debug, PartialEq)]
pub struct CpReport {
    pub verdict: bool,
    /// Smallest eigenvalue of each stored block divided by its input dimension, row-major over `(i, j)`.
    pub min_eigenvalues: Vec<f64>,
    pub num_target_factors: usize,
}

impl CpReport {
    pub fn most_negative(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn worst_block(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::INFINITY);
        for (k, &v) in self.min_eigenvalues.iter().enumerate() {
            if v < best.2 {
                best = (k / self.num_target_factors, k % self.num_target_factors, v);
            }
        }
        best
    }
}

/// Non-positivity threshold relative to the largest Choi eigenvalue.
pub const CP_TOL: f64 = 1e-9;

/// Complete positivity via Choi positivity of every block.
pub fn is_cp(ch: &Channel) -> CpReport {
    let n = ch.target.num_factors();
    let spectra: Vec<Vec<f64>> = ch.choi.iter().map(|b| eigh(b).0).collect();
    let lmax = spectra.iter().flat_map(|s| s.last().copied()).fold(0.0, f64::max);
    let mut verdict = true;
    let mut mins = vec![];
    for (k, s) in spectra.iter().enumerate() {
        let lmin = s.first().copied().unwrap_or(0.0);
        if lmin < -CP_TOL * lmax.max(f64::MIN_POSITIVE) {
            verdict = false;
        }
        mins.push(lmin / ch.in_dim(k / n) as f64);
    }
    CpReport { verdict, min_eigenvalues: mins, num_target_factors: n }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TpReport {
    pub verdict: bool,
    pub convention: TraceConvention,
    /// Worst residual over source factors (normalized by `h d_i` in the special convention).
    pub residual: f64,
    pub per_factor: Vec<f64>,
    /// Isometry residual `‖Σ_j √(e_j/(h d_i)) τ_ij†τ_ij − 1‖` of the minimal
    /// dilation of the blocks read in `convention`; `None` when not CP.
    pub isometry_residual: Option<f64>,
}

/// Trace preservation of the stored blocks, read in the given convention.
pub fn is_trace_preserving(ch: &Channel, conv: TraceConvention, tol: f64) -> TpReport {
    let (m, n) = (ch.source.num_factors(), ch.target.num_factors());
    let mut per = vec![];
    for i in 0..m {
        let din = ch.in_dim(i);
        let mut acc = zeros(din, din);
        for j in 0..n {
            let e = ch.out_dim(j);
            let pt = partial_trace(ch.choi_block(i, j), &[din, e], &[1]);
            acc += match conv {
                TraceConvention::Matrix => pt,
                TraceConvention::Special => pt * c(e as f64 / din as f64),
            };
        }
        per.push(op_norm(&(acc - eye(din))));
    }
    let residual = max_of(per.iter().copied());
    let relabeled = ch.relabel_convention(conv);
    let isometry_residual = minimal_dilation(&relabeled).ok().map(|d| d.isometry_residual());
    TpReport { verdict: residual < tol, convention: conv, residual, per_factor: per, isometry_residual }
}

/// `g ∘ f` with auxiliaries tensored as `H_g ⊗ H_f`.
pub fn compose_channels(g: &Channel, f: &Channel) -> Result<Channel, ChannelError> {
    if f.target != g.source {
        return Err(ChannelError::NotComposable(format!(
            "target {:?} vs source {:?}",
            f.target.factors(),
            g.source.factors()
        )));
    }
    let (m, n, l) = (f.source.num_factors(), f.target.num_factors(), g.target.num_factors());
    let (hg, hf) = (g.h(), f.h());
    let aux = if g.aux_dim == 0 && f.aux_dim == 0 { 0 } else { hg * hf };
    let fb = f.blocks_in(TraceConvention::Matrix);
    let gb = g.blocks_in(TraceConvention::Matrix);
    let mut choi = Vec::with_capacity(m * l);
    for i in 0..m {
        let din = hg * f.in_dim(i);
        let omega = {
            let v = crate::linalg::vec_row(&eye(din));
            &v * v.adjoint()
        };
        for k in 0..l {
            let dout = g.out_dim(k);
            let mut acc = zeros(din * dout, din * dout);
            for j in 0..n {
                let mid = apply_choi_on_factor(&fb[i * n + j], f.in_dim(i), f.out_dim(j), &omega, &[din, hg, f.in_dim(i)], 2);
                acc += apply_choi_on_factor(&gb[j * l + k], g.in_dim(j), dout, &mid, &[din, hg * f.out_dim(j)], 1);
            }
            choi.push(acc);
        }
    }
    Channel::from_choi(f.source.clone(), g.target.clone(), aux, TraceConvention::Matrix, choi)
}

/// `f ⊗ g : (A1 ⊗ A2) ⊗ B(H_f ⊗ H_g) → B1 ⊗ B2`.
pub fn tensor_channels(f: &Channel, g: &Channel) -> Channel {
    let fb = f.blocks_in(TraceConvention::Matrix);
    let gb = g.blocks_in(TraceConvention::Matrix);
    let (m1, n1, m2, n2) =
        (f.source.num_factors(), f.target.num_factors(), g.source.num_factors(), g.target.num_factors());
    let aux = if f.aux_dim == 0 && g.aux_dim == 0 { 0 } else { f.h() * g.h() };
    let mut choi = vec![];
    for i1 in 0..m1 {
        for i2 in 0..m2 {
            for j1 in 0..n1 {
                for j2 in 0..n2 {
                    let big = kron(&fb[i1 * n1 + j1], &gb[i2 * n2 + j2]);
                    let dims =
                        [f.h(), f.source.factors()[i1], f.out_dim(j1), g.h(), g.source.factors()[i2], g.out_dim(j2)];
                    choi.push(permute_operator(&big, &dims, &[0, 3, 1, 4, 2, 5]));
                }
            }
        }
    }
    Channel::from_choi(f.source.tensor(&g.source), f.target.tensor(&g.target), aux, TraceConvention::Matrix, choi)
        .expect("tensor shapes")
}

/// A dilation `τ_ij : H ⊗ X_i → Y_j ⊗ E_ji` of the special form of a channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Dilation {
    source: MultimatrixAlgebra,
    target: MultimatrixAlgebra,
    aux_dim: usize,
    env_dims: Vec<Vec<usize>>,
    tau: BlockMap,
    minimal: bool,
    lambda: Option<BlockMap>,
}

fn dilation_chains(
    source: &MultimatrixAlgebra,
    target: &MultimatrixAlgebra,
    h: usize,
    env_dims: &[Vec<usize>],
) -> Result<(Chain, Chain), ChannelError> {
    let e = OneMorphism::new(env_dims.to_vec()).map_err(|x| ChannelError::BadDilation(x.to_string()))?;
    if e.left_index() != target.num_factors() || e.right_index() != source.num_factors() {
        return Err(ChannelError::BadDilation(format!(
            "environment is {}×{}, expected {}×{}",
            e.left_index(),
            e.right_index(),
            target.num_factors(),
            source.num_factors()
        )));
    }
    let s = Chain::new(vec![OneMorphism::hilbert(h), source.splitting()]).expect("H ⊗ X composes");
    let t = Chain::new(vec![target.splitting(), e]).map_err(|x| ChannelError::BadDilation(x.to_string()))?;
    Ok((s, t))
}

impl Dilation {
    /// Assemble from per-block matrices `τ_ij` (row-major over `(i, j)`), computing minimality.
    pub fn from_blocks(
        source: MultimatrixAlgebra,
        target: MultimatrixAlgebra,
        aux_dim: usize,
        env_dims: Vec<Vec<usize>>,
        taus: Vec<CMat>,
    ) -> Result<Dilation, ChannelError> {
        let h = aux_dim.max(1);
        let (s, t) = dilation_chains(&source, &target, h, &env_dims)?;
        let n = target.num_factors();
        let tau = BlockMap::from_fn(s, t, |s, t| taus[s[2] * n + t[1]].clone())
            .map_err(|e| ChannelError::BadDilation(e.to_string()))?;
        Dilation::from_tau(source, target, aux_dim, tau)
    }

    /// Wrap an existing box `τ : H ⊗ X → Y ⊗ E`.
    pub fn from_tau(
        source: MultimatrixAlgebra,
        target: MultimatrixAlgebra,
        aux_dim: usize,
        tau: BlockMap,
    ) -> Result<Dilation, ChannelError> {
        let e = tau.target().wires().get(1).ok_or_else(|| ChannelError::BadDilation("target chain must be Y ⊗ E".into()))?;
        let env_dims = e.dims().to_vec();
        let (s, t) = dilation_chains(&source, &target, aux_dim.max(1), &env_dims)?;
        if *tau.source() != s || *tau.target() != t {
            return Err(ChannelError::BadDilation("chains do not match H ⊗ X → Y ⊗ E".into()));
        }
        let mut d = Dilation { source, target, aux_dim, env_dims, tau, minimal: false, lambda: None };
        let gram = d.environment_gram();
        let lmax = max_of(gram.blocks().iter().map(op_norm));
        let minimal = gram
            .blocks()
            .iter()
            .all(|b| b.nrows() == 0 || crate::linalg::min_eig(b) > RANK_CUTOFF * lmax.max(f64::MIN_POSITIVE));
        d.minimal = minimal;
        if minimal {
            d.lambda = Some(gram.map_blocks(|_, _, b| psd_sqrt(b)).expect("same shapes"));
        }
        Ok(d)
    }

    pub fn source(&self) -> &MultimatrixAlgebra {
        &self.source
    }

    pub fn target(&self) -> &MultimatrixAlgebra {
        &self.target
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn h(&self) -> usize {
        self.aux_dim.max(1)
    }

    /// `env_dims[j][i] = dim E_ji`.
    pub fn env_dims(&self) -> &[Vec<usize>] {
        &self.env_dims
    }

    pub fn tau(&self) -> &BlockMap {
        &self.tau
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    /// Positive square root of the environment Gram element (present when minimal).
    pub fn lambda(&self) -> Option<&BlockMap> {
        self.lambda.as_ref()
    }

    /// The environment wire `E : [n] → [m]`.
    pub fn environment(&self) -> OneMorphism {
        OneMorphism::new(self.env_dims.clone()).expect("validated")
    }

    /// `τ_ij` as a `(e_j r_ji) × (h d_i)` matrix.
    pub fn tau_block(&self, i: usize, j: usize) -> &CMat {
        self.tau.block(&[0, 0, i], &[0, j, i]).expect("dilation key")
    }

    /// `τ̃τ̃†` on each `E_ji`: `G[k, k'] = Σ_{y,a} τ[(y,k),a] conj(τ[(y,k'),a])`.
    pub fn environment_gram(&self) -> BlockMap {
        let e = Chain::single(self.environment());
        BlockMap::from_fn(e.clone(), e, |s, _| {
            let (j, i) = (s[0], s[1]);
            let r = self.env_dims[j][i];
            let t = self.tau_block(i, j);
            let ej = self.target.factors()[j];
            let mut g = zeros(r, r);
            for y in 0..ej {
                let rows = t.rows(y * r, r);
                g += &rows * rows.adjoint();
            }
            g
        })
        .expect("environment chain")
    }

    /// `‖Σ_j √(e_j/(h d_i)) τ_ij†τ_ij − 1‖`, worst over `i`.
    pub fn isometry_residual(&self) -> f64 {
        let (m, n) = (self.source.num_factors(), self.target.num_factors());
        let h = self.h();
        max_of((0..m).map(|i| {
            let din = h * self.source.factors()[i];
            let mut acc = zeros(din, din);
            for j in 0..n {
                let t = self.tau_block(i, j);
                let w = (self.target.factors()[j] as f64 / din as f64).sqrt();
                acc += t.adjoint() * t * c(w);
            }
            op_norm(&(acc - eye(din)))
        }))
    }

    /// `(1_Y ⊗ V_ij) τ_ij` for maps `V_ij : E_ji → E'_ji` (row-major over `(i, j)`).
    pub fn with_environment_map(&self, maps: &[CMat]) -> Result<Dilation, ChannelError> {
        let (m, n) = (self.source.num_factors(), self.target.num_factors());
        if maps.len() != m * n {
            return Err(ChannelError::BlockCount { expected: m * n, got: maps.len() });
        }
        let mut new_env = vec![vec![0; m]; n];
        let mut taus = vec![];
        for i in 0..m {
            for j in 0..n {
                let v = &maps[i * n + j];
                if v.ncols() != self.env_dims[j][i] {
                    return Err(ChannelError::BadDilation(format!("map ({i}, {j}) has {} columns", v.ncols())));
                }
                new_env[j][i] = v.nrows();
                taus.push(kron(&eye(self.target.factors()[j]), v) * self.tau_block(i, j));
            }
        }
        Dilation::from_blocks(self.source.clone(), self.target.clone(), self.aux_dim, new_env, taus)
    }
}

/// Minimal dilation from the eigendecomposition of the special-form Choi blocks.
pub fn minimal_dilation(ch: &Channel) -> Result<Dilation, ChannelError> {
    let rep = is_cp(ch);
    if !rep.verdict {
        let (i, j, min_eig) = rep.worst_block();
        return Err(ChannelError::NotPositive { i, j, min_eig });
    }
    let (m, n) = (ch.source.num_factors(), ch.target.num_factors());
    let special = ch.blocks_in(TraceConvention::Special);
    let spectra: Vec<(Vec<f64>, CMat)> = special.iter().map(eigh).collect();
    let lmax = spectra.iter().flat_map(|(v, _)| v.last().copied()).fold(0.0, f64::max);
    let cutoff = RANK_CUTOFF * lmax;
    let mut env = vec![vec![0; m]; n];
    let mut taus = vec![];
    for i in 0..m {
        for j in 0..n {
            let (din, dout) = (ch.in_dim(i), ch.out_dim(j));
            let (vals, vecs) = &spectra[i * n + j];
            let scale = (dout as f64 / din as f64).powf(0.25);
            let mut ks = vec![];
            for k in (0..vals.len()).rev() {
                if vals[k] > cutoff && vals[k] > 0.0 {
                    let mut v: Vec<C64> = vecs.column(k).iter().copied().collect();
                    fix_phase(&mut v);
                    ks.push(vec_to_kraus(&v, din, dout) * c(scale * vals[k].sqrt()));
                }
            }
            let r = ks.len();
            env[j][i] = r;
            let mut t = zeros(dout * r, din);
            for (k, kk) in ks.iter().enumerate() {
                for y in 0..dout {
                    for a in 0..din {
                        t[(y * r + k, a)] = kk[(y, a)];
                    }
                }
            }
            taus.push(t);
        }
    }
    let d = Dilation::from_blocks(ch.source.clone(), ch.target.clone(), ch.aux_dim, env, taus)?;
    debug_assert!(d.minimal || d.env_dims.iter().flatten().all(|&x| x == 0));
    Ok(d)
}

/// The special-convention channel `√(h d_i/e_j) Tr_E(τ · τ†)` of a dilation.
pub fn dilation_to_channel(d: &Dilation) -> Channel {
    let (m, n) = (d.source.num_factors(), d.target.num_factors());
    let h = d.h();
    let mut choi = vec![];
    for i in 0..m {
        for j in 0..n {
            let din = h * d.source.factors()[i];
            let dout = d.target.factors()[j];
            let r = d.env_dims[j][i];
            let t = d.tau_block(i, j);
            let w = (din as f64 / dout as f64).sqrt();
            let mut cb = zeros(din * dout, din * dout);
            for k in 0..r {
                let kk = CMat::from_fn(dout, din, |y, a| t[(y * r + k, a)]);
                let v = kraus_to_vec(&kk);
                cb += &v * v.adjoint();
            }
            choi.push(cb * c(w));
        }
    }
    Channel::from_choi(d.source.clone(), d.target.clone(), d.aux_dim, TraceConvention::Special, choi)
        .expect("dilation shapes")
}

/// Report of [`dilations_related`].
#[derive(Clone, Debug)]
pub struct Relation {
    /// `α : E1 → E2` with `τ2 = (1 ⊗ α) τ1`.
    pub alpha: BlockMap,
    pub forward_residual: f64,
    pub backward_residual: f64,
    pub partial_isometry_residual: f64,
}

/// Solve `τ2 = (1 ⊗ α) τ1` blockwise and verify `τ1 = (1 ⊗ α†) τ2` and that α is a partial isometry.
pub fn dilations_related(d1: &Dilation, d2: &Dilation, tol: f64) -> Result<Relation, ChannelError> {
    if d1.source != d2.source || d1.target != d2.target || d1.h() != d2.h() {
        return Err(ChannelError::NotComposable("dilations have different shapes".into()));
    }
    let dist = dilation_to_channel(d1).distance(&dilation_to_channel(d2))?;
    if dist > tol {
        return Err(ChannelError::DifferentChannels(dist));
    }
    let (e1, e2) = (Chain::single(d1.environment()), Chain::single(d2.environment()));
    let regroup = |t: &CMat, e: usize, r: usize| -> CMat {
        // R[k, (y, a)] = τ[(y, k), a]
        let din = t.ncols();
        CMat::from_fn(r, e * din, |k, ya| t[((ya / din) * r + k, ya % din)])
    };
    let mut fwd: f64 = 0.0;
    let mut bwd: f64 = 0.0;
    let mut piso: f64 = 0.0;
    let alpha = BlockMap::from_fn(e1, e2, |s, _| {
        let (j, i) = (s[0], s[1]);
        let e = d1.target.factors()[j];
        let (r1, r2) = (d1.env_dims[j][i], d2.env_dims[j][i]);
        let t1 = d1.tau_block(i, j);
        let t2 = d2.tau_block(i, j);
        let (q1, q2) = (regroup(t1, e, r1), regroup(t2, e, r2));
        let a = &q2 * pinv(&q1, 1e-12);
        let id = eye(e);
        fwd = fwd.max(op_norm(&(kron(&id, &a) * t1 - t2)));
        bwd = bwd.max(op_norm(&(kron(&id, &a.adjoint()) * t2 - t1)));
        piso = piso.max(op_norm(&(&a * a.adjoint() * &a - &a)));
        a
    })
    .expect("environment chains");
    let worst = fwd.max(bwd).max(piso);
    if worst > tol {
        return Err(ChannelError::NoRelation(worst));
    }
    Ok(Relation { alpha, forward_residual: fwd, backward_residual: bwd, partial_isometry_residual: piso })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_channel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alg(f: &[usize]) -> MultimatrixAlgebra {
        MultimatrixAlgebra::new(f.to_vec()).unwrap()
    }

    #[test]
    fn identity_applies_trivially() {
        let a = alg(&[1, 2]);
        let id = Channel::identity(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = AlgebraElement::new(
            &a,
            vec![crate::linalg::random_gaussian(&mut rng, 1, 1), crate::linalg::random_gaussian(&mut rng, 2, 2)],
        )
        .unwrap();
        let y = id.apply(&x, None).unwrap();
        assert!(y.distance(&x) < 1e-14);
        assert!(is_cp(&id).verdict);
        assert!(is_trace_preserving(&id, TraceConvention::Matrix, 1e-9).verdict);
        assert!(is_trace_preserving(&id, TraceConvention::Special, 1e-9).verdict);
    }

    #[test]
    fn transpose_is_not_cp() {
        let a = alg(&[2]);
        // Choi of the transpose map is the swap operator.
        let swap = crate::linalg::permutation_matrix(&[2, 2], &[1, 0]);
        let t = Channel::from_choi(a.clone(), a, 0, TraceConvention::Matrix, vec![swap]).unwrap();
        let rep = is_cp(&t);
        assert!(!rep.verdict);
        assert!((rep.most_negative() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_dilation_has_env_four() {
        let a = alg(&[2]);
        let choi = eye(4) * c(0.5);
        let dep = Channel::from_choi(a.clone(), a, 0, TraceConvention::Matrix, vec![choi]).unwrap();
        assert!(is_cp(&dep).verdict);
        let d = minimal_dilation(&dep).unwrap();
        assert_eq!(d.env_dims(), &[vec![4]]);
        assert!(d.is_minimal());
    }

    #[test]
    fn superoperator_of_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_channel(&mut rng, &alg(&[1, 2]), &alg(&[2, 1]), 0, 2);
        let g = random_channel(&mut rng, &alg(&[2, 1]), &alg(&[3]), 0, 2);
        let gf = compose_channels(&g, &f).unwrap();
        let lhs = gf.as_superoperator();
        let rhs = g.as_superoperator() * f.as_superoperator();
        assert!(op_norm(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn tensor_acts_on_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_channel(&mut rng, &alg(&[2]), &alg(&[1, 1]), 2, 2);
        let g = random_channel(&mut rng, &alg(&[1, 2]), &alg(&[2]), 0, 2);
        let fg = tensor_channels(&f, &g);
        let x = AlgebraElement::new(&alg(&[2]), vec![crate::linalg::random_gaussian(&mut rng, 2, 2)]).unwrap();
        let y = AlgebraElement::new(
            &alg(&[1, 2]),
            vec![crate::linalg::random_gaussian(&mut rng, 1, 1), crate::linalg::random_gaussian(&mut rng, 2, 2)],
        )
        .unwrap();
        let aux = crate::linalg::random_density(&mut rng, 2, 2);
        let fx = f.apply(&x, Some(&aux)).unwrap();
        let gy = g.apply(&y, None).unwrap();
        let xy = AlgebraElement { blocks: y.blocks.iter().map(|b| kron(&x.blocks[0], b)).collect() };
        let out = fg.apply(&xy, Some(&aux)).unwrap();
        let mut want = vec![];
        for a in &fx.blocks {
            for b in &gy.blocks {
                want.push(kron(a, b));
            }
        }
        assert!(out.distance(&AlgebraElement { blocks: want }) < 1e-10);
    }

    #[test]
    fn dilation_round_trip_and_tp_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = random_channel(&mut rng, &alg(&[2, 1]), &alg(&[1, 3]), 2, 3);
        let d = minimal_dilation(&ch).unwrap();
        assert!(dilation_to_channel(&d).distance(&ch).unwrap() < 1e-10);
        assert!(d.isometry_residual() < 1e-10);
        let tp = is_trace_preserving(&ch, TraceConvention::Matrix, 1e-9);
        assert!(tp.verdict);
        assert!(tp.isometry_residual.unwrap() < 1e-9);
        let sp = is_trace_preserving(&ch, TraceConvention::Special, 1e-9);
        assert!((sp.residual - sp.isometry_residual.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn dilations_related_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = random_channel(&mut rng, &alg(&[2]), &alg(&[2]), 0, 2);
        let d = minimal_dilation(&ch).unwrap();
        let rel = dilations_related(&d, &d, 1e-9).unwrap();
        assert!(rel.alpha.approx_eq(&BlockMap::identity(rel.alpha.source()), 1e-9));
    }
}
