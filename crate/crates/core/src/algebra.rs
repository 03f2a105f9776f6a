//! Finite-dimensional C*-algebras `⊕_i B(C^{d_i})`, their elements, and
//! shared resource states on `H1 ⊗ H2`.
//!
//! A pure resource state is stored through the operator `ω : H1 → H2`,
//! normalized so that `√(h1 h2) · Tr(ω†ω) = 1`. The state vector is
//! `(h1 h2)^{1/4} Σ_a |a⟩ ⊗ ω|a⟩` and the maximally entangled state on
//! `C^d ⊗ C^d` has `ω = 1/d`.
//!
//! ```
//! use entverify::algebra::ResourceState;
//! let w = ResourceState::max_entangled(2);
//! let rho = w.density(); // on H2 ⊗ H1
//! assert!((rho.trace().re - 1.0).abs() < 1e-12);
//! assert!((rho[(0, 0)].re - 0.5).abs() < 1e-12);
//! ```

use crate::diagram::OneMorphism;
use crate::linalg::{c, eigh, eye, fix_phase, op_norm, svd_truncated, unvec_row, vec_row, zeros, CMat, C64};
use thiserror::Error;

/// Numerical rank cutoff relative to the largest singular value or eigenvalue.
pub const RANK_CUTOFF: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("an algebra needs at least one matrix factor")]
    NoFactors,
    #[error("factor {0} has dimension zero")]
    ZeroFactor(usize),
    #[error("element has {got} blocks, algebra has {expected} factors")]
    BlockCount { expected: usize, got: usize },
    #[error("block {index} has shape {got:?}, expected ({d}, {d})")]
    BlockShape { index: usize, got: (usize, usize), d: usize },
    #[error("state operator has shape {got:?}, expected ({h2}, {h1})")]
    StateShape { got: (usize, usize), h1: usize, h2: usize },
    #[error("state is not normalized: √(h1 h2)·Tr(ω†ω) = {0}")]
    NotNormalized(f64),
    #[error("state operator is zero")]
    ZeroState,
    #[error("mixed state weights must be positive and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("Hilbert space dimensions must be positive")]
    ZeroSpace,
    #[error("density matrix is not positive semidefinite (min eigenvalue {0})")]
    NotPositive(f64),
}

/// `⊕_i B(C^{d_i})`, given by its factor dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultimatrixAlgebra {
    factors: Vec<usize>,
}

impl MultimatrixAlgebra {
    pub fn new(factors: Vec<usize>) -> Result<Self, AlgebraError> {
        if factors.is_empty() {
            return Err(AlgebraError::NoFactors);
        }
        if let Some(k) = factors.iter().position(|&d| d == 0) {
            return Err(AlgebraError::ZeroFactor(k));
        }
        Ok(MultimatrixAlgebra { factors })
    }

    /// The full matrix algebra `B(C^d)`.
    pub fn matrix(d: usize) -> Self {
        MultimatrixAlgebra::new(vec![d]).expect("d >= 1")
    }

    /// The commutative algebra `C^n` (written `[n]`).
    pub fn classical(n: usize) -> Self {
        MultimatrixAlgebra::new(vec![1; n]).expect("n >= 1")
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Vector-space dimension `Σ d_i²`.
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|d| d * d).sum()
    }

    /// `Σ d_i`, the dimension of the defining representation.
    pub fn total_rep_dim(&self) -> usize {
        self.factors.iter().sum()
    }

    /// The wire `[1] → [m]` representing this algebra as a splitting.
    pub fn splitting(&self) -> OneMorphism {
        OneMorphism::splitting(&self.factors)
    }

    /// Factors of `self ⊗ other`, ordered with the index of `self` most significant.
    pub fn tensor(&self, other: &MultimatrixAlgebra) -> MultimatrixAlgebra {
        let mut f = Vec::with_capacity(self.factors.len() * other.factors.len());
        for a in &self.factors {
            for b in &other.factors {
                f.push(a * b);
            }
        }
        MultimatrixAlgebra { factors: f }
    }

    pub fn direct_sum(&self, other: &MultimatrixAlgebra) -> MultimatrixAlgebra {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        MultimatrixAlgebra { factors: f }
    }
}

/// An element of a multimatrix algebra: one square block per factor.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn new(alg: &MultimatrixAlgebra, blocks: Vec<CMat>) -> Result<Self, AlgebraError> {
        if blocks.len() != alg.num_factors() {
            return Err(AlgebraError::BlockCount { expected: alg.num_factors(), got: blocks.len() });
        }
        for (index, (b, &d)) in blocks.iter().zip(alg.factors()).enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(AlgebraError::BlockShape { index, got: (b.nrows(), b.ncols()), d });
            }
        }
        Ok(AlgebraElement { blocks })
    }

    pub fn identity(alg: &MultimatrixAlgebra) -> Self {
        AlgebraElement { blocks: alg.factors().iter().map(|&d| eye(d)).collect() }
    }

    pub fn zero(alg: &MultimatrixAlgebra) -> Self {
        AlgebraElement { blocks: alg.factors().iter().map(|&d| zeros(d, d)).collect() }
    }

    pub fn product(&self, other: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect() }
    }

    pub fn adjoint(&self) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().map(|a| a.adjoint()).collect() }
    }

    /// The ordinary trace `Σ_i Tr(x_i)`.
    pub fn matrix_trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// The special (Markov) trace `Σ_i d_i Tr(x_i)`.
    pub fn special_trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace() * c(b.nrows() as f64)).sum()
    }

    /// Largest block operator norm of the difference.
    pub fn distance(&self, other: &AlgebraElement) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| op_norm(&(a - b))).fold(0.0, f64::max)
    }

    /// Flatten to a column by concatenating row-major block vectorizations.
    pub fn to_vector(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|b| vec_row(b).iter().copied().collect::<Vec<_>>()).collect()
    }
}

/// A shared state on `H1 ⊗ H2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceState {
    h1: usize,
    h2: usize,
    kind: StateKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateKind {
    /// A pure state given by `ω : H1 → H2`.
    Pure(CMat),
    /// A convex combination of pure states `(weight, ω_k)`.
    Mixed(Vec<(f64, CMat)>),
}

fn omega_norm(h1: usize, h2: usize, omega: &CMat) -> f64 {
    ((h1 * h2) as f64).sqrt() * omega.iter().map(|x| x.norm_sqr()).sum::<f64>()
}

fn check_omega(h1: usize, h2: usize, omega: &CMat) -> Result<(), AlgebraError> {
    if h1 == 0 || h2 == 0 {
        return Err(AlgebraError::ZeroSpace);
    }
    if omega.nrows() != h2 || omega.ncols() != h1 {
        return Err(AlgebraError::StateShape { got: (omega.nrows(), omega.ncols()), h1, h2 });
    }
    Ok(())
}

impl ResourceState {
    /// A pure state; `√(h1 h2) Tr(ω†ω)` must equal 1 within `tol`.
    pub fn pure(omega: CMat, tol: f64) -> Result<Self, AlgebraError> {
        let (h2, h1) = (omega.nrows(), omega.ncols());
        check_omega(h1, h2, &omega)?;
        let n = omega_norm(h1, h2, &omega);
        if (n - 1.0).abs() > tol {
            return Err(AlgebraError::NotNormalized(n));
        }
        Ok(ResourceState { h1, h2, kind: StateKind::Pure(omega) })
    }

    /// A pure state rescaled to unit norm.
    pub fn pure_normalized(omega: CMat) -> Result<Self, AlgebraError> {
        let (h2, h1) = (omega.nrows(), omega.ncols());
        check_omega(h1, h2, &omega)?;
        let n = omega_norm(h1, h2, &omega);
        if n == 0.0 {
            return Err(AlgebraError::ZeroState);
        }
        Ok(ResourceState { h1, h2, kind: StateKind::Pure(omega / c(n.sqrt())) })
    }

    /// The maximally entangled state on `C^d ⊗ C^d` (`ω = 1/d`).
    pub fn max_entangled(d: usize) -> Self {
        ResourceState { h1: d, h2: d, kind: StateKind::Pure(eye(d) / c(d as f64)) }
    }

    /// A mixture; weights must be positive and sum to 1, each `ω_k` normalized.
    pub fn mixed(h1: usize, h2: usize, components: Vec<(f64, CMat)>, tol: f64) -> Result<Self, AlgebraError> {
        if components.is_empty() {
            return Err(AlgebraError::BadWeights(0.0));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if components.iter().any(|(w, _)| *w <= 0.0) || (total - 1.0).abs() > tol {
            return Err(AlgebraError::BadWeights(total));
        }
        for (_, om) in &components {
            check_omega(h1, h2, om)?;
            let n = omega_norm(h1, h2, om);
            if (n - 1.0).abs() > tol {
                return Err(AlgebraError::NotNormalized(n));
            }
        }
        Ok(ResourceState { h1, h2, kind: StateKind::Mixed(components) })
    }

    /// Decompose a density matrix on `H2 ⊗ H1` spectrally.
    pub fn from_density(rho: &CMat, h1: usize, h2: usize) -> Result<Self, AlgebraError> {
        if h1 == 0 || h2 == 0 {
            return Err(AlgebraError::ZeroSpace);
        }
        let (vals, vecs) = eigh(rho);
        let lmax = vals.iter().copied().fold(0.0, f64::max);
        if let Some(&lmin) = vals.first() {
            if lmin < -1e-9 {
                return Err(AlgebraError::NotPositive(lmin));
            }
        }
        let scale = ((h1 * h2) as f64).powf(0.25);
        let mut comps = vec![];
        for k in (0..vals.len()).rev() {
            if vals[k] > RANK_CUTOFF * lmax && vals[k] > 0.0 {
                let mut v: Vec<C64> = vecs.column(k).iter().copied().collect();
                fix_phase(&mut v);
                comps.push((vals[k], unvec_row(&v, h2, h1) / c(scale)));
            }
        }
        let total: f64 = comps.iter().map(|(w, _)| w).sum();
        if total <= 0.0 {
            return Err(AlgebraError::ZeroState);
        }
        for comp in comps.iter_mut() {
            comp.0 /= total;
        }
        if comps.len() == 1 {
            let om = comps.pop().unwrap().1;
            return Ok(ResourceState { h1, h2, kind: StateKind::Pure(om) });
        }
        Ok(ResourceState { h1, h2, kind: StateKind::Mixed(comps) })
    }

    pub fn h1(&self) -> usize {
        self.h1
    }

    pub fn h2(&self) -> usize {
        self.h2
    }

    pub fn kind(&self) -> &StateKind {
        &self.kind
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.kind, StateKind::Pure(_))
    }

    pub fn omega(&self) -> Option<&CMat> {
        match &self.kind {
            StateKind::Pure(o) => Some(o),
            StateKind::Mixed(_) => None,
        }
    }

    /// Pure components as `(weight, ω)`; a pure state has one of weight 1.
    pub fn components(&self) -> Vec<(f64, CMat)> {
        match &self.kind {
            StateKind::Pure(o) => vec![(1.0, o.clone())],
            StateKind::Mixed(v) => v.clone(),
        }
    }

    /// Density matrix on `H2 ⊗ H1`: `Σ_k p_k √(h1h2) vec(ω_k) vec(ω_k)†`.
    pub fn density(&self) -> CMat {
        let s = c(((self.h1 * self.h2) as f64).sqrt());
        let mut rho = zeros(self.h1 * self.h2, self.h1 * self.h2);
        for (w, om) in self.components() {
            let v = vec_row(&om);
            rho += &v * v.adjoint() * s * c(w);
        }
        rho
    }

    /// Spectral form: a pure state stays pure, a mixture is re-decomposed
    /// into orthogonal components.
    pub fn spectral(&self) -> Result<ResourceState, AlgebraError> {
        match &self.kind {
            StateKind::Pure(_) => Ok(self.clone()),
            StateKind::Mixed(_) => ResourceState::from_density(&self.density(), self.h1, self.h2),
        }
    }
}

/// `ω = ι ω̄ q` with `ι : C^r → H2` and `q : H1 → C^r` coisometric, `ω̄` invertible.
#[derive(Clone, Debug)]
pub struct OmegaSplit {
    pub iota: CMat,
    pub omega_bar: CMat,
    pub q: CMat,
    pub rank: usize,
}

/// Split `ω` through its range using a truncated SVD.
pub fn split_omega(omega: &CMat) -> Result<OmegaSplit, AlgebraError> {
    let (u, s, v) = svd_truncated(omega, RANK_CUTOFF);
    if s.is_empty() {
        return Err(AlgebraError::ZeroState);
    }
    let r = s.len();
    let mut ob = zeros(r, r);
    for k in 0..r {
        ob[(k, k)] = c(s[k]);
    }
    Ok(OmegaSplit { iota: u, omega_bar: ob, q: v.adjoint(), rank: r })
}
