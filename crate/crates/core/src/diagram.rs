//! Shaded string diagrams as indexed families of matrices.
//!
//! A [`OneMorphism`] is a matrix of Hilbert-space dimensions `dims[i][j]`
//! sitting between a left region (index set `[m]`) and a right region
//! (`[n]`). A [`Chain`] is a horizontal sequence of composable wires, and a
//! [`BlockMap`] is a box from a source chain (bottom) to a target chain
//! (top): one complex matrix per assignment of indices to the regions that
//! touch the box.
//!
//! # Block order
//!
//! Blocks are stored in row-major order over the free regions, listed as
//! the left outer region, the interior regions of the source chain, the
//! right outer region, then the interior regions of the target chain. When
//! either chain is empty the two outer regions are the same region and the
//! right one is omitted.
//!
//! ```
//! use entverify::diagram::{BlockMap, Chain, OneMorphism};
//! use entverify::linalg::{c, CMat};
//!
//! // A wire [1] -> [2] carrying C^2 and C^3.
//! let x = OneMorphism::new(vec![vec![2, 3]]).unwrap();
//! let id = BlockMap::identity(&Chain::single(x.clone()));
//! assert_eq!(id.blocks().len(), 2);
//! assert_eq!(id.blocks()[1], CMat::identity(3, 3));
//!
//! // The snake equation (ε ⊗ 1)(1 ⊗ η) = 1.
//! let snake = BlockMap::snake_left(&x).unwrap();
//! assert!(snake.max_diff(&id).unwrap() < 1e-12);
//! # let _ = c(1.0);
//! ```

use crate::linalg::{c, kron, max_of, op_norm, permutation_matrix, zeros, CMat, C64};
use thiserror::Error;

/// Default tolerance for diagram identities (operator norm).
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("invalid dimension matrix: {0}")]
    InvalidDims(String),
    #[error("shape mismatch at wire {wire}: {detail}")]
    ShapeMismatch { wire: usize, detail: String },
    #[error("region mismatch: {0}")]
    RegionMismatch(String),
    #[error("block {index} has shape {got:?}, expected {expected:?}")]
    BlockShape { index: usize, got: (usize, usize), expected: (usize, usize) },
    #[error("expected {expected} blocks, got {got}")]
    BlockCount { expected: usize, got: usize },
    #[error("dimension component {0} is zero")]
    ZeroDimension(usize),
}

/// A wire: a family of Hilbert spaces `V_ij` between regions `[m]` and `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneMorphism {
    dims: Vec<Vec<usize>>,
}

impl OneMorphism {
    /// Build from an `m × n` dimension matrix (`m, n ≥ 1`).
    pub fn new(dims: Vec<Vec<usize>>) -> Result<Self, DiagramError> {
        if dims.is_empty() {
            return Err(DiagramError::InvalidDims("no rows".into()));
        }
        let n = dims[0].len();
        if n == 0 {
            return Err(DiagramError::InvalidDims("no columns".into()));
        }
        if let Some(r) = dims.iter().position(|r| r.len() != n) {
            return Err(DiagramError::InvalidDims(format!("row {r} has length {} instead of {n}", dims[r].len())));
        }
        Ok(OneMorphism { dims })
    }

    /// The identity wire on `[m]`.
    pub fn identity(m: usize) -> Self {
        OneMorphism { dims: (0..m).map(|i| (0..m).map(|j| usize::from(i == j)).collect()).collect() }
    }

    /// An unshaded wire `[1] → [1]` carrying `C^d`.
    pub fn hilbert(d: usize) -> Self {
        OneMorphism { dims: vec![vec![d]] }
    }

    /// A wire `[1] → [m]` carrying `C^{d_i}` into region `i`.
    pub fn splitting(ds: &[usize]) -> Self {
        OneMorphism { dims: vec![ds.to_vec()] }
    }

    pub fn left_index(&self) -> usize {
        self.dims.len()
    }

    pub fn right_index(&self) -> usize {
        self.dims[0].len()
    }

    pub fn dims(&self) -> &[Vec<usize>] {
        &self.dims
    }

    pub fn dim(&self, i: usize, j: usize) -> usize {
        self.dims[i][j]
    }

    pub fn is_identity(&self) -> bool {
        *self == OneMorphism::identity(self.left_index())
    }

    /// The dual wire `V*`, with the dimension matrix transposed.
    pub fn dual(&self) -> Self {
        let (m, n) = (self.left_index(), self.right_index());
        OneMorphism { dims: (0..n).map(|j| (0..m).map(|i| self.dims[i][j]).collect()).collect() }
    }
}

/// A horizontal sequence of composable wires starting at a region of size `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    start: usize,
    wires: Vec<OneMorphism>,
}

impl Chain {
    pub fn new(wires: Vec<OneMorphism>) -> Result<Self, DiagramError> {
        let first = wires
            .first()
            .ok_or_else(|| DiagramError::RegionMismatch("a non-empty wire list is needed; use Chain::empty".into()))?;
        let start = first.left_index();
        for k in 1..wires.len() {
            if wires[k - 1].right_index() != wires[k].left_index() {
                return Err(DiagramError::ShapeMismatch {
                    wire: k,
                    detail: format!(
                        "left index {} does not match right index {} of the previous wire",
                        wires[k].left_index(),
                        wires[k - 1].right_index()
                    ),
                });
            }
        }
        Ok(Chain { start, wires })
    }

    /// The empty chain on a region of size `m`.
    pub fn empty(m: usize) -> Self {
        Chain { start: m, wires: vec![] }
    }

    pub fn single(w: OneMorphism) -> Self {
        Chain { start: w.left_index(), wires: vec![w] }
    }

    pub fn wires(&self) -> &[OneMorphism] {
        &self.wires
    }

    pub fn len(&self) -> usize {
        self.wires.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wires.is_empty()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.wires.last().map_or(self.start, |w| w.right_index())
    }

    /// Sizes of all regions, left to right (`len + 1` entries).
    pub fn regions(&self) -> Vec<usize> {
        let mut r = vec![self.start];
        r.extend(self.wires.iter().map(|w| w.right_index()));
        r
    }

    /// Horizontal concatenation.
    pub fn concat(&self, other: &Chain) -> Result<Chain, DiagramError> {
        if self.end() != other.start() {
            return Err(DiagramError::RegionMismatch(format!(
                "right region of size {} meets left region of size {}",
                self.end(),
                other.start()
            )));
        }
        let mut wires = self.wires.clone();
        wires.extend(other.wires.iter().cloned());
        Ok(Chain { start: self.start, wires })
    }

    /// Reversed chain of duals.
    pub fn dual(&self) -> Chain {
        Chain { start: self.end(), wires: self.wires.iter().rev().map(|w| w.dual()).collect() }
    }

    /// Dimensions of each wire for a full region assignment.
    pub fn wire_dims(&self, regions: &[usize]) -> Vec<usize> {
        self.wires.iter().enumerate().map(|(k, w)| w.dim(regions[k], regions[k + 1])).collect()
    }

    /// Total dimension for a full region assignment.
    pub fn total_dim(&self, regions: &[usize]) -> usize {
        self.wire_dims(regions).iter().product()
    }

    /// Index of the first wire where two chains differ, if any.
    fn first_difference(&self, other: &Chain) -> Option<(usize, String)> {
        if self.start != other.start {
            return Some((0, format!("chains start on regions of size {} and {}", self.start, other.start)));
        }
        for k in 0..self.len().max(other.len()) {
            match (self.wires.get(k), other.wires.get(k)) {
                (Some(a), Some(b)) if a == b => {}
                (Some(a), Some(b)) => return Some((k, format!("dims {:?} vs {:?}", a.dims, b.dims))),
                (Some(_), None) | (None, Some(_)) => {
                    return Some((k, format!("chain lengths {} and {}", self.len(), other.len())))
                }
                (None, None) => unreachable!(),
            }
        }
        None
    }
}

fn odometer(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let mut cur = vec![0; sizes.len()];
    for _ in 0..total {
        out.push(cur.clone());
        for k in (0..sizes.len()).rev() {
            cur[k] += 1;
            if cur[k] < sizes[k] {
                break;
            }
            cur[k] = 0;
        }
    }
    out
}

/// A 2-morphism: one matrix per region assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMap {
    source: Chain,
    target: Chain,
    blocks: Vec<CMat>,
}

/// A full region assignment for a box: regions along the source chain and
/// along the target chain (outer regions shared).
pub type Key = (Vec<usize>, Vec<usize>);

fn tied(source: &Chain, target: &Chain) -> bool {
    source.is_empty() || target.is_empty()
}

/// Enumerate the keys of a box in canonical order.
pub fn keys(source: &Chain, target: &Chain) -> Vec<Key> {
    let sr = source.regions();
    let tr = target.regions();
    let ns = source.len().saturating_sub(1);
    let nt = target.len().saturating_sub(1);
    let t = tied(source, target);
    let mut sizes = vec![sr[0]];
    sizes.extend_from_slice(&sr[1..sr.len().max(2) - 1]);
    if !t {
        sizes.push(*sr.last().unwrap());
    }
    sizes.extend_from_slice(&tr[1..tr.len().max(2) - 1]);
    odometer(&sizes)
        .into_iter()
        .map(|a| {
            let l = a[0];
            let s_int = &a[1..1 + ns];
            let (r, rest) = if t { (l, &a[1 + ns..]) } else { (a[1 + ns], &a[2 + ns..]) };
            let t_int = &rest[..nt];
            let mut s = vec![l];
            if !source.is_empty() {
                s.extend_from_slice(s_int);
                s.push(r);
            }
            let mut tt = vec![l];
            if !target.is_empty() {
                tt.extend_from_slice(t_int);
                tt.push(r);
            }
            (s, tt)
        })
        .collect()
}

impl BlockMap {
    /// Build from blocks in canonical key order, validating every shape.
    pub fn new(source: Chain, target: Chain, blocks: Vec<CMat>) -> Result<Self, DiagramError> {
        if source.start() != target.start() || source.end() != target.end() {
            return Err(DiagramError::RegionMismatch(format!(
                "source spans [{}]..[{}] but target spans [{}]..[{}]",
                source.start(),
                source.end(),
                target.start(),
                target.end()
            )));
        }
        let ks = keys(&source, &target);
        if ks.len() != blocks.len() {
            return Err(DiagramError::BlockCount { expected: ks.len(), got: blocks.len() });
        }
        for (index, ((s, t), b)) in ks.iter().zip(&blocks).enumerate() {
            let expected = (target.total_dim(t), source.total_dim(s));
            if (b.nrows(), b.ncols()) != expected {
                return Err(DiagramError::BlockShape { index, got: (b.nrows(), b.ncols()), expected });
            }
        }
        Ok(BlockMap { source, target, blocks })
    }

    /// Build by evaluating `f` at every key.
    pub fn from_fn(
        source: Chain,
        target: Chain,
        mut f: impl FnMut(&[usize], &[usize]) -> CMat,
    ) -> Result<Self, DiagramError> {
        let blocks = keys(&source, &target).iter().map(|(s, t)| f(s, t)).collect();
        BlockMap::new(source, target, blocks)
    }

    pub fn zeros(source: Chain, target: Chain) -> Result<Self, DiagramError> {
        let (s2, t2) = (source.clone(), target.clone());
        BlockMap::from_fn(source, target, |s, t| zeros(t2.total_dim(t), s2.total_dim(s)))
    }

    /// Identity 2-morphism on a chain.
    pub fn identity(chain: &Chain) -> Self {
        let ch = chain.clone();
        BlockMap::from_fn(chain.clone(), chain.clone(), |s, t| {
            let (r, cc) = (ch.total_dim(t), ch.total_dim(s));
            if s == t {
                CMat::identity(r, cc)
            } else {
                zeros(r, cc)
            }
        })
        .expect("identity shapes are consistent")
    }

    pub fn source(&self) -> &Chain {
        &self.source
    }

    pub fn target(&self) -> &Chain {
        &self.target
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn keys(&self) -> Vec<Key> {
        keys(&self.source, &self.target)
    }

    fn position(&self, s: &[usize], t: &[usize]) -> Option<usize> {
        if s.len() != self.source.len() + 1 || t.len() != self.target.len() + 1 {
            return None;
        }
        if s[0] != t[0] || s.last() != t.last() {
            return None;
        }
        let sr = self.source.regions();
        let tr = self.target.regions();
        let mut idx = 0;
        let mut push = |v: usize, size: usize| -> bool {
            if v >= size {
                return false;
            }
            idx = idx * size + v;
            true
        };
        if !push(s[0], sr[0]) {
            return None;
        }
        for k in 1..s.len().saturating_sub(1) {
            if !push(s[k], sr[k]) {
                return None;
            }
        }
        if !tied(&self.source, &self.target) && !push(*s.last().unwrap(), *sr.last().unwrap()) {
            return None;
        }
        for k in 1..t.len().saturating_sub(1) {
            if !push(t[k], tr[k]) {
                return None;
            }
        }
        Some(idx)
    }

    /// The block at full region assignments, or `None` when the assignment
    /// is not a key of this box.
    pub fn block(&self, s: &[usize], t: &[usize]) -> Option<&CMat> {
        self.position(s, t).map(|p| &self.blocks[p])
    }

    /// Like [`BlockMap::block`] but inconsistent outer regions give a zero
    /// matrix of the right shape.
    pub fn block_or_zero(&self, s: &[usize], t: &[usize]) -> CMat {
        match self.block(s, t) {
            Some(b) => b.clone(),
            None => zeros(self.target.total_dim(t), self.source.total_dim(s)),
        }
    }

    /// Apply `f` to every block.
    pub fn map_blocks(&self, mut f: impl FnMut(&[usize], &[usize], &CMat) -> CMat) -> Result<Self, DiagramError> {
        let blocks = self.keys().iter().zip(&self.blocks).map(|((s, t), b)| f(s, t, b)).collect();
        BlockMap::new(self.source.clone(), self.target.clone(), blocks)
    }

    /// Reinterpret the same blocks with different chains of identical shape.
    pub fn relabel(&self, source: Chain, target: Chain) -> Result<Self, DiagramError> {
        BlockMap::new(source, target, self.blocks.clone())
    }

    fn is_exact_identity(&self) -> bool {
        self.source == self.target
            && self.keys().iter().zip(&self.blocks).all(|((s, t), b)| {
                if s == t {
                    *b == CMat::identity(b.nrows(), b.ncols())
                } else {
                    b.iter().all(|x| *x == C64::new(0.0, 0.0))
                }
            })
    }

    /// Vertical composition `g ∘ f`.
    pub fn compose(g: &BlockMap, f: &BlockMap) -> Result<BlockMap, DiagramError> {
        if let Some((wire, detail)) = f.target.first_difference(&g.source) {
            return Err(DiagramError::ShapeMismatch { wire, detail });
        }
        if g.is_exact_identity() {
            return Ok(f.clone());
        }
        if f.is_exact_identity() {
            return Ok(g.clone());
        }
        let mid = &f.target;
        let mr = mid.regions();
        let inner: Vec<usize> = if mid.len() <= 1 { vec![] } else { mr[1..mr.len() - 1].to_vec() };
        let inner_asg = odometer(&inner);
        let (src, tgt) = (f.source.clone(), g.target.clone());
        BlockMap::from_fn(f.source.clone(), g.target.clone(), |s, u| {
            let (l, r) = (s[0], *s.last().unwrap());
            let mut acc = zeros(tgt.total_dim(u), src.total_dim(s));
            if mid.is_empty() {
                if l == r {
                    if let (Some(gb), Some(fb)) = (g.block(&[l], u), f.block(s, &[l])) {
                        acc += gb * fb;
                    }
                }
                return acc;
            }
            for a in &inner_asg {
                let mut t = vec![l];
                t.extend_from_slice(a);
                t.push(r);
                if let (Some(gb), Some(fb)) = (g.block(&t, u), f.block(s, &t)) {
                    if gb.ncols() > 0 {
                        acc += gb * fb;
                    }
                }
            }
            acc
        })
    }

    /// Horizontal juxtaposition `f ⊗ g` (f on the left).
    pub fn tensor(f: &BlockMap, g: &BlockMap) -> Result<BlockMap, DiagramError> {
        let source = f.source.concat(&g.source)?;
        let target = f.target.concat(&g.target)?;
        let (ns, nt) = (f.source.len(), f.target.len());
        BlockMap::from_fn(source, target, |s, t| {
            let (sf, sg) = (&s[..=ns], &s[ns..]);
            let (tf, tg) = (&t[..=nt], &t[nt..]);
            kron(&f.block_or_zero(sf, tf), &g.block_or_zero(sg, tg))
        })
    }

    /// Reflection: conjugate-transpose every block, swap chains.
    pub fn dagger(&self) -> BlockMap {
        BlockMap::from_fn(self.target.clone(), self.source.clone(), |t, s| {
            self.block(s, t).expect("dagger keys are the swapped keys").adjoint()
        })
        .expect("dagger preserves shapes")
    }

    fn reverse_rows(m: &CMat, dims: &[usize]) -> CMat {
        if dims.len() <= 1 {
            return m.clone();
        }
        let perm: Vec<usize> = (0..dims.len()).rev().collect();
        permutation_matrix(dims, &perm) * m
    }

    fn reverse_cols(m: &CMat, dims: &[usize]) -> CMat {
        if dims.len() <= 1 {
            return m.clone();
        }
        let perm: Vec<usize> = (0..dims.len()).rev().collect();
        m * permutation_matrix(dims, &perm).transpose()
    }

    /// π-rotation: `f^T` maps the reversed dual target to the reversed dual source.
    pub fn transpose(&self) -> BlockMap {
        BlockMap::from_fn(self.target.dual(), self.source.dual(), |ns, nt| {
            let s: Vec<usize> = nt.iter().rev().copied().collect();
            let t: Vec<usize> = ns.iter().rev().copied().collect();
            let b = self.block(&s, &t).expect("transpose key");
            let bt = b.transpose();
            let bt = Self::reverse_rows(&bt, &self.source.wire_dims(&s));
            Self::reverse_cols(&bt, &self.target.wire_dims(&t))
        })
        .expect("transpose preserves shapes")
    }

    /// Complex conjugate `f̄ = (f^T)†`.
    pub fn conjugate(&self) -> BlockMap {
        BlockMap::from_fn(self.source.dual(), self.target.dual(), |ns, nt| {
            let s: Vec<usize> = ns.iter().rev().copied().collect();
            let t: Vec<usize> = nt.iter().rev().copied().collect();
            let b = self.block(&s, &t).expect("conjugate key").conjugate();
            let b = Self::reverse_rows(&b, &self.target.wire_dims(&t));
            Self::reverse_cols(&b, &self.source.wire_dims(&s))
        })
        .expect("conjugate preserves shapes")
    }

    /// Cup `η_V : id → V* ⊗ V` on the right region of `V`.
    pub fn cup(v: &OneMorphism) -> BlockMap {
        let target = Chain::new(vec![v.dual(), v.clone()]).expect("dual chain composes");
        BlockMap::from_fn(Chain::empty(v.right_index()), target, |_, t| {
            let d = v.dim(t[1], t[0]);
            let mut m = zeros(d * d, 1);
            for a in 0..d {
                m[(a * d + a, 0)] = c(1.0);
            }
            m
        })
        .expect("cup shapes")
    }

    /// Cap `ε_V : V ⊗ V* → id` on the left region of `V`.
    pub fn cap(v: &OneMorphism) -> BlockMap {
        let source = Chain::new(vec![v.clone(), v.dual()]).expect("dual chain composes");
        BlockMap::from_fn(source, Chain::empty(v.left_index()), |s, _| {
            let d = v.dim(s[0], s[1]);
            let mut m = zeros(1, d * d);
            for a in 0..d {
                m[(0, a * d + a)] = c(1.0);
            }
            m
        })
        .expect("cap shapes")
    }

    /// `(ε_V ⊗ 1_V) ∘ (1_V ⊗ η_V)`, which equals `1_V`.
    pub fn snake_left(v: &OneMorphism) -> Result<BlockMap, DiagramError> {
        let id = BlockMap::identity(&Chain::single(v.clone()));
        let a = BlockMap::tensor(&id, &BlockMap::cup(v))?;
        let b = BlockMap::tensor(&BlockMap::cap(v), &id)?;
        BlockMap::compose(&b, &a)
    }

    /// `(1_{V*} ⊗ ε_V) ∘ (η_V ⊗ 1_{V*})`, which equals `1_{V*}`.
    pub fn snake_right(v: &OneMorphism) -> Result<BlockMap, DiagramError> {
        let id = BlockMap::identity(&Chain::single(v.dual()));
        let a = BlockMap::tensor(&BlockMap::cup(v), &id)?;
        let b = BlockMap::tensor(&id, &BlockMap::cap(v))?;
        BlockMap::compose(&b, &a)
    }

    /// Largest operator-norm difference over all blocks.
    pub fn max_diff(&self, other: &BlockMap) -> Result<f64, DiagramError> {
        if let Some((wire, detail)) = self.source.first_difference(&other.source) {
            return Err(DiagramError::ShapeMismatch { wire, detail: format!("source: {detail}") });
        }
        if let Some((wire, detail)) = self.target.first_difference(&other.target) {
            return Err(DiagramError::ShapeMismatch { wire, detail: format!("target: {detail}") });
        }
        Ok(max_of(self.blocks.iter().zip(&other.blocks).map(|(a, b)| op_norm(&(a - b)))))
    }

    pub fn approx_eq(&self, other: &BlockMap, tol: f64) -> bool {
        self.max_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// `‖f† ∘ f − 1‖` over all blocks.
    pub fn isometry_residual(&self) -> f64 {
        let g = BlockMap::compose(&self.dagger(), self).expect("dagger composes");
        g.max_diff(&BlockMap::identity(&self.source)).expect("same chains")
    }

    /// `‖f ∘ f† − 1‖` over all blocks.
    pub fn coisometry_residual(&self) -> f64 {
        let g = BlockMap::compose(self, &self.dagger()).expect("dagger composes");
        g.max_diff(&BlockMap::identity(&self.target)).expect("same chains")
    }

    /// Multiply every block by a scalar depending on its key.
    pub fn scale(&self, mut f: impl FnMut(&[usize], &[usize]) -> C64) -> BlockMap {
        self.map_blocks(|s, t, b| b * f(s, t)).expect("scaling preserves shapes")
    }
}

/// An element of `End(id_[m])`: one scalar per index, drawn as a disc.
#[derive(Clone, Debug, PartialEq)]
pub struct EndoScalarFamily {
    values: Vec<C64>,
}

impl EndoScalarFamily {
    pub fn new(values: Vec<C64>) -> Self {
        EndoScalarFamily { values }
    }

    pub fn index(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> C64 {
        self.values[i]
    }

    pub fn mul(&self, other: &EndoScalarFamily) -> EndoScalarFamily {
        EndoScalarFamily::new(self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }

    /// Componentwise principal square root.
    pub fn sqrt(&self) -> EndoScalarFamily {
        EndoScalarFamily::new(self.values.iter().map(|v| v.sqrt()).collect())
    }

    pub fn inverse(&self) -> Result<EndoScalarFamily, DiagramError> {
        if let Some(k) = self.values.iter().position(|v| v.norm() == 0.0) {
            return Err(DiagramError::ZeroDimension(k));
        }
        Ok(EndoScalarFamily::new(self.values.iter().map(|v| v.inv()).collect()))
    }

    /// The disc as a box `id_[m] → id_[m]`.
    pub fn to_blockmap(&self) -> BlockMap {
        let m = self.index();
        BlockMap::from_fn(Chain::empty(m), Chain::empty(m), |s, _| CMat::from_element(1, 1, self.values[s[0]]))
            .expect("scalar discs")
    }
}

/// Left dimension `d_V`, indexed by the right region: `Σ_i dims[i][j]`.
pub fn left_dimension(v: &OneMorphism) -> Result<EndoScalarFamily, DiagramError> {
    let vals: Vec<usize> = (0..v.right_index()).map(|j| (0..v.left_index()).map(|i| v.dim(i, j)).sum()).collect();
    if let Some(k) = vals.iter().position(|&x| x == 0) {
        return Err(DiagramError::ZeroDimension(k));
    }
    Ok(EndoScalarFamily::new(vals.into_iter().map(|x| c(x as f64)).collect()))
}

/// Right dimension, indexed by the left region: `Σ_j dims[i][j]`.
pub fn right_dimension(v: &OneMorphism) -> Result<EndoScalarFamily, DiagramError> {
    left_dimension(&v.dual())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: C64) -> CMat {
        CMat::from_element(1, 1, x)
    }

    #[test]
    fn compose_sums_over_closed_region() {
        // f: X -> Y with X = [1]->[1] (dim 1), Y splitting into 2 regions,
        // g: Y -> X; the closed region is the one inside Y.
        let x = OneMorphism::hilbert(1);
        let y = Chain::new(vec![OneMorphism::splitting(&[1, 1]), OneMorphism::new(vec![vec![1], vec![1]]).unwrap()])
            .unwrap();
        let xs = Chain::single(x);
        let fv = [C64::new(1.0, 2.0), C64::new(-0.5, 0.0)];
        let gv = [C64::new(3.0, 0.0), C64::new(0.0, 1.0)];
        let f = BlockMap::from_fn(xs.clone(), y.clone(), |_, t| scalar(fv[t[1]])).unwrap();
        let g = BlockMap::from_fn(y, xs, |s, _| scalar(gv[s[1]])).unwrap();
        let h = BlockMap::compose(&g, &f).unwrap();
        assert_eq!(h.blocks().len(), 1);
        let expect = gv[0] * fv[0] + gv[1] * fv[1];
        assert!((h.blocks()[0][(0, 0)] - expect).norm() < 1e-15);
    }

    #[test]
    fn identity_compose_is_bit_identical() {
        let x = OneMorphism::splitting(&[2, 1]);
        let ch = Chain::single(x);
        let f = BlockMap::from_fn(ch.clone(), ch.clone(), |s, _| {
            let d = ch.total_dim(s);
            CMat::from_fn(d, d, |a, b| C64::new(a as f64 - 0.0, -(b as f64)))
        })
        .unwrap();
        let id = BlockMap::identity(&ch);
        assert_eq!(BlockMap::compose(&id, &f).unwrap(), f);
        assert_eq!(BlockMap::compose(&f, &id).unwrap(), f);
    }

    #[test]
    fn mismatch_names_wire() {
        let a = BlockMap::identity(&Chain::single(OneMorphism::hilbert(2)));
        let b = BlockMap::identity(&Chain::single(OneMorphism::hilbert(3)));
        match BlockMap::compose(&a, &b) {
            Err(DiagramError::ShapeMismatch { wire, .. }) => assert_eq!(wire, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dagger_of_scalar() {
        let ch = Chain::single(OneMorphism::hilbert(1));
        let f = BlockMap::new(ch.clone(), ch, vec![scalar(C64::new(0.0, 1.0))]).unwrap();
        assert_eq!(f.dagger().blocks()[0][(0, 0)], C64::new(0.0, -1.0));
    }

    #[test]
    fn cup_unshaded_c2() {
        let cup = BlockMap::cup(&OneMorphism::hilbert(2));
        let v: Vec<C64> = cup.blocks()[0].iter().copied().collect();
        assert_eq!(v, vec![c(1.0), c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn cup_trivial_dims() {
        let v = OneMorphism::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        for b in BlockMap::cup(&v).blocks() {
            assert_eq!(*b, scalar(c(1.0)));
        }
    }

    #[test]
    fn zero_dim_blocks_are_empty() {
        let v = OneMorphism::new(vec![vec![0, 2]]).unwrap();
        let id = BlockMap::identity(&Chain::single(v));
        assert_eq!((id.blocks()[0].nrows(), id.blocks()[0].ncols()), (0, 0));
    }

    #[test]
    fn left_dimension_identity_and_splitting() {
        let d = left_dimension(&OneMorphism::identity(3)).unwrap();
        assert!(d.values().iter().all(|&v| v == c(1.0)));
        let d = left_dimension(&OneMorphism::splitting(&[2, 5])).unwrap();
        assert_eq!(d.values(), &[c(2.0), c(5.0)]);
        assert!(left_dimension(&OneMorphism::new(vec![vec![0, 1]]).unwrap()).is_err());
    }

    #[test]
    fn tensor_with_empty_chain_is_unit() {
        let x = OneMorphism::splitting(&[2, 3]);
        let ch = Chain::single(x);
        let f = BlockMap::identity(&ch).scale(|s, _| c(s[1] as f64 + 2.0));
        let e = BlockMap::identity(&Chain::empty(2));
        let g = BlockMap::tensor(&f, &e).unwrap();
        assert!(g.approx_eq(&f, 0.0));
    }
}
