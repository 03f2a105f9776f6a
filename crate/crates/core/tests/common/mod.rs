//! Instances shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use entverify::algebra::{MultimatrixAlgebra, ResourceState};
use entverify::channel::{
    compose_channels, dilation_to_channel, dilations_related, is_trace_preserving, minimal_dilation, Channel, Relation,
    TraceConvention,
};
use entverify::diagram::{BlockMap, Chain, OneMorphism};
use entverify::linalg::{c, eye, random_gaussian, random_isometry, random_unitary, unit, zeros, CMat};
use entverify::random::{random_algebra, random_channel, rng};
use entverify::schemes::{construct_qbij, direct_sum_channels, VERDICT_TOL};
use entverify::ueb::{dense_coding_channel, random_ueb, teleportation_channel, weyl_basis, UnitaryErrorBasis};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub fn tele(u: &UnitaryErrorBasis) -> Channel {
    teleportation_channel(u).unwrap()
}

pub fn dense(u: &UnitaryErrorBasis) -> Channel {
    dense_coding_channel(u).unwrap()
}

/// `ρ_i ↦ U_i ρ_i U_i†` on every factor, no auxiliary system.
pub fn unitary_channel(a: &MultimatrixAlgebra, us: &[CMat]) -> Channel {
    let m = a.num_factors();
    let mut kraus = vec![vec![]; m * m];
    for i in 0..m {
        kraus[i * m + i].push(us[i].clone());
    }
    Channel::from_kraus(a.clone(), a.clone(), 0, &kraus).unwrap()
}

/// `[n] → [n]` with transition probabilities `p[i][j]`.
pub fn stochastic_channel(p: &[Vec<f64>]) -> Channel {
    let n = p.len();
    let a = MultimatrixAlgebra::classical(n);
    let mut kraus = vec![vec![]; n * n];
    for i in 0..n {
        for j in 0..n {
            if p[i][j] > 0.0 {
                kraus[i * n + j].push(CMat::from_element(1, 1, c(p[i][j].sqrt())));
            }
        }
    }
    Channel::from_kraus(a.clone(), a, 0, &kraus).unwrap()
}

pub fn permutation_channel(perm: &[usize]) -> Channel {
    let n = perm.len();
    let p: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if perm[i] == j { 1.0 } else { 0.0 }).collect()).collect();
    stochastic_channel(&p)
}

/// Teleportation with one extra outcome that never occurs.
pub fn padded_teleportation(u: &UnitaryErrorBasis) -> Channel {
    let d = u.d();
    let base = tele(u);
    let mut blocks: Vec<CMat> = base.choi_blocks().to_vec();
    blocks.push(zeros(d * d, d * d));
    Channel::from_choi(
        base.source().clone(),
        MultimatrixAlgebra::classical(d * d + 1),
        d,
        base.convention(),
        blocks,
    )
    .unwrap()
}

/// `(1 − p) · teleportation + p · (uniformly random outcome)`.
pub fn noisy_teleportation(u: &UnitaryErrorBasis, p: f64) -> Channel {
    let d = u.d();
    let base = tele(u);
    let blocks: Vec<CMat> = base
        .choi_blocks()
        .iter()
        .map(|b| b * c(1.0 - p) + eye(d * d) * c(p / (d * d) as f64))
        .collect();
    Channel::from_choi(base.source().clone(), base.target().clone(), d, base.convention(), blocks).unwrap()
}

/// `ρ ⊗ σ ↦ ρ Tr σ` on `A ⊗ B(C^h)`.
pub fn discard_aux(a: &MultimatrixAlgebra, h: usize) -> Channel {
    let m = a.num_factors();
    let mut kraus = vec![vec![]; m * m];
    for i in 0..m {
        let d = a.factors()[i];
        for k in 0..h {
            kraus[i * m + i].push(CMat::from_fn(d, h * d, |y, ax| c(if ax / d == k && ax % d == y { 1.0 } else { 0.0 })));
        }
    }
    Channel::from_kraus(a.clone(), a.clone(), h, &kraus).unwrap()
}

/// Controlled unitaries `[n] ⊗ B(C^d) → B(C^d)`, control `i ↦ U_i†`.
pub fn controlled(us: &[CMat]) -> Channel {
    let d = us[0].nrows();
    let kraus: Vec<Vec<CMat>> = us.iter().map(|u| vec![u.adjoint()]).collect();
    Channel::from_kraus(MultimatrixAlgebra::classical(us.len()), MultimatrixAlgebra::matrix(d), d, &kraus).unwrap()
}

/// Every multiset of factor sizes with `Σ d_i² = dim`, largest first.
pub fn algebras_of_dim(dim: usize) -> Vec<MultimatrixAlgebra> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for d in (1..=max).rev() {
            if d * d <= rest {
                cur.push(d);
                rec(rest - d * d, d, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = vec![];
    rec(dim, dim, &mut vec![], &mut out);
    out.into_iter().map(|f| MultimatrixAlgebra::new(f).unwrap()).collect()
}

/// `(A, B)` with `dim A = dim B ≤ max_dim`, chosen at random.
pub fn matched_pair<R: Rng>(r: &mut R, max_dim: usize) -> (MultimatrixAlgebra, MultimatrixAlgebra) {
    let dim = r.random_range(1..=max_dim);
    let all = algebras_of_dim(dim);
    (all.choose(r).unwrap().clone(), all.choose(r).unwrap().clone())
}

/// A named instance and, where known, whether it is a quantum bijection.
pub struct Instance {
    pub name: String,
    pub channel: Channel,
    pub expected: Option<bool>,
}

fn inst(name: impl Into<String>, channel: Channel, expected: Option<bool>) -> Instance {
    Instance { name: name.into(), channel, expected }
}

/// At least 50 quantum bijections and related channels, plus 20 broken variants.
pub fn corpus() -> (Vec<Instance>, Vec<Instance>) {
    let mut r = rng(2024);
    let mut good = vec![];
    for d in 1..=4 {
        good.push(inst(format!("teleportation weyl d={d}"), tele(&weyl_basis(d)), Some(true)));
        good.push(inst(format!("dense coding weyl d={d}"), dense(&weyl_basis(d)), Some(true)));
    }
    for (d, seed) in [(2, 1), (2, 2), (3, 3), (3, 4)] {
        let u = random_ueb(d, seed);
        good.push(inst(format!("teleportation random d={d} seed={seed}"), tele(&u), Some(true)));
        good.push(inst(format!("dense coding random d={d} seed={seed}"), dense(&u), Some(true)));
    }
    for d in 2..=3 {
        let (u, v) = (weyl_basis(d), random_ueb(d, 40 + d as u64));
        good.push(inst(format!("teleportation sum d={d}"), direct_sum_channels(&tele(&u), &tele(&v)).unwrap(), Some(true)));
        good.push(inst(format!("dense coding sum d={d}"), direct_sum_channels(&dense(&u), &dense(&v)).unwrap(), Some(true)));
    }
    let u2 = weyl_basis(2);
    good.push(inst("dense ∘ teleportation", compose_channels(&dense(&u2), &tele(&u2)).unwrap(), Some(true)));
    good.push(inst("teleportation ∘ dense", compose_channels(&tele(&u2), &dense(&u2)).unwrap(), Some(true)));
    for k in 0..12 {
        let (a, b) = matched_pair(&mut r, 8);
        let q = construct_qbij(&a, &b, VERDICT_TOL).unwrap();
        good.push(inst(format!("construct {k}: {:?} → {:?}", a.factors(), b.factors()), q.channel().clone(), Some(true)));
    }
    for k in 0..4 {
        let a = MultimatrixAlgebra::new(vec![1, 2, 1 + k % 3]).unwrap();
        let us: Vec<CMat> = a.factors().iter().map(|&d| random_unitary(&mut r, d)).collect();
        good.push(inst(format!("unitary conjugation {k}"), unitary_channel(&a, &us), Some(true)));
    }
    for k in 0..3 {
        let mut perm: Vec<usize> = (0..4 + k).collect();
        perm.shuffle(&mut r);
        good.push(inst(format!("permutation {k}"), permutation_channel(&perm), Some(true)));
    }
    good.push(inst("discard aux on B(C^2)", discard_aux(&MultimatrixAlgebra::matrix(2), 2), Some(true)));
    good.push(inst("discard aux on C ⊕ B(C^2)", discard_aux(&MultimatrixAlgebra::new(vec![1, 2]).unwrap(), 3), Some(true)));
    good.push(inst("identity on [1, 2]", Channel::identity(&MultimatrixAlgebra::new(vec![1, 2]).unwrap()), Some(true)));
    for k in 0..3 {
        let a = MultimatrixAlgebra::new(vec![2, 1]).unwrap();
        let c1 = construct_qbij(&a, &MultimatrixAlgebra::classical(5), VERDICT_TOL).unwrap();
        let c2 = construct_qbij(&MultimatrixAlgebra::classical(5), &a, VERDICT_TOL).unwrap();
        let mut perm: Vec<usize> = (0..5).collect();
        perm.shuffle(&mut r);
        let mid = compose_channels(&permutation_channel(&perm), c1.channel()).unwrap();
        good.push(inst(format!("construct ∘ permutation ∘ construct {k}"), compose_channels(c2.channel(), &mid).unwrap(), Some(true)));
    }

    let mut bad = vec![];
    for d in 2..=3 {
        bad.push(inst(format!("padded teleportation d={d}"), padded_teleportation(&weyl_basis(d)), Some(false)));
    }
    for (k, p) in [0.05, 0.3, 1.0].iter().enumerate() {
        bad.push(inst(format!("noisy teleportation {k}"), noisy_teleportation(&weyl_basis(2), *p), Some(false)));
    }
    // mixing in a replacement channel contracts distinguishability, so
    // nothing can undo these once dim A ≥ 2
    let mut k = 0;
    while k < 8 {
        let (a, b) = matched_pair(&mut r, 5);
        if a.dim() < 2 {
            continue;
        }
        let h = 1 + k % 3;
        let ch = with_replacement_noise(&random_channel(&mut r, &a, &b, h, 3), 0.1);
        bad.push(inst(format!("noisy random channel {k}: {:?} → {:?}", a.factors(), b.factors()), ch, Some(false)));
        k += 1;
    }
    let x = weyl_basis(2).elements()[2].clone();
    let z = weyl_basis(2).elements()[1].clone();
    bad.push(inst("controlled {I, I, X, Z}", controlled(&[eye(2), eye(2), x.clone(), z.clone()]), Some(false)));
    bad.push(inst("controlled {I, X, X, Z}", controlled(&[eye(2), x.clone(), x, z]), Some(false)));
    bad.push(inst("classical noise", stochastic_channel(&[vec![0.9, 0.1, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]), Some(false)));
    bad.push(inst("classical merge", stochastic_channel(&[vec![1.0, 0.0], vec![1.0, 0.0]]), Some(false)));
    // partial trace B(C^2) ⊗ B(C^2) → B(C^2) as a channel without auxiliary system
    let pt: Vec<CMat> = (0..2).map(|k| CMat::from_fn(2, 4, |y, ax| c(if ax / 2 == y && ax % 2 == k { 1.0 } else { 0.0 }))).collect();
    bad.push(inst("partial trace", Channel::from_kraus(MultimatrixAlgebra::matrix(4), MultimatrixAlgebra::matrix(2), 0, &[pt]).unwrap(), Some(false)));
    // isometric embedding B(C^2) → B(C^2) ⊕ C
    let emb = Channel::from_kraus(
        MultimatrixAlgebra::matrix(2),
        MultimatrixAlgebra::new(vec![2, 1]).unwrap(),
        0,
        &[vec![eye(2)], vec![]],
    )
    .unwrap();
    bad.push(inst("embedding into B(C^2) ⊕ C", emb, Some(false)));
    // teleportation that ignores part of the input: measure only sigma, replace with a fixed state
    let mix = noisy_teleportation(&random_ueb(2, 9), 0.5);
    bad.push(inst("half-noisy random teleportation", mix, Some(false)));
    (good, bad)
}

/// The canonical maximally entangled state on the auxiliary system of `m`.
/// `(1 − p) ch + p ρ ↦ Tr(ρ) σ` with `σ` maximally mixed on the target.
pub fn with_replacement_noise(ch: &Channel, p: f64) -> Channel {
    let ch = ch.to_convention(TraceConvention::Matrix);
    let (a, b) = (ch.source(), ch.target());
    let total: usize = b.factors().iter().sum();
    let n = b.num_factors();
    let blocks = ch
        .choi_blocks()
        .iter()
        .enumerate()
        .map(|(k, blk)| {
            let (i, j) = (k / n, k % n);
            let din = ch.h() * a.factors()[i];
            let sigma = eye(b.factors()[j]) / c(total as f64);
            blk * c(1.0 - p) + entverify::linalg::kron(&eye(din), &sigma) * c(p)
        })
        .collect();
    Channel::from_choi(a.clone(), b.clone(), ch.aux_dim(), TraceConvention::Matrix, blocks).unwrap()
}

pub fn bell_for(m: &Channel) -> ResourceState {
    ResourceState::max_entangled(m.h())
}

/// `Σ_k p_k |w_k⟩⟨w_k|` re-expressed with new vectors `Σ_k V[l, k] √p_k w_k` for a random isometry `V`.
pub fn redecompose<R: Rng>(r: &mut R, w: &ResourceState, extra: usize) -> ResourceState {
    let comps = w.components();
    let k = comps.len();
    let v = entverify::linalg::random_isometry(r, k + extra, k);
    let mut out = vec![];
    for l in 0..k + extra {
        let mut om = zeros(w.h2(), w.h1());
        for (kk, (p, o)) in comps.iter().enumerate() {
            om += o * (v[(l, kk)] * c(p.sqrt()));
        }
        let n = (w.h1() * w.h2()) as f64;
        let weight = n.sqrt() * om.iter().map(|x| x.norm_sqr()).sum::<f64>();
        if weight > 1e-14 {
            out.push((weight, om / c(weight.sqrt())));
        }
    }
    ResourceState::mixed(w.h1(), w.h2(), out, 1e-9).unwrap()
}

/// `Σ_k p_k |kk⟩⟨kk|` (normalized components) on `C^n ⊗ C^n`.
pub fn classical_correlation(p: &[f64]) -> ResourceState {
    let n = p.len();
    let s = (n as f64).sqrt();
    let comps = p.iter().enumerate().map(|(k, &pk)| (pk, unit(n, k, k) / c(s))).collect();
    ResourceState::mixed(n, n, comps, 1e-9).unwrap()
}

/// `ρ ⊗ σ ↦ Σ_k ⟨k|σ|k⟩ U_k ρ U_k†` with the auxiliary system as classical control.
pub fn controlled_by_aux(us: &[CMat]) -> Channel {
    let (n, d) = (us.len(), us[0].nrows());
    let kraus: Vec<CMat> = us
        .iter()
        .enumerate()
        .map(|(k, u)| CMat::from_fn(d, n * d, |y, ax| if ax / d == k { u[(y, ax % d)] } else { c(0.0) }))
        .collect();
    let a = MultimatrixAlgebra::matrix(d);
    Channel::from_kraus(a.clone(), a, n, &[kraus]).unwrap()
}

/// Qubit teleportation with a three-level auxiliary system: levels 0 and 1
/// teleport, level 2 produces a uniformly random outcome.
pub fn teleportation_in_three(u: &UnitaryErrorBasis) -> Channel {
    let base = tele(u);
    let mut kraus = vec![];
    for i in 0..4 {
        let b = base.choi_block(0, i);
        let k = entverify::channel::choi_to_kraus(b, 4, 1, 1e-12);
        let mut ks: Vec<CMat> = k
            .iter()
            .map(|k| CMat::from_fn(1, 6, |_, ax| if ax < 4 { k[(0, ax)] } else { c(0.0) }))
            .collect();
        for x in 0..2 {
            ks.push(CMat::from_fn(1, 6, |_, ax| c(if ax == 4 + x { 0.5 } else { 0.0 })));
        }
        kraus.push(ks);
    }
    Channel::from_kraus(MultimatrixAlgebra::matrix(2), MultimatrixAlgebra::classical(4), 3, &kraus).unwrap()
}

/// A random wire with region sizes `m → n` and dims in `0..=max_dim`.
pub fn random_wire<R: Rng>(r: &mut R, m: usize, n: usize, max_dim: usize) -> OneMorphism {
    OneMorphism::new((0..m).map(|_| (0..n).map(|_| r.random_range(0..=max_dim)).collect()).collect()).unwrap()
}

/// A chain of one or two random wires from a region of size `m` to one of size `n`.
pub fn random_chain<R: Rng>(r: &mut R, m: usize, n: usize, max_index: usize, max_dim: usize) -> Chain {
    if r.random_bool(0.5) {
        Chain::single(random_wire(r, m, n, max_dim))
    } else {
        let k = r.random_range(1..=max_index);
        Chain::new(vec![random_wire(r, m, k, max_dim), random_wire(r, k, n, max_dim)]).unwrap()
    }
}

pub fn random_box<R: Rng>(r: &mut R, s: &Chain, t: &Chain) -> BlockMap {
    let (s2, t2) = (s.clone(), t.clone());
    BlockMap::from_fn(s.clone(), t.clone(), |a, b| random_gaussian(r, t2.total_dim(b), s2.total_dim(a))).unwrap()
}

/// Worst residuals of the snake, involution and slide laws on one random
/// shaded instance, in that order.
pub fn diagram_law_residuals<R: Rng>(r: &mut R, max_index: usize, max_dim: usize) -> [f64; 3] {
    let (m, n) = (r.random_range(1..=max_index), r.random_range(1..=max_index));
    let v = random_wire(r, m, n, max_dim);
    let snake = BlockMap::snake_left(&v)
        .unwrap()
        .max_diff(&BlockMap::identity(&Chain::single(v.clone())))
        .unwrap()
        .max(BlockMap::snake_right(&v).unwrap().max_diff(&BlockMap::identity(&Chain::single(v.dual()))).unwrap());

    let s = random_chain(r, m, n, max_index, max_dim);
    let t = random_chain(r, m, n, max_index, max_dim);
    let u = random_chain(r, m, n, max_index, max_dim);
    let f = random_box(r, &s, &t);
    let g = random_box(r, &t, &u);
    let gf = BlockMap::compose(&g, &f).unwrap();
    let diff = |a: &BlockMap, b: &BlockMap| a.max_diff(b).unwrap();
    let inv = [
        diff(&f.dagger().dagger(), &f),
        diff(&f.transpose().transpose(), &f),
        diff(&f.conjugate().conjugate(), &f),
        diff(&f.conjugate(), &f.transpose().dagger()),
        diff(&f.conjugate(), &f.dagger().transpose()),
        diff(&gf.dagger(), &BlockMap::compose(&f.dagger(), &g.dagger()).unwrap()),
        diff(&gf.transpose(), &BlockMap::compose(&f.transpose(), &g.transpose()).unwrap()),
        diff(&gf.conjugate(), &BlockMap::compose(&g.conjugate(), &f.conjugate()).unwrap()),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    // a box on one wire slides around a cap and around a cup
    let w = random_wire(r, m, n, max_dim);
    let b = random_box(r, &Chain::single(v.clone()), &Chain::single(w.clone()));
    let bt = b.transpose();
    let id = |x: &OneMorphism| BlockMap::identity(&Chain::single(x.clone()));
    let cap_l = BlockMap::compose(&BlockMap::cap(&w), &BlockMap::tensor(&b, &id(&w.dual())).unwrap()).unwrap();
    let cap_r = BlockMap::compose(&BlockMap::cap(&v), &BlockMap::tensor(&id(&v), &bt).unwrap()).unwrap();
    let cup_l = BlockMap::compose(&BlockMap::tensor(&id(&v.dual()), &b).unwrap(), &BlockMap::cup(&v)).unwrap();
    let cup_r = BlockMap::compose(&BlockMap::tensor(&bt, &id(&w)).unwrap(), &BlockMap::cup(&w)).unwrap();
    let slide = diff(&cap_l, &cap_r).max(diff(&cup_l, &cup_r));
    [snake, inv, slide]
}

/// Outcome of the dilation checks on one random channel.
#[derive(Debug)]
pub struct StinespringCheck {
    pub reconstruction: f64,
    pub ranks_match: bool,
    pub relation: f64,
    pub special_tp_agrees: bool,
}

fn numerical_rank(m: &CMat) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = entverify::linalg::svd(m).1;
    let top = s.iter().copied().fold(0.0, f64::max);
    s.iter().filter(|&&x| x > 1e-10 * top.max(1e-300) && x > 1e-13).count()
}

pub fn stinespring_check<R: Rng>(r: &mut R) -> StinespringCheck {
    let a = random_algebra(r, 3, 3);
    let b = random_algebra(r, 3, 3);
    let aux = r.random_range(0..=2);
    let ch = random_channel(r, &a, &b, aux, 3);
    let ch = if r.random_bool(0.25) { ch.to_convention(TraceConvention::Special) } else { ch };
    let d = minimal_dilation(&ch).unwrap();
    let reconstruction = dilation_to_channel(&d).distance(&ch).unwrap();

    let blocks = ch.blocks_in(TraceConvention::Matrix);
    let (m, n) = (a.num_factors(), b.num_factors());
    let ranks_match = (0..m).all(|i| (0..n).all(|j| d.env_dims()[j][i] == numerical_rank(&blocks[i * n + j])));

    // a redundant dilation: the same boxes pushed through random isometries
    let maps: Vec<CMat> = (0..m * n)
        .map(|k| {
            let rk = d.env_dims()[k % n][k / n];
            if rk == 0 {
                zeros(r.random_range(0..=1), 0)
            } else {
                let extra = r.random_range(0..=2);
                random_isometry(r, rk + extra, rk)
            }
        })
        .collect();
    let d2 = d.with_environment_map(&maps).unwrap();
    let rel = dilations_related(&d, &d2, 1e-9).map(|x| worst(&x)).unwrap_or(f64::INFINITY);
    let back = dilations_related(&d2, &d, 1e-9).map(|x| worst(&x)).unwrap_or(f64::INFINITY);

    let tol = 1e-9;
    let candidates = [ch.clone(), ch.to_convention(TraceConvention::Special), ch.to_convention(TraceConvention::Special)];
    let special_tp_agrees = candidates.iter().enumerate().all(|(k, x)| {
        let x = if k == 2 { scaled(x, 0.9) } else { x.clone() };
        let tp = is_trace_preserving(&x, TraceConvention::Special, tol).verdict;
        let iso = minimal_dilation(&x.relabel_convention(TraceConvention::Special)).unwrap().isometry_residual();
        tp == (iso < tol)
    });
    StinespringCheck { reconstruction, ranks_match, relation: rel.max(back), special_tp_agrees }
}

fn worst(r: &Relation) -> f64 {
    r.forward_residual.max(r.backward_residual).max(r.partial_isometry_residual)
}

pub fn scaled(ch: &Channel, s: f64) -> Channel {
    let blocks = ch.choi_blocks().iter().map(|b| b * c(s)).collect();
    Channel::from_choi(ch.source().clone(), ch.target().clone(), ch.aux_dim(), ch.convention(), blocks).unwrap()
}
