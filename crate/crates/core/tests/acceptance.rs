//! One PASS/FAIL line per acceptance criterion; exits non-zero when any fails.

mod common;

use common::*;
use entverify::algebra::{MultimatrixAlgebra, ResourceState};
use entverify::channel::{minimal_dilation, Channel};
use entverify::linalg::{c, eye, random_gaussian, random_isometry, random_unitary, CMat};
use entverify::random::{random_algebra, rng};
use entverify::schemes::*;
use entverify::ueb::{classify_tight_teleportation, match_up_to_phase, weyl_basis};
use rand::Rng;
use std::time::Instant;

const TOL: f64 = VERDICT_TOL;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn werner_round_trip() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for d in 2..=4 {
        let u = weyl_basis(d);
        let m = tele(&u);
        let w = ResourceState::max_entangled(d);
        let rep = is_entanglement_invertible(&m, &w, TOL).unwrap();
        let dist = rep.inverse.distance(&dense(&u)).unwrap();
        worst = worst.max(dist);
        let cls = classify_tight_teleportation(&m, &w, TOL).unwrap();
        let phase = cls.as_ref().ok().and_then(|c| match_up_to_phase(c.ueb.elements(), u.elements()));
        ok &= rep.verdict && dist < 1e-9 && phase.is_some_and(|p| p.residual < 1e-9);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 30.0, format!("d = 2..4, inverse distance {worst:.1e}, {secs:.2} s"))
}

fn corpus_biunitarity() -> (Outcome, Outcome) {
    let (good, bad) = corpus();
    let total = good.len() + bad.len();
    let (mut agree_oracle, mut agree_eqs) = (0, 0);
    let mut broken_rejected = 0;
    for (k, i) in good.iter().chain(&bad).enumerate() {
        let d = minimal_dilation(&i.channel).unwrap();
        let b = biunitarity(&d, TOL).unwrap().verdict;
        let inv = is_entanglement_invertible(&i.channel, &bell_for(&i.channel), TOL).unwrap();
        let oracle = inv.oracle.passes(1e-8);
        agree_oracle += usize::from(b == oracle);
        agree_eqs += usize::from(b == check_qbij_equations(&d).unwrap().all_pass(TOL));
        broken_rejected += usize::from(k >= good.len() && !b);
    }
    let size_ok = total >= 50 && bad.len() >= 20 && broken_rejected == bad.len();
    (
        outcome(
            size_ok && agree_oracle == total,
            format!("{agree_oracle}/{total} agree with the oracle ({} broken variants rejected)", broken_rejected),
        ),
        outcome(size_ok && agree_eqs == total, format!("{agree_eqs}/{total} agree")),
    )
}

fn stinespring_suite() -> Outcome {
    let mut r = rng(4);
    let (mut recon, mut rel): (f64, f64) = (0.0, 0.0);
    let (mut ranks, mut tp) = (true, true);
    for _ in 0..50 {
        let s = stinespring_check(&mut r);
        recon = recon.max(s.reconstruction);
        rel = rel.max(s.relation);
        ranks &= s.ranks_match;
        tp &= s.special_tp_agrees;
    }
    outcome(
        recon < 1e-10 && rel < 1e-9 && ranks && tp,
        format!("50 channels: reconstruction {recon:.1e}, relation {rel:.1e}, ranks {ranks}, special TP {tp}"),
    )
}

fn dimension_law() -> Outcome {
    let mut cases: Vec<(Channel, ResourceState)> =
        corpus().0.into_iter().chain(corpus().1).map(|i| (i.channel.clone(), bell_for(&i.channel))).collect();
    // reversible but strictly dimension-increasing maps
    cases.push((
        Channel::from_kraus(
            MultimatrixAlgebra::matrix(2),
            MultimatrixAlgebra::new(vec![2, 1]).unwrap(),
            0,
            &[vec![eye(2)], vec![]],
        )
        .unwrap(),
        ResourceState::max_entangled(1),
    ));
    cases.push((
        Channel::from_kraus(
            MultimatrixAlgebra::classical(2),
            MultimatrixAlgebra::classical(3),
            0,
            &[vec![eye(1)], vec![], vec![], vec![], vec![eye(1)], vec![]],
        )
        .unwrap(),
        ResourceState::max_entangled(1),
    ));
    let (mut reversible, mut law, mut unitary_ok) = (0, true, true);
    let mut unequal = 0;
    for (m, w) in &cases {
        let rep = is_entanglement_reversible(m, w, TOL).unwrap();
        if !rep.verdict {
            continue;
        }
        reversible += 1;
        law &= rep.dims.le();
        unequal += usize::from(!rep.dims.equal());
        if let ReversibilityCertificate::Pure { isometry_residuals, coisometry_residuals, .. } = &rep.certificate {
            let unitary = isometry_residuals.iter().chain(coisometry_residuals).all(|&x| x < TOL);
            unitary_ok &= unitary == rep.dims.equal();
        }
    }
    let mut r = rng(17);
    let mut built = 0;
    for _ in 0..10 {
        let (a, b) = matched_pair(&mut r, 8);
        built += usize::from(construct_qbij(&a, &b, TOL).is_ok_and(|q| q.report().verdict));
    }
    let mut refused = 0;
    let mut tries = 0;
    while tries < 10 {
        let (a, b) = (random_algebra(&mut r, 3, 2), random_algebra(&mut r, 3, 2));
        if a.dim() == b.dim() {
            continue;
        }
        tries += 1;
        refused += usize::from(matches!(construct_qbij(&a, &b, TOL), Err(SchemeError::DimensionMismatch { .. })));
    }
    outcome(
        law && unitary_ok && unequal >= 2 && built == 10 && refused == 10,
        format!(
            "{reversible} reversible instances ({unequal} with dim A < dim B), law {law}, composites {unitary_ok}, construct {built}/10, refused {refused}/10"
        ),
    )
}

fn invertibility_criterion() -> Outcome {
    let mut r = rng(23);
    let m = tele(&weyl_basis(2));
    let (mut agree, mut expected) = (0, 0);
    for k in 0..30 {
        let om: CMat = match k % 3 {
            0 => random_unitary(&mut r, 2),
            1 => random_gaussian(&mut r, 2, 2),
            _ => {
                let mut g = random_unitary(&mut r, 2);
                g.column_mut(0).scale_mut(r.random_range(0.3..0.9));
                g
            }
        };
        let w = ResourceState::pure_normalized(om).unwrap();
        let rep = is_entanglement_invertible(&m, &w, TOL).unwrap();
        agree += usize::from(rep.verdict == rep.oracle.passes(1e-8));
        expected += usize::from(rep.verdict == (k % 3 == 0));
    }
    outcome(agree == 30 && expected == 30, format!("{agree}/30 agree with the oracle, {expected}/30 as expected"))
}

fn reduction_law() -> Outcome {
    let mut r = rng(31);
    let m = teleportation_in_three(&weyl_basis(2));
    let emb = CMat::from_fn(3, 2, |a, b| c(if a == b { 1.0 } else { 0.0 }));
    let (mut agree, mut extended, mut needed) = (0, 0, 0);
    let mut seen = [0, 0];
    for k in 0..20 {
        let iota = random_isometry(&mut r, 3, 2);
        let mid = if k % 2 == 0 { random_unitary(&mut r, 2) } else { random_gaussian(&mut r, 2, 2) };
        let q = if k % 4 == 3 { random_isometry(&mut r, 3, 2).adjoint() } else { emb.adjoint() };
        let w = ResourceState::pure_normalized(&iota * mid * q).unwrap();
        let full = is_entanglement_reversible(&m, &w, TOL).unwrap();
        let red = reduce_by_omega(&m, &w).unwrap();
        let small = is_entanglement_reversible(&red.m_bar, &red.w_bar, TOL).unwrap();
        agree += usize::from(full.verdict == small.verdict);
        seen[small.verdict as usize] += 1;
        if small.verdict {
            needed += 1;
            let n_bar = recovery_channel(&red.m_bar, &red.w_bar).unwrap();
            let n = extend_left_inverse(&n_bar, &red.split.iota, 3, None).unwrap();
            extended += usize::from(left_residual(&m, &n, &w).unwrap() < 1e-9);
        }
    }
    outcome(
        agree == 20 && extended == needed && seen[0] > 0 && seen[1] > 0,
        format!("{agree}/20 verdicts agree, {extended}/{needed} extensions verified, {} reversible", seen[1]),
    )
}

fn mixed_criterion() -> Outcome {
    let mut r = rng(41);
    let m = tele(&weyl_basis(2));
    let x = weyl_basis(2).elements()[2].clone();
    let bell = ResourceState::mixed(2, 2, vec![(1.0, eye(2) / c(2.0))], 1e-12).unwrap();
    let noisy = ResourceState::mixed(2, 2, vec![(0.9, eye(2) / c(2.0)), (0.1, &x / c(2.0))], 1e-12).unwrap();
    let a = is_entanglement_reversible(&m, &bell, TOL).unwrap();
    let b = is_entanglement_reversible(&m, &noisy, TOL).unwrap();
    let mut stable = true;
    for w in [&bell, &noisy] {
        let v = is_entanglement_reversible(&m, w, TOL).unwrap().verdict;
        for _ in 0..5 {
            let w2 = redecompose(&mut r, w, 1);
            stable &= is_entanglement_reversible(&m, &w2, TOL).unwrap().verdict == v;
        }
    }
    let res = b.solve_residual();
    outcome(
        a.verdict && !b.verdict && res > 0.01 && stable,
        format!("Bell accepted {}, mixture rejected {} with residual {res:.3}, stable under re-decomposition {stable}", a.verdict, !b.verdict),
    )
}

fn diagram_soundness() -> Outcome {
    let mut r = rng(53);
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let res = diagram_law_residuals(&mut r, 3, 4);
        for k in 0..3 {
            worst[k] = worst[k].max(res[k]);
        }
    }
    outcome(
        worst.iter().all(|&x| x < 1e-10),
        format!("100 instances: snake {:.1e}, involution {:.1e}, slide {:.1e}", worst[0], worst[1], worst[2]),
    )
}

fn main() {
    let (c2, c3) = corpus_biunitarity();
    let results = [
        ("1 Werner round trip", werner_round_trip()),
        ("2 biunitarity vs oracle", c2),
        ("3 equation equivalence", c3),
        ("4 Stinespring suite", stinespring_suite()),
        ("5 dimension law", dimension_law()),
        ("6 invertibility criterion", invertibility_criterion()),
        ("7 reduction law", reduction_law()),
        ("8 mixed-state criterion", mixed_criterion()),
        ("9 diagram soundness", diagram_soundness()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
