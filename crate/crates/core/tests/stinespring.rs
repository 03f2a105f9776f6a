mod common;

use common::stinespring_check;
use entverify::algebra::MultimatrixAlgebra;
use entverify::channel::*;
use entverify::linalg::{c, permutation_matrix, CMat};
use entverify::random::rng;
use entverify::ueb::weyl_basis;

#[test]
fn random_channels() {
    let mut r = rng(2024);
    for k in 0..50 {
        let s = stinespring_check(&mut r);
        assert!(s.reconstruction < 1e-10, "instance {k}: {s:?}");
        assert!(s.ranks_match, "instance {k}");
        assert!(s.relation < 1e-9, "instance {k}: {s:?}");
        assert!(s.special_tp_agrees, "instance {k}");
    }
}

#[test]
fn transpose_is_not_cp() {
    let swap = permutation_matrix(&[2, 2], &[1, 0]);
    let t = Channel::from_choi(
        MultimatrixAlgebra::matrix(2),
        MultimatrixAlgebra::matrix(2),
        0,
        TraceConvention::Matrix,
        vec![swap],
    )
    .unwrap();
    let rep = is_cp(&t);
    assert!(!rep.verdict);
    // normalized Choi matrix swap/2 has spectrum {1/2, 1/2, 1/2, -1/2}
    assert!((rep.most_negative() + 0.5).abs() < 1e-12, "{}", rep.most_negative());
    assert!(matches!(minimal_dilation(&t), Err(ChannelError::NotPositive { i: 0, j: 0, .. })));
}

#[test]
fn measurement_tp_depends_on_convention() {
    // measure in a UEB-derived basis: B(C^2) → C^4 with Kraus ⟨b_k| / √2
    let u = weyl_basis(2);
    let kraus: Vec<Vec<CMat>> = u
        .elements()
        .iter()
        .map(|x| vec![CMat::from_fn(1, 2, |_, a| x[(0, a)].conj() / c(2f64.sqrt()))])
        .collect();
    let ch = Channel::from_kraus(MultimatrixAlgebra::matrix(2), MultimatrixAlgebra::classical(4), 0, &kraus).unwrap();
    let mat = is_trace_preserving(&ch, TraceConvention::Matrix, 1e-10);
    assert!(mat.verdict, "{mat:?}");
    // read as special blocks each source factor picks up e_j/d_i = 1/2
    let sp = is_trace_preserving(&ch, TraceConvention::Special, 1e-10);
    assert!(!sp.verdict);
    assert!((sp.residual - 0.5).abs() < 1e-10, "{}", sp.residual);
    assert!(sp.isometry_residual.unwrap() > 1e-9);
    let special = ch.to_convention(TraceConvention::Special);
    assert!(is_trace_preserving(&special, TraceConvention::Special, 1e-10).verdict);
}

#[test]
fn identity_is_tp_in_both() {
    let a = MultimatrixAlgebra::new(vec![1, 2, 3]).unwrap();
    let id = Channel::identity(&a);
    for conv in [TraceConvention::Matrix, TraceConvention::Special] {
        assert!(is_trace_preserving(&id, conv, 1e-12).verdict);
    }
    let d = minimal_dilation(&id).unwrap();
    assert!(d.is_minimal());
    assert!(d.isometry_residual() < 1e-12);
    assert_eq!(d.env_dims(), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
}

#[test]
fn unrelated_channels_are_reported() {
    let mut r = rng(9);
    let a = MultimatrixAlgebra::matrix(2);
    let c1 = entverify::random::random_channel(&mut r, &a, &a, 0, 2);
    let c2 = Channel::identity(&a);
    let err = dilations_related(&minimal_dilation(&c1).unwrap(), &minimal_dilation(&c2).unwrap(), 1e-9);
    assert!(matches!(err, Err(ChannelError::DifferentChannels(_))));
}
