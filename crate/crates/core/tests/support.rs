mod common;

use common::*;
use knightmark_core::order::{build_order, OrderKind};
use knightmark_core::rational::{q, qvec};
use knightmark_core::support::{
    conditional_splitting, ftap_battery, ftap_certificates, superhedge_on_set, support_set,
    technical_reduction, SupportError,
};

#[test]
fn splitting_strips_the_moving_state() {
    let m = one_one_two();
    let ord = pointwise(&m);
    let s = conditional_splitting(&m, &ord, 1, &[0, 1, 2]).unwrap();
    assert_eq!(s.beta(), 1);
    assert_eq!(s.steps[0].cell, vec![2]);
    assert_eq!(s.residual, vec![0, 1]);
    // Positive multiple of ΔS = (0, 0, 1).
    assert_eq!(s.steps[0].payoff[0], q(0, 1));
    assert!(s.steps[0].payoff[2].is_positive());
    assert!(s.is_sound(&m));

    let s = conditional_splitting(&m, &ord, 1, &[2]).unwrap();
    assert_eq!(s.beta(), 1);
    assert_eq!(s.steps[0].cell, vec![2]);
    assert!(s.residual.is_empty());
}

#[test]
fn binomial_has_nothing_to_split() {
    let m = binomial();
    let ord = pointwise(&m);
    let s = conditional_splitting(&m, &ord, 1, &[0, 1]).unwrap();
    assert_eq!(s.beta(), 0);
    assert_eq!(s.residual, vec![0, 1]);
    let r = support_set(&m, &ord, &[0, 1]).unwrap();
    assert_eq!(r.support, vec![0, 1]);
    assert!(r.agrees);
}

#[test]
fn support_of_one_one_two() {
    let m = one_one_two();
    let ord = pointwise(&m);
    let r = support_set(&m, &ord, &[0, 1, 2]).unwrap();
    assert_eq!(r.support, vec![0, 1]);
    assert!(r.agrees);
    assert!(r.warnings.is_empty());
}

#[test]
fn two_period_support() {
    let m = two_period_late_arbitrage();
    let ord = pointwise(&m);
    let r = support_set(&m, &ord, &[0, 1, 2, 3]).unwrap();
    assert!(r.agrees, "{r:?}");
    // The second period strips d; the first period has no one-point arbitrage on {a, b, c}.
    assert_eq!(r.records[0].time, 2);
    assert_eq!(r.records[0].steps[0].cell, vec![3]);
    assert_eq!(r.records[1].beta(), 0);
    assert_eq!(r.support, vec![0, 1, 2]);
    let idempotent = support_set(&m, &ord, &r.support).unwrap();
    assert_eq!(idempotent.support, r.support);
}

#[test]
fn expectation_orders_are_gated() {
    let (m, ord) = two_prior_market();
    assert!(matches!(
        support_set(&m, &ord, &[0, 1]),
        Err(SupportError::OrderUnsupported(_))
    ));
    assert!(matches!(
        technical_reduction(&m, &ord, &qvec(&[1, 0, 0, 0])),
        Err(SupportError::OrderUnsupported(_))
    ));
}

#[test]
fn hedging_on_the_support_ignores_dead_states() {
    let m = one_one_two();
    let h = superhedge_on_set(&m, &qvec(&[0, 0, 100]), &[0, 1, 2]).unwrap();
    assert_eq!(h.support, vec![0, 1]);
    assert_eq!(h.price, q(0, 1));
    assert_eq!(h.dual_price, q(0, 1));
    let h = superhedge_on_set(&m, &qvec(&[1, 1, 1]), &[0, 1, 2]).unwrap();
    assert_eq!(h.price, q(1, 1));
    let b = binomial();
    let h = superhedge_on_set(&b, &qvec(&[1, 0]), &[0, 1]).unwrap();
    assert_eq!(h.price, q(1, 3));
    assert_eq!(h.dual_price, q(1, 3));
    assert!(matches!(
        superhedge_on_set(&m, &qvec(&[1, 1, 1]), &[2]),
        Err(SupportError::EmptySupport)
    ));
}

#[test]
fn reduction_chain() {
    let b = binomial();
    let ord = pointwise(&b);
    let r = technical_reduction(&b, &ord, &qvec(&[1, 0])).unwrap();
    assert!(r.equal);
    assert_eq!(r.price, q(1, 3));
    assert_eq!(r.support, vec![0, 1]);

    let m = uniform3();
    let qs = build_order(
        3,
        OrderKind::QuasiSure(vec![vec![q(1, 2), q(0, 1), q(1, 2)]]),
    )
    .unwrap();
    let r = technical_reduction(&m, &qs, &qvec(&[0, 1, 0])).unwrap();
    assert_eq!(r.price, q(0, 1));
    assert!(r.equal);
    assert_eq!(r.zero_set, vec![0, 2]);

    let k = kreps();
    let ord = pointwise(&k);
    assert!(matches!(
        technical_reduction(&k, &ord, &qvec(&[1, 0, 0])),
        Err(SupportError::ArbitragePresent(_))
    ));
}

#[test]
fn pricing_measure_certificates() {
    let b = binomial();
    let ord = pointwise(&b);
    let qm = ftap_certificates(&b, &ord, &qvec(&[0, 0]), &qvec(&[1, 0])).unwrap();
    assert_eq!(qm, Some(vec![q(1, 3), q(2, 3)]));

    let m = uniform3();
    let qs = build_order(
        3,
        OrderKind::QuasiSure(vec![vec![q(1, 2), q(1, 2), q(0, 1)]]),
    )
    .unwrap();
    // States 0 and 1 carry the prior; the polar state 2 is excluded by Z.
    let measure = ftap_certificates(&m, &qs, &qvec(&[0, 0, -1]), &qvec(&[0, 1, 0])).unwrap();
    assert_eq!(measure, Some(qvec(&[0, 1, 0])));

    let k = kreps();
    let ord = pointwise(&k);
    assert_eq!(
        ftap_certificates(&k, &ord, &qvec(&[0, 0, 0]), &qvec(&[0, 1, 1])).unwrap(),
        None
    );
    assert!(ftap_battery(&k, &ord)
        .unwrap()
        .iter()
        .any(|(_, m)| m.is_none()));
    assert!(ftap_battery(&b, &pointwise(&b))
        .unwrap()
        .iter()
        .all(|(_, m)| m.is_some()));

    assert!(matches!(
        ftap_certificates(&b, &pointwise(&b), &qvec(&[1, 0]), &qvec(&[1, 0])),
        Err(SupportError::BadZ)
    ));
    assert!(matches!(
        ftap_certificates(&b, &pointwise(&b), &qvec(&[0, 0]), &qvec(&[1, -1])),
        Err(SupportError::BadR)
    ));
}
