mod common;

use common::*;
use knightmark_core::arbitrage::{
    check_nflvr, find_arbitrage, find_one_step_arbitrage, Justification, NflvrVerdict,
};
use knightmark_core::market::{ConeMode, Payoff};
use knightmark_core::order::{default_relevance, RelevancePreset};
use knightmark_core::rational::{q, qvec};

#[test]
fn kreps_trade_is_an_arbitrage() {
    let m = kreps();
    let ord = pointwise(&m);
    let rel = default_relevance(RelevancePreset::Rop, &ord);
    let cert = find_arbitrage(&m, &ord, &rel).expect("arbitrage");
    cert.verify(&m, &ord).unwrap();
    // Proportional to (0, 1, 1).
    let c = cert.payoff[1].clone();
    assert!(c.is_positive());
    assert_eq!(cert.payoff, Payoff::from_ints(&[0, 1, 1]).scale(&c));
    cert.scaled(&q(5, 2)).verify(&m, &ord).unwrap();
}

#[test]
fn binomial_is_arbitrage_free() {
    let m = binomial();
    let ord = pointwise(&m);
    let rel = default_relevance(RelevancePreset::Rop, &ord);
    assert!(find_arbitrage(&m, &ord, &rel).is_none());
    assert!(find_one_step_arbitrage(&m, &ord).unwrap().is_none());
    let report = check_nflvr(&m, &ord, &rel);
    assert_eq!(report.verdict, NflvrVerdict::StronglyFree);
    assert!(report.consistent);
    assert_eq!(report.justification, Justification::LatticeAttainment);
}

#[test]
fn weakly_rising_asset_is_an_arbitrage() {
    let m = one_period(q(1, 1), qvec(&[1, 2]));
    let ord = pointwise(&m);
    let rel = default_relevance(RelevancePreset::Rop, &ord);
    let cert = find_arbitrage(&m, &ord, &rel).unwrap();
    assert_eq!(cert.payoff, Payoff::from_ints(&[0, 1]));
    assert_eq!(cert.relevance_index, Some(1));
    assert_eq!(cert.strict_rows, vec![1]);
}

#[test]
fn kreps_one_step() {
    let m = kreps();
    let ord = pointwise(&m);
    let found = find_one_step_arbitrage(&m, &ord).unwrap().unwrap();
    assert_eq!(found.time, 1);
    found.certificate.verify(&m, &ord).unwrap();
    let report = check_nflvr(&m, &ord, &default_relevance(RelevancePreset::Rop, &ord));
    assert!(matches!(report.verdict, NflvrVerdict::FreeLunch { .. }));
    assert!(report.consistent);
}

#[test]
fn late_arbitrage_found_at_second_step() {
    let m = two_period_late_arbitrage();
    let ord = pointwise(&m);
    let found = find_one_step_arbitrage(&m, &ord).unwrap().unwrap();
    assert_eq!(found.time, 2);
    found.certificate.verify(&m, &ord).unwrap();
    assert_eq!(found.certificate.payoff[0], q(0, 1));
    assert_eq!(found.certificate.payoff[1], q(0, 1));
    let rel = default_relevance(RelevancePreset::Rop, &ord);
    assert!(find_arbitrage(&m, &ord, &rel).is_some());
}

#[test]
fn two_prior_market_is_strongly_free() {
    let (m, ord) = two_prior_market();
    let rel = default_relevance(RelevancePreset::Rop, &ord);
    let report = check_nflvr(&m, &ord, &rel);
    assert_eq!(report.verdict, NflvrVerdict::StronglyFree);
    assert_eq!(report.justification, Justification::PolyhedralClosedness);
    assert!(report.consistent);
    assert!(find_one_step_arbitrage(&m, &ord).is_err());
}

#[test]
fn zero_cone_is_strongly_free() {
    let m = explicit(3, vec![], ConeMode::Linear);
    let ord = pointwise(&m);
    let report = check_nflvr(&m, &ord, &default_relevance(RelevancePreset::Rop, &ord));
    assert_eq!(report.verdict, NflvrVerdict::StronglyFree);
    assert!(report.consistent);
}

#[test]
fn short_sale_ban_removes_arbitrage() {
    // Selling the asset short would be an arbitrage; buying it is not.
    let linear = one_period(q(1, 1), qvec(&[1, 0]));
    let ord = pointwise(&linear);
    let rel = default_relevance(RelevancePreset::Rop, &ord);
    assert!(find_arbitrage(&linear, &ord, &rel).is_some());
    let cone = explicit(
        2,
        vec![qvec(&[0, -1]).iter().map(|v| -v).collect()],
        ConeMode::Cone,
    );
    assert!(find_arbitrage(&cone, &ord, &rel).is_some());
    let cone = explicit(2, vec![qvec(&[0, -1])], ConeMode::Cone);
    assert!(find_arbitrage(&cone, &ord, &rel).is_none());
}

#[test]
fn uniform_relevance_needs_everywhere_gains() {
    let m = kreps();
    let ord = pointwise(&m);
    let rel = default_relevance(RelevancePreset::Runiform, &ord);
    assert!(find_arbitrage(&m, &ord, &rel).is_none());
    let report = check_nflvr(&m, &ord, &rel);
    assert_eq!(report.verdict, NflvrVerdict::StronglyFree);
    assert!(report.consistent);
}
