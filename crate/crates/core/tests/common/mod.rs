#![allow(dead_code)]

use knightmark_core::market::{validate_market, ConeMode, ConeSpec, MarketSpec, ValidatedMarket};
use knightmark_core::order::{build_order, OrderKind, OrderStructure};
use knightmark_core::rational::{q, qvec, Rational};

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// One asset, one period, trivial initial information.
pub fn one_period(s0: Rational, s1: Vec<Rational>) -> ValidatedMarket {
    let n = s1.len();
    validate_market(MarketSpec {
        states: names(n),
        filtration: vec![vec![(0..n).collect()], (0..n).map(|s| vec![s]).collect()],
        assets: vec!["S".into()],
        prices: vec![vec![vec![s0; n]], vec![s1]],
        cone: ConeSpec::linear(),
    })
    .unwrap()
}

/// One period, net trades spanned by the given payoffs.
pub fn explicit(n: usize, generators: Vec<Vec<Rational>>, mode: ConeMode) -> ValidatedMarket {
    validate_market(MarketSpec {
        states: names(n),
        filtration: vec![vec![(0..n).collect()], (0..n).map(|s| vec![s]).collect()],
        assets: vec!["S".into()],
        prices: vec![
            vec![vec![Rational::from(1); n]],
            vec![vec![Rational::from(1); n]],
        ],
        cone: ConeSpec {
            mode,
            generators: Some(generators),
            long_only: Vec::new(),
        },
    })
    .unwrap()
}

pub fn binomial() -> ValidatedMarket {
    one_period(q(1, 1), vec![q(2, 1), q(1, 2)])
}

pub fn kreps() -> ValidatedMarket {
    one_period(q(1, 1), qvec(&[1, 2, 2]))
}

/// Ω = {0, 1/2, 1} with S_1 = 2ω.
pub fn uniform3() -> ValidatedMarket {
    one_period(q(1, 1), qvec(&[0, 1, 2]))
}

/// S_1 = (1, 1, 2): only the last state moves.
pub fn one_one_two() -> ValidatedMarket {
    one_period(q(1, 1), qvec(&[1, 1, 2]))
}

pub fn two_prior_priors() -> Vec<Vec<Rational>> {
    vec![
        vec![q(1, 6), q(1, 3), q(1, 4), q(1, 4)],
        vec![q(1, 3), q(1, 6), q(1, 4), q(1, 4)],
    ]
}

pub fn two_prior_market() -> (ValidatedMarket, OrderStructure) {
    let market = explicit(4, vec![qvec(&[1, -1, 0, 0])], ConeMode::Linear);
    let ord = build_order(4, OrderKind::Expectation(two_prior_priors())).unwrap();
    (market, ord)
}

pub fn pointwise(market: &ValidatedMarket) -> OrderStructure {
    build_order(market.num_states(), OrderKind::Pointwise).unwrap()
}

/// Ω = {a, b, c, d}; the first period is arbitrage free, the second is not.
pub fn two_period_late_arbitrage() -> ValidatedMarket {
    validate_market(MarketSpec {
        states: vec!["a".into(), "b".into(), "c".into(), "d".into()],
        filtration: vec![
            vec![vec![0, 1, 2, 3]],
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0], vec![1], vec![2], vec![3]],
        ],
        assets: vec!["S".into()],
        prices: vec![
            vec![qvec(&[1, 1, 1, 1])],
            vec![vec![q(2, 1), q(2, 1), q(1, 2), q(1, 2)]],
            vec![vec![q(3, 1), q(1, 1), q(1, 2), q(1, 1)]],
        ],
        cone: ConeSpec::linear(),
    })
    .unwrap()
}
