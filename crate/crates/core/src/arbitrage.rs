//! Arbitrage and free-lunch detection with re-checkable certificates.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lp::{self, Direction, LinearProgram, RowSense, VarBound};
use crate::market::{Holding, Payoff, ValidatedMarket};
use crate::order::{
    classify, dominates, measurable_relevance, Classification, OrderStructure, OrderUnsupported,
    RelevancePreset, RelevanceSpec,
};
use crate::rational::Rational;
use crate::superhedge::{superhedge_price, SuperhedgeError};

/// Net trade dominating a strictly positive multiple of a relevant claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArbitrageCertificate {
    /// Weights on the net-trade generators, in generator order.
    pub coefficients: Vec<Rational>,
    /// The net trade `ℓ`.
    pub payoff: Payoff,
    /// The relevant claim `R*` with `R* ≤ ℓ`.
    pub relevant: Payoff,
    /// Index of the relevance generator `R*` is a multiple of, when it is one.
    pub relevance_index: Option<usize>,
    /// Rows of the test matrix on which `ℓ` is strictly positive.
    pub strict_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateCheckError {
    #[error("coefficients do not produce the stated net trade")]
    NotANetTrade,
    #[error("the relevant claim is not positive in the order")]
    NotRelevant,
    #[error("the net trade does not dominate the relevant claim")]
    NotDominating,
    #[error("strict row {0} is not strictly positive")]
    StrictRow(usize),
}

impl ArbitrageCertificate {
    /// Re-validates the certificate from scratch.
    pub fn verify(
        &self,
        market: &ValidatedMarket,
        ord: &OrderStructure,
    ) -> Result<(), CertificateCheckError> {
        if !market.is_net_trade(&self.coefficients, &self.payoff) {
            return Err(CertificateCheckError::NotANetTrade);
        }
        if classify(&self.relevant, ord) != Classification::Positive {
            return Err(CertificateCheckError::NotRelevant);
        }
        if !dominates(&self.relevant, &self.payoff, ord) {
            return Err(CertificateCheckError::NotDominating);
        }
        let lp = ord.apply(&self.payoff);
        for &k in &self.strict_rows {
            if !lp.get(k).is_some_and(|v| v.is_positive()) {
                return Err(CertificateCheckError::StrictRow(k));
            }
        }
        Ok(())
    }

    /// The same trade scaled by a positive factor.
    pub fn scaled(&self, factor: &Rational) -> ArbitrageCertificate {
        ArbitrageCertificate {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
            payoff: self.payoff.scale(factor),
            relevant: self.relevant.scale(factor),
            relevance_index: self.relevance_index,
            strict_rows: self.strict_rows.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArbitrageError {
    #[error(transparent)]
    OrderUnsupported(#[from] OrderUnsupported),
}

/// Net-trade generators seen through the test matrix: `lifted[i][k] = (L g_i)_k`.
pub(crate) fn lifted_generators(
    market: &ValidatedMarket,
    ord: &OrderStructure,
) -> Vec<Vec<Rational>> {
    market
        .generators()
        .iter()
        .map(|g| ord.apply(&g.payoff))
        .collect()
}

/// Adds `Σ_i θ_i lifted[i][k] + extra_k ≥ rhs_k` for every row `k`, with θ
/// occupying columns `theta_cols`.
fn add_row_constraints(
    prog: &mut LinearProgram,
    lifted: &[&Vec<Rational>],
    theta_cols: &[usize],
    extra: impl Fn(usize) -> Vec<(usize, Rational)>,
    rhs: impl Fn(usize) -> Rational,
    rows: usize,
) {
    for k in 0..rows {
        let mut coeffs: Vec<(usize, Rational)> = lifted
            .iter()
            .zip(theta_cols)
            .filter(|(g, _)| !g[k].is_zero())
            .map(|(g, &c)| (c, g[k].clone()))
            .collect();
        coeffs.extend(extra(k));
        prog.add_sparse_constraint(&coeffs, RowSense::Ge, rhs(k));
    }
}

/// Largest-support net trade among the generators `indices` that satisfies
/// `L ℓ ≥ L(s·g)` for a fixed relevant `g` and `s = 1` (or `g = 0`).
/// Returns the coefficients over `indices` when the maximal support is nonempty.
fn maximal_support_trade(
    market: &ValidatedMarket,
    lifted: &[Vec<Rational>],
    indices: &[usize],
    target: Option<&[Rational]>,
    rows: usize,
) -> Option<Vec<Rational>> {
    let m = indices.len();
    // Columns: θ (m), then w (rows) with 0 ≤ w_k ≤ 1 and w_k ≤ (Lℓ)_k.
    let mut prog = LinearProgram::new(Direction::Maximize, m + rows);
    for j in 0..m {
        prog.set_bound(j, market.coefficient_bound());
    }
    for k in 0..rows {
        prog.set_bound(m + k, VarBound::between(Rational::zero(), Rational::one()));
        prog.set_objective(m + k, Rational::one());
    }
    let sub: Vec<&Vec<Rational>> = indices.iter().map(|&i| &lifted[i]).collect();
    let theta_cols: Vec<usize> = (0..m).collect();
    add_row_constraints(
        &mut prog,
        &sub,
        &theta_cols,
        |_| Vec::new(),
        |k| target.map_or(Rational::zero(), |t| t[k].clone()),
        rows,
    );
    add_row_constraints(
        &mut prog,
        &sub,
        &theta_cols,
        |k| vec![(m + k, -Rational::one())],
        |_| Rational::zero(),
        rows,
    );
    let sol = lp::solve(&prog).ok()?.into_optimal()?;
    if sol.value.is_zero() {
        return None;
    }
    Some(sol.primal[..m].to_vec())
}

fn certificate_for_generator(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    lifted: &[Vec<Rational>],
    index: usize,
    g: &Payoff,
) -> Option<ArbitrageCertificate> {
    let rows = ord.num_rows();
    let lg = ord.apply(g);
    let all: Vec<usize> = (0..lifted.len()).collect();
    // max s ∈ [0, 1] with L(ℓ − s g) ≥ 0.
    let n = all.len();
    let mut prog = LinearProgram::new(Direction::Maximize, n + 1);
    for j in 0..n {
        prog.set_bound(j, market.coefficient_bound());
    }
    prog.set_bound(n, VarBound::between(Rational::zero(), Rational::one()));
    prog.set_objective(n, Rational::one());
    let refs: Vec<&Vec<Rational>> = lifted.iter().collect();
    add_row_constraints(
        &mut prog,
        &refs,
        &all,
        |k| {
            if lg[k].is_zero() {
                Vec::new()
            } else {
                vec![(n, -&lg[k])]
            }
        },
        |_| Rational::zero(),
        rows,
    );
    let s = lp::solve(&prog).ok()?.into_optimal()?.value;
    if s.is_zero() {
        return None;
    }
    let theta = maximal_support_trade(market, lifted, &all, Some(&lg), rows)
        .expect("a trade dominating g exists once s > 0");
    let payoff = market.gains(&theta);
    let lp = ord.apply(&payoff);
    Some(ArbitrageCertificate {
        coefficients: theta,
        payoff,
        relevant: g.clone(),
        relevance_index: Some(index),
        strict_rows: (0..rows).filter(|&k| lp[k].is_positive()).collect(),
    })
}

/// Preset relevance generators among claims observable at the horizon.
pub fn market_relevance(
    market: &ValidatedMarket,
    preset: RelevancePreset,
    ord: &OrderStructure,
) -> RelevanceSpec {
    measurable_relevance(preset, ord, market.filtration().terminal().cells())
}

/// Searches for a net trade dominating some relevance generator; the
/// certificate of the lowest-index generator that admits one is returned.
pub fn find_arbitrage(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    rel: &RelevanceSpec,
) -> Option<ArbitrageCertificate> {
    let lifted = lifted_generators(market, ord);
    rel.generators
        .par_iter()
        .enumerate()
        .find_map_first(|(i, g)| certificate_for_generator(market, ord, &lifted, i, g))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneStepArbitrage {
    pub time: usize,
    /// The position `h`, measurable at the start of the period.
    pub holdings: Vec<Holding>,
    pub certificate: ArbitrageCertificate,
}

/// Looks for an arbitrage among single-period strategies, earliest period first.
/// Relevance is the default one: any claim positive at a non-polar state.
pub fn find_one_step_arbitrage(
    market: &ValidatedMarket,
    ord: &OrderStructure,
) -> Result<Option<OneStepArbitrage>, ArbitrageError> {
    ord.require_state_based("one-step arbitrage search")?;
    let lifted = lifted_generators(market, ord);
    let rows = ord.num_rows();
    let support = ord.support_states();
    for t in 1..=market.horizon() {
        let indices = market.step_generators(t);
        if indices.is_empty() {
            continue;
        }
        let Some(theta) = maximal_support_trade(market, &lifted, &indices, None, rows) else {
            continue;
        };
        let mut coefficients = vec![Rational::zero(); lifted.len()];
        for (&i, v) in indices.iter().zip(theta) {
            coefficients[i] = v;
        }
        let payoff = market.gains(&coefficients);
        let lp = ord.apply(&payoff);
        let strict_rows: Vec<usize> = (0..rows).filter(|&k| lp[k].is_positive()).collect();
        let k = strict_rows[0];
        let state = support[k];
        let terminal = market.filtration().terminal();
        let cell = &terminal.cells()[terminal.cell_of(state)];
        let relevant = Payoff::indicator(market.num_states(), cell).scale(&payoff[state]);
        // Position of the cell among the default relevance generators.
        let polar = ord.polar_mask();
        let relevance_index = terminal.cells()[..terminal.cell_of(state)]
            .iter()
            .filter(|c| c.iter().any(|&s| !polar[s]))
            .count();
        return Ok(Some(OneStepArbitrage {
            time: t,
            holdings: market.holdings(&coefficients),
            certificate: ArbitrageCertificate {
                coefficients,
                payoff,
                relevant,
                relevance_index: Some(relevance_index),
                strict_rows,
            },
        }));
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NflvrVerdict {
    StronglyFree,
    FreeLunch { certificate: ArbitrageCertificate },
}

/// Result that backs a no-free-lunch verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    /// Negligibles form a lattice, so super-replication prices are attained and
    /// free lunches reduce to arbitrages.
    LatticeAttainment,
    /// The order cone is polyhedral, so the set of super-replicable claims is
    /// closed without any lattice property.
    PolyhedralClosedness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NflvrReport {
    pub verdict: NflvrVerdict,
    pub justification: Justification,
    /// Super-replication price of each relevance generator; `None` means unbounded below.
    pub generator_prices: Vec<Option<Rational>>,
    /// Whether "every relevance generator has a positive price" agrees with the verdict.
    pub consistent: bool,
}

/// No-free-lunch check. On a finite state space free lunches with vanishing
/// risk are arbitrages, so the verdict is the arbitrage search; it is
/// cross-checked against the super-replication prices of the relevance generators.
pub fn check_nflvr(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    rel: &RelevanceSpec,
) -> NflvrReport {
    let verdict = match find_arbitrage(market, ord, rel) {
        Some(certificate) => NflvrVerdict::FreeLunch { certificate },
        None => NflvrVerdict::StronglyFree,
    };
    let generator_prices: Vec<Option<Rational>> = rel
        .generators
        .par_iter()
        .map(|g| match superhedge_price(market, ord, g) {
            Ok(cert) => Some(cert.price),
            Err(SuperhedgeError::UnboundedBelow(_)) => None,
            Err(e) => panic!("relevance generators are valid payoffs: {e}"),
        })
        .collect();
    let all_positive = generator_prices
        .iter()
        .all(|p| p.as_ref().is_some_and(|v| v.is_positive()));
    let consistent = all_positive == (verdict == NflvrVerdict::StronglyFree);
    NflvrReport {
        verdict,
        justification: if ord.is_state_based() {
            Justification::LatticeAttainment
        } else {
            Justification::PolyhedralClosedness
        },
        generator_prices,
        consistent,
    }
}
