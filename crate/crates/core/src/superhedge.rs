//! Super-replication prices, their dual representation over the martingale
//! polytope, and the full-support (viability) check.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arbitrage::{lifted_generators, ArbitrageCertificate};
use crate::lp::{self, Direction, LinearProgram, LpOutcome, RowSense, VarBound};
use crate::market::{Holding, MarketError, Payoff, ValidatedMarket};
use crate::order::{classify, Classification, OrderStructure, RelevanceSpec};
use crate::polytope::{martingale_polytope, MartingalePolytope, PolytopeError};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuperhedgeError {
    #[error("super-replication price is unbounded below; the market admits an arbitrage")]
    UnboundedBelow(Box<ArbitrageCertificate>),
    #[error(transparent)]
    Payoff(#[from] MarketError),
}

/// Cheapest super-replication of a claim, with the strategy that attains it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HedgeCertificate {
    pub price: Rational,
    /// Weights on the net-trade generators.
    pub coefficients: Vec<Rational>,
    pub holdings: Vec<Holding>,
    /// `price + ℓ − X`, nonnegative in the order.
    pub surplus: Payoff,
    /// `min(surplus, 0)`: a nonpositive negligible claim with
    /// `price + ℓ ≥ X + residual` state by state. Only defined for state-based orders.
    pub residual: Option<Payoff>,
    /// Martingale functional read off the optimal dual; it prices `X` at `price`.
    pub pricing_measure: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HedgeCheckError {
    #[error("surplus does not equal price + gains − claim")]
    Surplus,
    #[error("surplus is not nonnegative in the order")]
    NotSuperReplicating,
    #[error("residual is not a nonpositive negligible claim")]
    Residual,
    #[error("pointwise inequality price + gains ≥ claim + residual fails")]
    Pointwise,
}

impl HedgeCertificate {
    pub fn verify(
        &self,
        market: &ValidatedMarket,
        ord: &OrderStructure,
        claim: &[Rational],
    ) -> Result<(), HedgeCheckError> {
        let gains = market.gains(&self.coefficients);
        let expected: Vec<Rational> = gains
            .iter()
            .zip(claim)
            .map(|(l, x)| &(&self.price + l) - x)
            .collect();
        if expected != self.surplus.0 {
            return Err(HedgeCheckError::Surplus);
        }
        if !ord.is_nonnegative(&self.surplus) {
            return Err(HedgeCheckError::NotSuperReplicating);
        }
        if let Some(z) = &self.residual {
            if z.iter().any(|v| v.is_positive()) || classify(z, ord) != Classification::Negligible {
                return Err(HedgeCheckError::Residual);
            }
            if self.surplus.iter().zip(z.iter()).any(|(s, z)| s < z) {
                return Err(HedgeCheckError::Pointwise);
            }
        }
        Ok(())
    }
}

/// LP: minimise `c` subject to `L(c·1 + Σθ_i g_i − X) ≥ 0`.
fn hedge_program(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    lifted: &[Vec<Rational>],
    claim: &[Rational],
) -> LinearProgram {
    let n = lifted.len();
    let mut prog = LinearProgram::new(Direction::Minimize, n + 1);
    prog.set_bound(0, VarBound::free());
    prog.set_objective(0, Rational::one());
    for j in 0..n {
        prog.set_bound(j + 1, market.coefficient_bound());
    }
    let lx = ord.apply(claim);
    let mass = ord.apply(&Payoff::constant(claim.len(), Rational::one()));
    for k in 0..ord.num_rows() {
        let mut terms = vec![(0, mass[k].clone())];
        for (j, g) in lifted.iter().enumerate() {
            if !g[k].is_zero() {
                terms.push((j + 1, g[k].clone()));
            }
        }
        prog.add_sparse_constraint(&terms, RowSense::Ge, lx[k].clone());
    }
    prog
}

/// Super-replication price `D(X)` with an attaining strategy.
pub fn superhedge_price(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    claim: &[Rational],
) -> Result<HedgeCertificate, SuperhedgeError> {
    market.check_payoff(&Payoff(claim.to_vec()), "claim")?;
    let lifted = lifted_generators(market, ord);
    let prog = hedge_program(market, ord, &lifted, claim);
    match lp::solve(&prog).expect("hedge program is well formed") {
        LpOutcome::Optimal(sol) => {
            let price = sol.value.clone();
            let coefficients = sol.primal[1..].to_vec();
            let gains = market.gains(&coefficients);
            let surplus = Payoff(
                gains
                    .iter()
                    .zip(claim)
                    .map(|(l, x)| &(&price + l) - x)
                    .collect(),
            );
            let residual = ord.is_state_based().then(|| {
                Payoff(
                    surplus
                        .iter()
                        .map(|v| Rational::min_of(v, &Rational::zero()))
                        .collect(),
                )
            });
            let weights: Vec<Rational> = sol.dual.clone();
            let mut pricing_measure = vec![Rational::zero(); claim.len()];
            for (w, row) in weights.iter().zip(ord.test_matrix()) {
                for (acc, v) in pricing_measure.iter_mut().zip(row) {
                    *acc += w * v;
                }
            }
            Ok(HedgeCertificate {
                price,
                holdings: market.holdings(&coefficients),
                coefficients,
                surplus,
                residual,
                pricing_measure,
            })
        }
        LpOutcome::Unbounded(ray) => {
            // Along the ray c falls while L(Δc·1 + ℓ) stays ≥ 0, so ℓ ≥ −Δc·1.
            let dc = &ray.direction[0];
            let coefficients = ray.direction[1..].to_vec();
            let payoff = market.gains(&coefficients);
            let relevant = Payoff::constant(claim.len(), -dc);
            let lp = ord.apply(&payoff);
            let certificate = ArbitrageCertificate {
                coefficients,
                payoff,
                relevant,
                relevance_index: None,
                strict_rows: (0..lp.len()).filter(|&k| lp[k].is_positive()).collect(),
            };
            Err(SuperhedgeError::UnboundedBelow(Box::new(certificate)))
        }
        LpOutcome::Infeasible => unreachable!("a large enough constant always super-replicates"),
    }
}

/// `sup q·X` over the martingale polytope.
pub fn sublinear_expectation(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    claim: &[Rational],
) -> Result<Rational, PolytopeError> {
    martingale_polytope(market, ord)
        .maximize(claim)
        .map(|p| p.value)
        .ok_or(PolytopeError::EmptyPolytope)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorCharge {
    pub index: usize,
    /// `max q·g` over the polytope; `None` when the polytope is empty.
    pub max_value: Option<Rational>,
    pub witness: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowCharge {
    pub row: usize,
    /// Largest weight on this prior in a decomposition `q = Σ λ_k P_k`.
    pub max_weight: Option<Rational>,
    pub witness: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViabilityReport {
    pub polytope_empty: bool,
    pub generators: Vec<GeneratorCharge>,
    /// Expectation orders only.
    pub rows: Option<Vec<RowCharge>>,
    /// False when the relevance generators are only a sufficient test.
    pub exact: bool,
    pub passes: bool,
}

/// Checks that every relevance generator is charged by some element of the
/// martingale polytope.
pub fn full_support_check(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    rel: &RelevanceSpec,
) -> ViabilityReport {
    let poly = martingale_polytope(market, ord);
    full_support_on(&poly, ord, rel)
}

pub(crate) fn full_support_on(
    poly: &MartingalePolytope,
    ord: &OrderStructure,
    rel: &RelevanceSpec,
) -> ViabilityReport {
    let polytope_empty = poly.is_empty();
    let generators: Vec<GeneratorCharge> = if polytope_empty {
        (0..rel.generators.len())
            .map(|index| GeneratorCharge {
                index,
                max_value: None,
                witness: None,
            })
            .collect()
    } else {
        rel.generators
            .par_iter()
            .enumerate()
            .map(|(index, g)| {
                let p = poly.maximize(g).expect("polytope is nonempty");
                GeneratorCharge {
                    index,
                    max_value: Some(p.value),
                    witness: Some(p.measure),
                }
            })
            .collect()
    };
    let rows = (!ord.is_state_based()).then(|| {
        (0..ord.num_rows())
            .into_par_iter()
            .map(|row| match poly.max_row_weight(row) {
                Some(p) => RowCharge {
                    row,
                    max_weight: Some(p.value),
                    witness: Some(p.measure),
                },
                None => RowCharge {
                    row,
                    max_weight: None,
                    witness: None,
                },
            })
            .collect()
    });
    let passes = !polytope_empty
        && generators
            .iter()
            .all(|g| g.max_value.as_ref().is_some_and(|v| v.is_positive()));
    ViabilityReport {
        polytope_empty,
        generators,
        rows,
        exact: rel.exact,
        passes,
    }
}
