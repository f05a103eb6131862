//! Scenario support of martingale measures: which states of a set `A` some
//! martingale measure living on `A` can charge, found by stripping one-point
//! arbitrages period by period from the last date backwards.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arbitrage::{find_arbitrage, market_relevance, ArbitrageCertificate};
use crate::lp::{self, Direction, LinearProgram, LpOutcome, RowSense, VarBound};
use crate::market::{ConeMode, MarketError, Payoff, ValidatedMarket};
use crate::order::{classify, Classification, OrderStructure, OrderUnsupported, RelevancePreset};
use crate::polytope::MartingalePolytope;
use crate::rational::Rational;
use crate::superhedge::{superhedge_price, SuperhedgeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupportError {
    #[error(transparent)]
    OrderUnsupported(#[from] OrderUnsupported),
    #[error("no martingale measure lives on the given set")]
    EmptySupport,
    #[error("the market admits an arbitrage")]
    ArbitragePresent(Box<ArbitrageCertificate>),
    #[error("Z must be negligible and nonpositive")]
    BadZ,
    #[error("R must be positive in the order")]
    BadR,
    #[error("state index {0} is out of range")]
    UnknownState(usize),
    #[error(transparent)]
    Payoff(#[from] MarketError),
}

/// One stripped cell: a one-step gain that is nonnegative on what remained
/// and strictly positive exactly on `cell`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitStep {
    pub coefficients: Vec<Rational>,
    pub payoff: Payoff,
    pub cell: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Splitting {
    pub time: usize,
    pub input: Vec<usize>,
    pub steps: Vec<SplitStep>,
    /// States left over once no one-point arbitrage remains.
    pub residual: Vec<usize>,
}

impl Splitting {
    pub fn beta(&self) -> usize {
        self.steps.len()
    }

    /// Checks that the cells partition the input and every gain has the
    /// required sign pattern.
    pub fn is_sound(&self, market: &ValidatedMarket) -> bool {
        let mut all: Vec<usize> = self.residual.clone();
        for s in &self.steps {
            all.extend(&s.cell);
        }
        all.sort_unstable();
        let mut input = self.input.clone();
        input.sort_unstable();
        if all != input {
            return false;
        }
        let step_gens = market.step_generators(self.time);
        let mut remaining = input;
        for step in &self.steps {
            let only_this_step = step
                .coefficients
                .iter()
                .enumerate()
                .all(|(i, c)| c.is_zero() || step_gens.contains(&i));
            if !only_this_step || !market.is_net_trade(&step.coefficients, &step.payoff) {
                return false;
            }
            for &s in &remaining {
                let v = &step.payoff[s];
                if v.is_negative() || (v.is_positive() != step.cell.contains(&s)) {
                    return false;
                }
            }
            remaining.retain(|s| !step.cell.contains(s));
        }
        true
    }
}

/// Repeatedly strips the maximal set of states on which some date-`t`
/// one-step gain is strictly positive while staying nonnegative on the rest.
pub fn conditional_splitting(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    t: usize,
    gamma: &[usize],
) -> Result<Splitting, SupportError> {
    ord.require_state_based("conditional splitting")?;
    check_states(market, gamma)?;
    Ok(split(market, t, gamma))
}

fn check_states(market: &ValidatedMarket, set: &[usize]) -> Result<(), SupportError> {
    match set.iter().find(|&&s| s >= market.num_states()) {
        Some(&s) => Err(SupportError::UnknownState(s)),
        None => Ok(()),
    }
}

fn split(market: &ValidatedMarket, t: usize, gamma: &[usize]) -> Splitting {
    let gens = market.step_generators(t);
    let mut remaining: Vec<usize> = gamma.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    let input = remaining.clone();
    let mut steps = Vec::new();
    while !remaining.is_empty() && !gens.is_empty() {
        let Some(coefficients) = strip_once(market, &gens, &remaining) else {
            break;
        };
        let payoff = market.gains(&coefficients);
        let cell: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&s| payoff[s].is_positive())
            .collect();
        remaining.retain(|s| !cell.contains(s));
        steps.push(SplitStep {
            coefficients,
            payoff,
            cell,
        });
    }
    Splitting {
        time: t,
        input,
        steps,
        residual: remaining,
    }
}

// Max Σ w_s, 0 ≤ w_s ≤ 1, w_s ≤ ℓ(s), ℓ(s) ≥ 0 on `remaining`, ℓ a date-t gain.
fn strip_once(
    market: &ValidatedMarket,
    gens: &[usize],
    remaining: &[usize],
) -> Option<Vec<Rational>> {
    let m = gens.len();
    let r = remaining.len();
    let mut prog = LinearProgram::new(Direction::Maximize, m + r);
    for j in 0..m {
        prog.set_bound(j, market.coefficient_bound());
    }
    for k in 0..r {
        prog.set_bound(m + k, VarBound::between(Rational::zero(), Rational::one()));
        prog.set_objective(m + k, Rational::one());
    }
    let generators = market.generators();
    for (k, &s) in remaining.iter().enumerate() {
        let terms: Vec<(usize, Rational)> = gens
            .iter()
            .enumerate()
            .filter(|(_, &g)| !generators[g].payoff[s].is_zero())
            .map(|(j, &g)| (j, generators[g].payoff[s].clone()))
            .collect();
        prog.add_sparse_constraint(&terms, RowSense::Ge, Rational::zero());
        let mut with_w = terms;
        with_w.push((m + k, -Rational::one()));
        prog.add_sparse_constraint(&with_w, RowSense::Ge, Rational::zero());
    }
    let sol = lp::solve(&prog).ok()?.into_optimal()?;
    if sol.value.is_zero() {
        return None;
    }
    let mut coefficients = vec![Rational::zero(); generators.len()];
    for (j, &g) in gens.iter().enumerate() {
        coefficients[g] = sol.primal[j].clone();
    }
    Some(coefficients)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateCharge {
    pub state: usize,
    /// Largest mass a martingale measure living on the input set puts here.
    pub max_mass: Rational,
    pub measure: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportResult {
    pub input: Vec<usize>,
    /// States surviving the backward recursion.
    pub support: Vec<usize>,
    /// Splitting records, last date first.
    pub records: Vec<Splitting>,
    /// Independent per-state charging programs.
    pub charges: Vec<StateCharge>,
    /// Whether the recursion and the charging programs select the same states.
    pub agrees: bool,
    pub warnings: Vec<String>,
}

/// Backward recursion only: `A_T = A`, `A_{t-1} = A_t` minus the stripped cells.
pub fn support_recursion(market: &ValidatedMarket, set: &[usize]) -> (Vec<usize>, Vec<Splitting>) {
    let mut current: Vec<usize> = set.to_vec();
    current.sort_unstable();
    current.dedup();
    let mut records = Vec::new();
    for t in (1..=market.horizon()).rev() {
        let record = split(market, t, &current);
        current = record.residual.clone();
        records.push(record);
    }
    (current, records)
}

/// States of `set` charged by some martingale measure supported in `set`.
pub fn charged_states(market: &ValidatedMarket, set: &[usize]) -> Vec<StateCharge> {
    let poly = MartingalePolytope::supported_on(market, set);
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted
        .par_iter()
        .map(|&state| match poly.max_state_mass(state) {
            Some(p) => StateCharge {
                state,
                max_mass: p.value,
                measure: Some(p.measure),
            },
            None => StateCharge {
                state,
                max_mass: Rational::zero(),
                measure: None,
            },
        })
        .collect()
}

pub fn support_set(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    set: &[usize],
) -> Result<SupportResult, SupportError> {
    ord.require_state_based("support set")?;
    check_states(market, set)?;
    let (support, records) = support_recursion(market, set);
    let charges = charged_states(market, set);
    let charged: Vec<usize> = charges
        .iter()
        .filter(|c| c.max_mass.is_positive())
        .map(|c| c.state)
        .collect();
    let mut warnings = Vec::new();
    if market.mode() == ConeMode::Linear && !market.has_explicit_generators() {
        let j = market.assets().len();
        for r in &records {
            if r.beta() > j {
                warnings.push(format!(
                    "date {} needed {} splitting steps, more than the {} assets",
                    r.time,
                    r.beta(),
                    j
                ));
            }
        }
    }
    let mut input = set.to_vec();
    input.sort_unstable();
    input.dedup();
    Ok(SupportResult {
        input,
        agrees: charged == support,
        support,
        records,
        charges,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetHedge {
    pub support: Vec<usize>,
    /// Cheapest `c` with `c + ℓ ≥ g` on the support.
    pub price: Rational,
    pub coefficients: Vec<Rational>,
    /// `sup E_Q[g]` over martingale measures living on the support.
    pub dual_price: Rational,
    pub measure: Vec<Rational>,
}

/// Super-replication of `claim` on the scenario support of `set`.
pub fn superhedge_on_set(
    market: &ValidatedMarket,
    claim: &[Rational],
    set: &[usize],
) -> Result<SetHedge, SupportError> {
    market.check_payoff(&Payoff(claim.to_vec()), "claim")?;
    check_states(market, set)?;
    let (support, _) = support_recursion(market, set);
    if support.is_empty() {
        return Err(SupportError::EmptySupport);
    }
    let generators = market.generators();
    let n = generators.len();
    let mut prog = LinearProgram::new(Direction::Minimize, n + 1);
    prog.set_bound(0, VarBound::free());
    prog.set_objective(0, Rational::one());
    for j in 0..n {
        prog.set_bound(j + 1, market.coefficient_bound());
    }
    for &s in &support {
        let mut terms = vec![(0, Rational::one())];
        for (j, g) in generators.iter().enumerate() {
            if !g.payoff[s].is_zero() {
                terms.push((j + 1, g.payoff[s].clone()));
            }
        }
        prog.add_sparse_constraint(&terms, RowSense::Ge, claim[s].clone());
    }
    let sol = match lp::solve(&prog).expect("well formed") {
        LpOutcome::Optimal(sol) => sol,
        _ => return Err(SupportError::EmptySupport),
    };
    let dual = MartingalePolytope::supported_on(market, &support)
        .maximize(claim)
        .ok_or(SupportError::EmptySupport)?;
    Ok(SetHedge {
        support,
        price: sol.value,
        coefficients: sol.primal[1..].to_vec(),
        dual_price: dual.value,
        measure: dual.measure,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    /// `D(X)` under the order.
    pub price: Rational,
    pub residual: Payoff,
    /// `{Z = 0}`.
    pub zero_set: Vec<usize>,
    /// Scenario support of `{Z = 0}`.
    pub support: Vec<usize>,
    /// Super-replication price on the support.
    pub set_price: Rational,
    /// `sup E_Q[X]` over martingale measures living on the support.
    pub dual_price: Rational,
    pub equal: bool,
}

/// Reduces the order-based price to an ordinary super-replication problem on
/// the states where the hedge residual vanishes, and checks that the order
/// price, the restricted price and the restricted dual value coincide.
pub fn technical_reduction(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    claim: &[Rational],
) -> Result<ReductionReport, SupportError> {
    ord.require_state_based("price reduction")?;
    let rel = market_relevance(market, RelevancePreset::Rop, ord);
    if let Some(cert) = find_arbitrage(market, ord, &rel) {
        return Err(SupportError::ArbitragePresent(Box::new(cert)));
    }
    let cert = superhedge_price(market, ord, claim).map_err(|e| match e {
        SuperhedgeError::UnboundedBelow(c) => SupportError::ArbitragePresent(c),
        SuperhedgeError::Payoff(p) => SupportError::Payoff(p),
    })?;
    let residual = cert.residual.expect("state-based orders carry a residual");
    let zero_set = residual.zero_states();
    let hedge = superhedge_on_set(market, claim, &zero_set)?;
    let equal = cert.price == hedge.price && hedge.price == hedge.dual_price;
    Ok(ReductionReport {
        price: cert.price,
        residual,
        zero_set,
        support: hedge.support,
        set_price: hedge.price,
        dual_price: hedge.dual_price,
        equal,
    })
}

/// A martingale measure living on `{Z = 0}` that charges `R`, if one exists.
pub fn ftap_certificates(
    market: &ValidatedMarket,
    ord: &OrderStructure,
    z: &[Rational],
    r: &[Rational],
) -> Result<Option<Vec<Rational>>, SupportError> {
    ord.require_state_based("pricing-measure certificates")?;
    let n = market.num_states();
    if z.len() != n
        || z.iter().any(|v| v.is_positive())
        || classify(z, ord) != Classification::Negligible
    {
        return Err(SupportError::BadZ);
    }
    if r.len() != n || classify(r, ord) != Classification::Positive {
        return Err(SupportError::BadR);
    }
    let zero_set: Vec<usize> = (0..n).filter(|&s| z[s].is_zero()).collect();
    let poly = MartingalePolytope::supported_on(market, &zero_set);
    Ok(poly
        .maximize(r)
        .filter(|p| p.value.is_positive())
        .map(|p| p.measure))
}

/// A state and the pricing measure charging it, if one exists.
pub type StateCertificate = (usize, Option<Vec<Rational>>);

/// Runs [`ftap_certificates`] with `Z = −1_polar` and `R` each Dirac on a
/// non-polar state; the market is arbitrage free iff every pair has a measure.
pub fn ftap_battery(
    market: &ValidatedMarket,
    ord: &OrderStructure,
) -> Result<Vec<StateCertificate>, SupportError> {
    ord.require_state_based("pricing-measure certificates")?;
    let n = market.num_states();
    let z: Vec<Rational> = ord
        .polar_mask()
        .iter()
        .map(|&p| {
            if p {
                -Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    ord.support_states()
        .into_iter()
        .map(|s| Ok((s, ftap_certificates(market, ord, &z, &Payoff::dirac(n, s))?)))
        .collect()
}
