//! Finite market model: states, filtration, adapted prices and the cone of
//! net trades generated by one-step gains.

use std::collections::HashMap;
use std::ops::Deref;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::VarBound;
use crate::rational::Rational;

/// A contingent claim: one value per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Payoff(pub Vec<Rational>);

impl Deref for Payoff {
    type Target = [Rational];
    fn deref(&self) -> &[Rational] {
        &self.0
    }
}

impl From<Vec<Rational>> for Payoff {
    fn from(v: Vec<Rational>) -> Self {
        Payoff(v)
    }
}

impl Payoff {
    pub fn zeros(n: usize) -> Self {
        Payoff(vec![Rational::zero(); n])
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Payoff(vec![c; n])
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Payoff(values.iter().map(|&v| Rational::integer(v)).collect())
    }

    pub fn dirac(n: usize, state: usize) -> Self {
        let mut p = Self::zeros(n);
        p.0[state] = Rational::integer(1);
        p
    }

    pub fn indicator(n: usize, states: &[usize]) -> Self {
        let mut p = Self::zeros(n);
        for &s in states {
            p.0[s] = Rational::integer(1);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &Payoff) -> Payoff {
        Payoff(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Payoff) -> Payoff {
        Payoff(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, factor: &Rational) -> Payoff {
        Payoff(self.0.iter().map(|a| a * factor).collect())
    }

    pub fn shift(&self, c: &Rational) -> Payoff {
        Payoff(self.0.iter().map(|a| a + c).collect())
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Payoff) -> Payoff {
        Payoff(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    pub fn min(&self, other: &Payoff) -> Payoff {
        Payoff(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| Rational::min_of(a, b))
                .collect(),
        )
    }

    pub fn max(&self, other: &Payoff) -> Payoff {
        Payoff(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| Rational::max_of(a, b))
                .collect(),
        )
    }

    /// `min(X, 0)`.
    pub fn negative_part(&self) -> Payoff {
        self.min(&Payoff::zeros(self.len()))
    }

    pub fn dot(&self, weights: &[Rational]) -> Rational {
        crate::rational::dot(&self.0, weights)
    }

    /// States where the payoff is strictly positive.
    pub fn positive_states(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.0[i].is_positive())
            .collect()
    }

    pub fn zero_states(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.0[i].is_zero()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("the state space is empty")]
    EmptyStateSpace,
    #[error("duplicate state label {0:?}")]
    DuplicateState(String),
    #[error("the filtration needs at least two dates (found {0})")]
    NoTradingPeriod(usize),
    #[error("partition at time {time} is invalid: {reason}")]
    InvalidPartition { time: usize, reason: String },
    #[error("partition at time {0} does not refine the partition at time {prev}", prev = .0 - 1)]
    RefinementError(usize),
    #[error("price array has the wrong shape: {0}")]
    PriceShape(String),
    #[error("price of asset {asset} at time {time} differs inside cell {cell:?}")]
    AdaptednessError {
        time: usize,
        asset: usize,
        cell: Vec<usize>,
    },
    #[error("negative price {value} for asset {asset} at time {time} in state {state}")]
    NegativePriceError {
        time: usize,
        asset: usize,
        state: usize,
        value: Rational,
    },
    #[error("{what} is not measurable with respect to the terminal partition")]
    MeasurabilityError { what: String },
    #[error("{what} has length {found}, expected {expected}")]
    LengthMismatch {
        what: String,
        found: usize,
        expected: usize,
    },
    #[error("unknown asset index {0}")]
    UnknownAsset(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Result<Self, MarketError> {
        if labels.is_empty() {
            return Err(MarketError::EmptyStateSpace);
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(MarketError::DuplicateState(l.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl Partition {
    fn new(time: usize, mut cells: Vec<Vec<usize>>, n: usize) -> Result<Self, MarketError> {
        let mut cell_of = vec![usize::MAX; n];
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.is_empty() {
                return Err(MarketError::InvalidPartition {
                    time,
                    reason: format!("cell {c} is empty"),
                });
            }
            cell.sort_unstable();
            for &s in cell.iter() {
                if s >= n {
                    return Err(MarketError::InvalidPartition {
                        time,
                        reason: format!("state index {s} out of range"),
                    });
                }
                if cell_of[s] != usize::MAX {
                    return Err(MarketError::InvalidPartition {
                        time,
                        reason: format!("state {s} appears in two cells"),
                    });
                }
                cell_of[s] = c;
            }
        }
        if let Some(s) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(MarketError::InvalidPartition {
                time,
                reason: format!("state {s} is not covered"),
            });
        }
        Ok(Self { cells, cell_of })
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_of(&self, state: usize) -> usize {
        self.cell_of[state]
    }

    pub fn is_discrete(&self) -> bool {
        self.cells.iter().all(|c| c.len() == 1)
    }

    /// Whether every cell of `self` lies inside a single cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.cells.iter().all(|cell| {
            cell.iter()
                .all(|&s| coarser.cell_of(s) == coarser.cell_of(cell[0]))
        })
    }

    pub fn is_constant_on_cells(&self, values: &[Rational]) -> bool {
        self.cells
            .iter()
            .all(|cell| cell.iter().all(|&s| values[s] == values[cell[0]]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    partitions: Vec<Partition>,
}

impl Filtration {
    pub fn new(partitions: Vec<Vec<Vec<usize>>>, n: usize) -> Result<Self, MarketError> {
        if partitions.len() < 2 {
            return Err(MarketError::NoTradingPeriod(partitions.len()));
        }
        let parts = partitions
            .into_iter()
            .enumerate()
            .map(|(t, cells)| Partition::new(t, cells, n))
            .collect::<Result<Vec<_>, _>>()?;
        for t in 1..parts.len() {
            if !parts[t].refines(&parts[t - 1]) {
                return Err(MarketError::RefinementError(t));
            }
        }
        Ok(Self { partitions: parts })
    }

    /// Number of trading periods T.
    pub fn horizon(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn at(&self, t: usize) -> &Partition {
        &self.partitions[t]
    }

    pub fn terminal(&self) -> &Partition {
        self.partitions.last().unwrap()
    }
}

/// Discounted prices indexed `[time][asset][state]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceProcess {
    values: Vec<Vec<Vec<Rational>>>,
}

impl PriceProcess {
    pub fn at(&self, t: usize, asset: usize) -> &[Rational] {
        &self.values[t][asset]
    }

    pub fn num_assets(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn increment(&self, t: usize, asset: usize) -> Vec<Rational> {
        self.values[t][asset]
            .iter()
            .zip(&self.values[t - 1][asset])
            .map(|(a, b)| a - b)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeMode {
    /// Net trades are all real combinations of the generators.
    Linear,
    /// Net trades are nonnegative combinations of the generators.
    Cone,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSpec {
    pub mode: ConeMode,
    /// User-supplied payoff generators. When absent they are derived from the
    /// price process.
    pub generators: Option<Vec<Vec<Rational>>>,
    /// In `Cone` mode with derived generators: assets that cannot be sold short.
    pub long_only: Vec<usize>,
}

impl ConeSpec {
    pub fn linear() -> Self {
        Self {
            mode: ConeMode::Linear,
            generators: None,
            long_only: Vec::new(),
        }
    }
}

/// Input to [`validate_market`]; states and cells are referred to by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketSpec {
    pub states: Vec<String>,
    pub filtration: Vec<Vec<Vec<usize>>>,
    pub assets: Vec<String>,
    /// `[time][asset][state]`.
    pub prices: Vec<Vec<Vec<Rational>>>,
    pub cone: ConeSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorOrigin {
    /// `±1_cell · ΔS_time^asset`.
    OneStep {
        time: usize,
        cell: usize,
        asset: usize,
        short: bool,
    },
    Explicit {
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetTradeGenerator {
    /// Trading date whose one-step gain this generator is.
    pub step: usize,
    pub origin: GeneratorOrigin,
    pub payoff: Payoff,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeCone {
    pub mode: ConeMode,
    pub generators: Vec<NetTradeGenerator>,
}

/// Position held over one trading period, or the weight of an explicit generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Holding {
    Position {
        time: usize,
        cell: Vec<String>,
        asset: String,
        units: Rational,
    },
    Explicit {
        index: usize,
        weight: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedMarket {
    states: StateSpace,
    filtration: Filtration,
    assets: Vec<String>,
    prices: PriceProcess,
    cone: TradeCone,
}

pub fn validate_market(spec: MarketSpec) -> Result<ValidatedMarket, MarketError> {
    let states = StateSpace::new(spec.states)?;
    let n = states.size();
    let filtration = Filtration::new(spec.filtration, n)?;
    let horizon = filtration.horizon();
    let j = spec.assets.len();
    if spec.prices.len() != horizon + 1 {
        return Err(MarketError::PriceShape(format!(
            "{} dates of prices for a filtration with {} dates",
            spec.prices.len(),
            horizon + 1
        )));
    }
    for (t, per_asset) in spec.prices.iter().enumerate() {
        if per_asset.len() != j {
            return Err(MarketError::PriceShape(format!(
                "time {t} lists {} assets, expected {j}",
                per_asset.len()
            )));
        }
        for (a, values) in per_asset.iter().enumerate() {
            if values.len() != n {
                return Err(MarketError::PriceShape(format!(
                    "asset {a} at time {t} has {} values, expected {n}",
                    values.len()
                )));
            }
            if let Some(s) = values.iter().position(|v| v.is_negative()) {
                return Err(MarketError::NegativePriceError {
                    time: t,
                    asset: a,
                    state: s,
                    value: values[s].clone(),
                });
            }
            let part = filtration.at(t);
            if let Some(cell) = part
                .cells()
                .iter()
                .find(|cell| cell.iter().any(|&s| values[s] != values[cell[0]]))
            {
                return Err(MarketError::AdaptednessError {
                    time: t,
                    asset: a,
                    cell: cell.clone(),
                });
            }
        }
    }
    for &a in &spec.cone.long_only {
        if a >= j {
            return Err(MarketError::UnknownAsset(a));
        }
    }
    let prices = PriceProcess {
        values: spec.prices,
    };

    let generators = match &spec.cone.generators {
        Some(explicit) => {
            let mut out = Vec::with_capacity(explicit.len());
            for (i, g) in explicit.iter().enumerate() {
                if g.len() != n {
                    return Err(MarketError::LengthMismatch {
                        what: format!("generator {i}"),
                        found: g.len(),
                        expected: n,
                    });
                }
                if !filtration.terminal().is_constant_on_cells(g) {
                    return Err(MarketError::MeasurabilityError {
                        what: format!("generator {i}"),
                    });
                }
                out.push(NetTradeGenerator {
                    step: horizon,
                    origin: GeneratorOrigin::Explicit { index: i },
                    payoff: Payoff(g.clone()),
                });
            }
            out
        }
        None => derive_generators(&filtration, &prices, &spec.cone),
    };

    Ok(ValidatedMarket {
        states,
        filtration,
        assets: spec.assets,
        prices,
        cone: TradeCone {
            mode: spec.cone.mode,
            generators,
        },
    })
}

fn derive_generators(
    filtration: &Filtration,
    prices: &PriceProcess,
    cone: &ConeSpec,
) -> Vec<NetTradeGenerator> {
    let n = filtration.terminal().cell_of.len();
    let mut out = Vec::new();
    for t in 1..=filtration.horizon() {
        for (c, cell) in filtration.at(t - 1).cells().iter().enumerate() {
            for a in 0..prices.num_assets() {
                let delta = prices.increment(t, a);
                let mut payoff = Payoff::zeros(n);
                for &s in cell {
                    payoff.0[s] = delta[s].clone();
                }
                match cone.mode {
                    ConeMode::Linear => out.push(NetTradeGenerator {
                        step: t,
                        origin: GeneratorOrigin::OneStep {
                            time: t,
                            cell: c,
                            asset: a,
                            short: false,
                        },
                        payoff,
                    }),
                    ConeMode::Cone => {
                        let negated = payoff.scale(&Rational::integer(-1));
                        out.push(NetTradeGenerator {
                            step: t,
                            origin: GeneratorOrigin::OneStep {
                                time: t,
                                cell: c,
                                asset: a,
                                short: false,
                            },
                            payoff,
                        });
                        if !cone.long_only.contains(&a) {
                            out.push(NetTradeGenerator {
                                step: t,
                                origin: GeneratorOrigin::OneStep {
                                    time: t,
                                    cell: c,
                                    asset: a,
                                    short: true,
                                },
                                payoff: negated,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Payoff generators of the net-trade cone, in deterministic order
/// (time, then cell, then asset).
pub fn net_trade_generators(market: &ValidatedMarket) -> Vec<Payoff> {
    market
        .cone
        .generators
        .iter()
        .map(|g| g.payoff.clone())
        .collect()
}

impl ValidatedMarket {
    pub fn num_states(&self) -> usize {
        self.states.size()
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn state_label(&self, s: usize) -> &str {
        &self.states.labels()[s]
    }

    pub fn labels_of(&self, set: &[usize]) -> Vec<String> {
        set.iter()
            .map(|&s| self.state_label(s).to_string())
            .collect()
    }

    pub fn horizon(&self) -> usize {
        self.filtration.horizon()
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn prices(&self) -> &PriceProcess {
        &self.prices
    }

    pub fn cone(&self) -> &TradeCone {
        &self.cone
    }

    pub fn mode(&self) -> ConeMode {
        self.cone.mode
    }

    pub fn generators(&self) -> &[NetTradeGenerator] {
        &self.cone.generators
    }

    pub fn has_explicit_generators(&self) -> bool {
        self.cone
            .generators
            .iter()
            .any(|g| matches!(g.origin, GeneratorOrigin::Explicit { .. }))
    }

    /// Indices of the generators trading at date `t`.
    pub fn step_generators(&self, t: usize) -> Vec<usize> {
        (0..self.cone.generators.len())
            .filter(|&i| self.cone.generators[i].step == t)
            .collect()
    }

    /// Admissible range of a single generator coefficient.
    pub fn coefficient_bound(&self) -> VarBound {
        match self.cone.mode {
            ConeMode::Linear => VarBound::free(),
            ConeMode::Cone => VarBound::nonnegative(),
        }
    }

    /// `Σ θ_g · g` over all generators.
    pub fn gains(&self, coefficients: &[Rational]) -> Payoff {
        self.gains_of(
            &(0..self.cone.generators.len()).collect::<Vec<_>>(),
            coefficients,
        )
    }

    /// `Σ θ_k · g_{indices[k]}`.
    pub fn gains_of(&self, indices: &[usize], coefficients: &[Rational]) -> Payoff {
        let mut total = Payoff::zeros(self.num_states());
        for (&g, theta) in indices.iter().zip(coefficients) {
            if theta.is_zero() {
                continue;
            }
            for (acc, v) in total.0.iter_mut().zip(&self.cone.generators[g].payoff.0) {
                if !v.is_zero() {
                    *acc += theta * v;
                }
            }
        }
        total
    }

    /// Whether `coefficients` is an admissible strategy whose gain is `payoff`.
    pub fn is_net_trade(&self, coefficients: &[Rational], payoff: &Payoff) -> bool {
        coefficients.len() == self.cone.generators.len()
            && (self.cone.mode == ConeMode::Linear || coefficients.iter().all(|c| !c.is_negative()))
            && self.gains(coefficients) == *payoff
    }

    pub fn is_measurable(&self, payoff: &[Rational]) -> bool {
        payoff.len() == self.num_states() && self.filtration.terminal().is_constant_on_cells(payoff)
    }

    pub fn check_payoff(&self, payoff: &Payoff, what: &str) -> Result<(), MarketError> {
        if payoff.len() != self.num_states() {
            return Err(MarketError::LengthMismatch {
                what: what.to_string(),
                found: payoff.len(),
                expected: self.num_states(),
            });
        }
        if !self.is_measurable(payoff) {
            return Err(MarketError::MeasurabilityError {
                what: what.to_string(),
            });
        }
        Ok(())
    }

    /// Predictable positions carried by a strategy over the generators.
    pub fn holdings(&self, coefficients: &[Rational]) -> Vec<Holding> {
        let mut positions: Vec<((usize, usize, usize), Rational)> = Vec::new();
        let mut explicit = Vec::new();
        for (g, theta) in self.cone.generators.iter().zip(coefficients) {
            match g.origin {
                GeneratorOrigin::OneStep {
                    time,
                    cell,
                    asset,
                    short,
                } => {
                    let units = if short { -theta } else { theta.clone() };
                    match positions
                        .iter_mut()
                        .find(|(k, _)| *k == (time, cell, asset))
                    {
                        Some((_, u)) => *u += &units,
                        None => positions.push(((time, cell, asset), units)),
                    }
                }
                GeneratorOrigin::Explicit { index } => {
                    if !theta.is_zero() {
                        explicit.push(Holding::Explicit {
                            index,
                            weight: theta.clone(),
                        });
                    }
                }
            }
        }
        positions
            .into_iter()
            .filter(|(_, u)| !u.is_zero())
            .map(|((time, cell, asset), units)| Holding::Position {
                time,
                cell: self.labels_of(&self.filtration.at(time - 1).cells()[cell]),
                asset: self.assets[asset].clone(),
                units,
            })
            .chain(explicit)
            .collect()
    }

    /// Number of risky assets, the per-step dimension of the strategy space.
    pub fn dimension(&self) -> usize {
        self.assets.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qvec};

    fn binomial() -> MarketSpec {
        MarketSpec {
            states: vec!["up".into(), "down".into()],
            filtration: vec![vec![vec![0, 1]], vec![vec![0], vec![1]]],
            assets: vec!["S".into()],
            prices: vec![vec![qvec(&[1, 1])], vec![vec![q(2, 1), q(1, 2)]]],
            cone: ConeSpec::linear(),
        }
    }

    #[test]
    fn binomial_is_valid_with_single_generator() {
        let m = validate_market(binomial()).unwrap();
        assert_eq!(m.horizon(), 1);
        assert_eq!(
            net_trade_generators(&m),
            vec![Payoff(vec![q(1, 1), q(-1, 2)])]
        );
    }

    #[test]
    fn price_varying_inside_initial_cell_is_rejected() {
        let mut spec = binomial();
        spec.prices[0][0] = qvec(&[1, 2]);
        assert!(matches!(
            validate_market(spec),
            Err(MarketError::AdaptednessError { time: 0, .. })
        ));
    }

    #[test]
    fn negative_price_is_rejected() {
        let mut spec = binomial();
        spec.prices[1][0][1] = q(-1, 2);
        assert!(matches!(
            validate_market(spec),
            Err(MarketError::NegativePriceError { .. })
        ));
    }

    #[test]
    fn non_refining_filtration_is_rejected() {
        let spec = MarketSpec {
            states: vec!["a".into(), "b".into(), "c".into()],
            filtration: vec![
                vec![vec![0, 1, 2]],
                vec![vec![0, 1], vec![2]],
                vec![vec![0], vec![1, 2]],
            ],
            assets: vec![],
            prices: vec![vec![], vec![], vec![]],
            cone: ConeSpec::linear(),
        };
        assert_eq!(
            validate_market(spec).unwrap_err(),
            MarketError::RefinementError(2)
        );
    }

    #[test]
    fn explicit_generator_market_is_valid() {
        let spec = MarketSpec {
            states: (0..4).map(|i| format!("w{i}")).collect(),
            filtration: vec![vec![vec![0, 1, 2, 3]], (0..4).map(|i| vec![i]).collect()],
            assets: vec![],
            prices: vec![vec![], vec![]],
            cone: ConeSpec {
                mode: ConeMode::Linear,
                generators: Some(vec![qvec(&[1, -1, 0, 0])]),
                long_only: vec![],
            },
        };
        let m = validate_market(spec).unwrap();
        assert_eq!(
            net_trade_generators(&m),
            vec![Payoff::from_ints(&[1, -1, 0, 0])]
        );
    }

    #[test]
    fn two_period_generator_count() {
        let spec = MarketSpec {
            states: (0..4).map(|i| format!("w{i}")).collect(),
            filtration: vec![
                vec![vec![0, 1, 2, 3]],
                vec![vec![0, 1], vec![2, 3]],
                (0..4).map(|i| vec![i]).collect(),
            ],
            assets: vec!["S".into()],
            prices: vec![
                vec![qvec(&[2, 2, 2, 2])],
                vec![qvec(&[3, 3, 1, 1])],
                vec![qvec(&[4, 2, 2, 0])],
            ],
            cone: ConeSpec::linear(),
        };
        let m = validate_market(spec).unwrap();
        assert_eq!(net_trade_generators(&m).len(), 3);
        assert_eq!(m.step_generators(2), vec![1, 2]);
    }

    #[test]
    fn constant_prices_give_zero_generators() {
        let mut spec = binomial();
        spec.prices[1][0] = qvec(&[1, 1]);
        let m = validate_market(spec).unwrap();
        assert!(net_trade_generators(&m).iter().all(|g| g.is_zero()));
    }

    #[test]
    fn long_only_cone_drops_short_direction() {
        let mut spec = binomial();
        spec.cone = ConeSpec {
            mode: ConeMode::Cone,
            generators: None,
            long_only: vec![0],
        };
        let m = validate_market(spec.clone()).unwrap();
        assert_eq!(m.generators().len(), 1);
        spec.cone.long_only.clear();
        let m = validate_market(spec).unwrap();
        assert_eq!(m.generators().len(), 2);
        assert_eq!(m.generators()[1].payoff, Payoff(vec![q(-1, 1), q(1, 2)]));
    }

    #[test]
    fn non_measurable_explicit_generator_is_rejected() {
        let spec = MarketSpec {
            states: vec!["a".into(), "b".into()],
            filtration: vec![vec![vec![0, 1]], vec![vec![0, 1]]],
            assets: vec![],
            prices: vec![vec![], vec![]],
            cone: ConeSpec {
                mode: ConeMode::Linear,
                generators: Some(vec![qvec(&[1, 0])]),
                long_only: vec![],
            },
        };
        assert!(matches!(
            validate_market(spec),
            Err(MarketError::MeasurabilityError { .. })
        ));
    }
}
