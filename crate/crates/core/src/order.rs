//! The common pre-order on payoffs and the relevance classes built on it.
//!
//! Every supported order is polyhedral: `X ≥ 0` iff `L·X ≥ 0` componentwise for
//! a finite test matrix `L` of nonnegative functionals. State-based orders
//! (pointwise, almost sure, quasi sure, smooth ambiguity) use Dirac rows on the
//! states that are not polar; expectation orders use the prior vectors
//! themselves.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, Direction, LinearProgram, RowSense, VarBound};
use crate::market::Payoff;
use crate::rational::{dot, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("the prior set is empty")]
    EmptyPriorSet,
    #[error("prior {index} is not a probability vector: {reason}")]
    NonProbabilityVector { index: usize, reason: String },
    #[error("mixture weights are invalid: {0}")]
    BadMixture(String),
    #[error("relevance generator {index} is not positive in the order")]
    NotPositive { index: usize },
    #[error("{what} has length {found}, expected {expected}")]
    LengthMismatch {
        what: String,
        found: usize,
        expected: usize,
    },
}

/// An analysis that needs a lattice of negligible claims was asked to run
/// under an expectation order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{operation} requires a state-based order, got {kind}")]
pub struct OrderUnsupported {
    pub operation: &'static str,
    pub kind: &'static str,
}

/// Requested order, with its priors as supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderKind {
    Pointwise,
    AlmostSure(Vec<Rational>),
    QuasiSure(Vec<Vec<Rational>>),
    Expectation(Vec<Vec<Rational>>),
    SmoothAmbiguity {
        weights: Vec<Rational>,
        priors: Vec<Vec<Rational>>,
    },
}

impl OrderKind {
    pub fn name(&self) -> &'static str {
        match self {
            OrderKind::Pointwise => "pointwise",
            OrderKind::AlmostSure(_) => "almost_sure",
            OrderKind::QuasiSure(_) => "quasi_sure",
            OrderKind::Expectation(_) => "expectation",
            OrderKind::SmoothAmbiguity { .. } => "smooth_ambiguity",
        }
    }
}

/// A validated, nonempty finite list of probability vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorSet {
    priors: Vec<Vec<Rational>>,
}

fn check_probability(index: usize, p: &[Rational], n: usize) -> Result<(), OrderError> {
    if p.len() != n {
        return Err(OrderError::LengthMismatch {
            what: format!("prior {index}"),
            found: p.len(),
            expected: n,
        });
    }
    if p.iter().any(|x| x.is_negative()) {
        return Err(OrderError::NonProbabilityVector {
            index,
            reason: "negative entry".into(),
        });
    }
    let total: Rational = p.iter().sum();
    if !total.is_one() {
        return Err(OrderError::NonProbabilityVector {
            index,
            reason: format!("entries sum to {total}"),
        });
    }
    Ok(())
}

impl PriorSet {
    pub fn new(priors: Vec<Vec<Rational>>, n: usize) -> Result<Self, OrderError> {
        if priors.is_empty() {
            return Err(OrderError::EmptyPriorSet);
        }
        for (i, p) in priors.iter().enumerate() {
            check_probability(i, p, n)?;
        }
        Ok(Self { priors })
    }

    pub fn priors(&self) -> &[Vec<Rational>] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    /// States charged by at least one prior.
    pub fn support_union(&self) -> Vec<usize> {
        let n = self.priors[0].len();
        (0..n)
            .filter(|&s| self.priors.iter().any(|p| p[s].is_positive()))
            .collect()
    }

    /// `Σ_i weights[i] · priors[i]`.
    pub fn mixture(&self, weights: &[Rational]) -> Result<Vec<Rational>, OrderError> {
        if weights.len() != self.priors.len() {
            return Err(OrderError::BadMixture(format!(
                "{} weights for {} priors",
                weights.len(),
                self.priors.len()
            )));
        }
        if weights.iter().any(|w| w.is_negative()) || !weights.iter().sum::<Rational>().is_one() {
            return Err(OrderError::BadMixture(
                "weights must be nonnegative and sum to one".into(),
            ));
        }
        let n = self.priors[0].len();
        Ok((0..n)
            .map(|s| {
                weights
                    .iter()
                    .zip(&self.priors)
                    .map(|(w, p)| w * &p[s])
                    .sum()
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderStructure {
    kind: OrderKind,
    num_states: usize,
    test_matrix: Vec<Vec<Rational>>,
    polar: Vec<bool>,
    state_based: bool,
    mixture: Option<Vec<Rational>>,
}

fn dirac_rows(n: usize, support: &[usize]) -> Vec<Vec<Rational>> {
    support
        .iter()
        .map(|&s| {
            let mut row = vec![Rational::zero(); n];
            row[s] = Rational::one();
            row
        })
        .collect()
}

fn support_of(p: &[Rational]) -> Vec<usize> {
    (0..p.len()).filter(|&s| p[s].is_positive()).collect()
}

/// Builds the test-matrix encoding of the requested order on `num_states` states.
pub fn build_order(num_states: usize, kind: OrderKind) -> Result<OrderStructure, OrderError> {
    let n = num_states;
    let (support, rows, state_based, mixture) = match &kind {
        OrderKind::Pointwise => {
            let all: Vec<usize> = (0..n).collect();
            (all.clone(), dirac_rows(n, &all), true, None)
        }
        OrderKind::AlmostSure(p) => {
            check_probability(0, p, n)?;
            let s = support_of(p);
            (s.clone(), dirac_rows(n, &s), true, None)
        }
        OrderKind::QuasiSure(priors) => {
            let set = PriorSet::new(priors.clone(), n)?;
            let s = set.support_union();
            (s.clone(), dirac_rows(n, &s), true, None)
        }
        OrderKind::Expectation(priors) => {
            let set = PriorSet::new(priors.clone(), n)?;
            (set.support_union(), priors.clone(), false, None)
        }
        OrderKind::SmoothAmbiguity { weights, priors } => {
            let set = PriorSet::new(priors.clone(), n)?;
            let mix = set.mixture(weights)?;
            let s = support_of(&mix);
            (s.clone(), dirac_rows(n, &s), true, Some(mix))
        }
    };
    let mut polar = vec![true; n];
    for s in support {
        polar[s] = false;
    }
    Ok(OrderStructure {
        kind,
        num_states: n,
        test_matrix: rows,
        polar,
        state_based,
        mixture,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Negligible,
    Positive,
    NegativeOfPositive,
    Neither,
}

impl OrderStructure {
    pub fn kind(&self) -> &OrderKind {
        &self.kind
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn test_matrix(&self) -> &[Vec<Rational>] {
        &self.test_matrix
    }

    pub fn num_rows(&self) -> usize {
        self.test_matrix.len()
    }

    /// Whether the negligible claims are exactly the payoffs vanishing off a
    /// polar set (pointwise, a.s., q.s. and mixture orders).
    pub fn is_state_based(&self) -> bool {
        self.state_based
    }

    pub fn require_state_based(&self, operation: &'static str) -> Result<(), OrderUnsupported> {
        if self.state_based {
            Ok(())
        } else {
            Err(OrderUnsupported {
                operation,
                kind: self.kind.name(),
            })
        }
    }

    pub fn polar_mask(&self) -> &[bool] {
        &self.polar
    }

    pub fn polar_states(&self) -> Vec<usize> {
        (0..self.num_states).filter(|&s| self.polar[s]).collect()
    }

    pub fn support_states(&self) -> Vec<usize> {
        (0..self.num_states).filter(|&s| !self.polar[s]).collect()
    }

    /// The mixed prior of a smooth-ambiguity order.
    pub fn mixture(&self) -> Option<&[Rational]> {
        self.mixture.as_deref()
    }

    /// `L·X`.
    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.test_matrix.iter().map(|row| dot(row, x)).collect()
    }

    pub fn is_nonnegative(&self, x: &[Rational]) -> bool {
        self.test_matrix
            .iter()
            .all(|row| !dot(row, x).is_negative())
    }
}

pub fn classify(x: &[Rational], ord: &OrderStructure) -> Classification {
    let lx = ord.apply(x);
    let pos = lx.iter().any(|v| v.is_positive());
    let neg = lx.iter().any(|v| v.is_negative());
    match (pos, neg) {
        (false, false) => Classification::Negligible,
        (true, false) => Classification::Positive,
        (false, true) => Classification::NegativeOfPositive,
        (true, true) => Classification::Neither,
    }
}

/// `X ≤ Y` in the order.
pub fn dominates(x: &[Rational], y: &[Rational], ord: &OrderStructure) -> bool {
    let diff: Vec<Rational> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    ord.is_nonnegative(&diff)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelevancePreset {
    /// Nonnegative claims that are strictly positive somewhere.
    Rop,
    /// Strictly positive on an open set; on a finite discrete space this is `Rop`.
    Ropen,
    /// Strictly positive everywhere.
    Rplus,
    /// Positive constants.
    Runiform,
    Custom,
}

/// A finite family of positive payoffs. A net trade is an arbitrage iff it
/// dominates a positive multiple of one of the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceSpec {
    pub preset: RelevancePreset,
    pub generators: Vec<Payoff>,
    pub everywhere_positive: bool,
    /// False when the generators only give a sufficient test for the full
    /// positive class (expectation orders whose test matrix is row-rank deficient).
    pub exact: bool,
}

// Payoff g, constant on each cell, with (L g)_k = 1, L g ≥ 0 and the
// smallest total mass on other rows.
fn row_generator(ord: &OrderStructure, cells: &[Vec<usize>], k: usize) -> (Payoff, bool) {
    let n = ord.num_states();
    let rows: Vec<Vec<Rational>> = ord
        .test_matrix()
        .iter()
        .map(|r| {
            cells
                .iter()
                .map(|c| c.iter().map(|&s| r[s].clone()).sum())
                .collect()
        })
        .collect();
    let mut prog = LinearProgram::new(Direction::Minimize, cells.len());
    for j in 0..cells.len() {
        prog.set_bound(j, VarBound::free());
        let c: Rational = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, r)| r[j].clone())
            .sum();
        prog.set_objective(j, c);
    }
    for (i, row) in rows.iter().enumerate() {
        let sense = if i == k { RowSense::Eq } else { RowSense::Ge };
        let rhs = if i == k {
            Rational::one()
        } else {
            Rational::zero()
        };
        prog.add_constraint(row.clone(), sense, rhs);
    }
    let sol = lp::solve(&prog)
        .expect("well-formed program")
        .into_optimal()
        .expect("a nonnegative nonzero row can always be normalised");
    let exact = sol.value.is_zero();
    let mut g = vec![Rational::zero(); n];
    for (cell, v) in cells.iter().zip(&sol.primal) {
        for &s in cell {
            g[s] = v.clone();
        }
    }
    (Payoff(g), exact)
}

/// Relevance generators when every subset of states is observable at the end.
pub fn default_relevance(preset: RelevancePreset, ord: &OrderStructure) -> RelevanceSpec {
    let singletons: Vec<Vec<usize>> = (0..ord.num_states()).map(|s| vec![s]).collect();
    measurable_relevance(preset, ord, &singletons)
}

/// Relevance generators among claims constant on the given terminal cells.
/// State-based orders get the indicator of every cell the order charges.
pub fn measurable_relevance(
    preset: RelevancePreset,
    ord: &OrderStructure,
    cells: &[Vec<usize>],
) -> RelevanceSpec {
    let n = ord.num_states();
    match preset {
        RelevancePreset::Rop | RelevancePreset::Ropen | RelevancePreset::Custom => {
            if ord.is_state_based() {
                let polar = ord.polar_mask();
                RelevanceSpec {
                    preset,
                    generators: cells
                        .iter()
                        .filter(|c| c.iter().any(|&s| !polar[s]))
                        .map(|c| Payoff::indicator(n, c))
                        .collect(),
                    everywhere_positive: false,
                    exact: true,
                }
            } else {
                let mut exact = true;
                let generators = (0..ord.num_rows())
                    .map(|k| {
                        let (g, e) = row_generator(ord, cells, k);
                        exact &= e;
                        g
                    })
                    .collect();
                RelevanceSpec {
                    preset,
                    generators,
                    everywhere_positive: false,
                    exact,
                }
            }
        }
        RelevancePreset::Rplus | RelevancePreset::Runiform => RelevanceSpec {
            preset,
            generators: vec![Payoff::constant(n, Rational::one())],
            everywhere_positive: preset == RelevancePreset::Rplus,
            exact: true,
        },
    }
}

/// User-supplied relevance generators; each must be positive in the order.
pub fn custom_relevance(
    generators: Vec<Payoff>,
    ord: &OrderStructure,
) -> Result<RelevanceSpec, OrderError> {
    for (i, g) in generators.iter().enumerate() {
        if g.len() != ord.num_states() {
            return Err(OrderError::LengthMismatch {
                what: format!("relevance generator {i}"),
                found: g.len(),
                expected: ord.num_states(),
            });
        }
        if classify(g, ord) != Classification::Positive {
            return Err(OrderError::NotPositive { index: i });
        }
    }
    Ok(RelevanceSpec {
        preset: RelevancePreset::Custom,
        generators,
        everywhere_positive: false,
        exact: true,
    })
}
