//! Efficient-market diagnostics: strong and weak forms under a single prior,
//! their Knightian analogues over a prior set, and the smooth-ambiguity mixture.

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::nullspace;
use crate::market::ValidatedMarket;
use crate::order::{build_order, OrderError, OrderKind, PriorSet};
use crate::polytope::{
    convex_weights, martingale_polytope, MartingalePolytope, PolytopeError, VERTEX_ENUMERATION_CAP,
};
use crate::rational::{dot, Rational};
use crate::support::charged_states;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmhError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmhVariant {
    Strong,
    Weak,
    KStrong,
    KWeak,
    Smooth,
}

impl EmhVariant {
    pub fn name(self) -> &'static str {
        match self {
            EmhVariant::Strong => "strong",
            EmhVariant::Weak => "weak",
            EmhVariant::KStrong => "k-strong",
            EmhVariant::KWeak => "k-weak",
            EmhVariant::Smooth => "smooth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexMembership {
    pub vertex: Vec<Rational>,
    /// Convex weights over the priors, when the vertex lies in their hull.
    pub hull_weights: Option<Vec<Rational>>,
    /// Whether the vertex is one of the listed priors.
    pub is_listed_prior: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisAgreement {
    pub payoff: Vec<Rational>,
    pub prior_mean: Rational,
    pub min: Rational,
    pub max: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmhReport {
    pub variant: EmhVariant,
    pub verdict: bool,
    /// Measures that justify the verdict (martingale measures found).
    pub witnesses: Vec<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unique: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<VertexMembership>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hull_inclusion: Option<bool>,
    /// Basis of the payoffs whose mean is the same under every prior.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_unambiguous_basis: Option<Vec<Vec<Rational>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_agreement: Option<Vec<BasisAgreement>>,
    /// States the prior(s) charge.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_support: Option<Vec<usize>>,
    /// States some martingale measure on the prior support charges.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chargeable: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixture: Option<Vec<Rational>>,
    /// Witness measure divided by the mixture on its support.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<Option<Rational>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

impl EmhReport {
    fn new(variant: EmhVariant, verdict: bool) -> Self {
        Self {
            variant,
            verdict,
            witnesses: Vec::new(),
            unique: None,
            vertices: None,
            hull_inclusion: None,
            mean_unambiguous_basis: None,
            basis_agreement: None,
            prior_support: None,
            chargeable: None,
            mixture: None,
            density: None,
            note: None,
        }
    }
}

fn validated_prior(market: &ValidatedMarket, p: &[Rational]) -> Result<Vec<Rational>, EmhError> {
    Ok(PriorSet::new(vec![p.to_vec()], market.num_states())?.priors()[0].clone())
}

/// The prior itself is a martingale measure.
pub fn strong_emh(market: &ValidatedMarket, p: &[Rational]) -> Result<EmhReport, EmhError> {
    let p = validated_prior(market, p)?;
    let ord = build_order(market.num_states(), OrderKind::Expectation(vec![p.clone()]))?;
    let poly = martingale_polytope(market, &ord);
    let verdict = poly.contains(&p);
    let mut report = EmhReport::new(EmhVariant::Strong, verdict);
    if verdict {
        report.witnesses.push(p.clone());
        if market.num_states() <= VERTEX_ENUMERATION_CAP {
            report.unique = Some(poly.vertices()? == vec![p]);
        }
    }
    Ok(report)
}

/// Averages per-state maximisers so every chargeable state gets mass.
fn equivalent_measure(
    poly: &MartingalePolytope,
    states: &[usize],
) -> (Vec<usize>, Option<Vec<Rational>>) {
    let maximisers: Vec<(usize, Option<Vec<Rational>>)> = states
        .par_iter()
        .map(|&s| {
            let best = poly
                .max_state_mass(s)
                .filter(|p| p.value.is_positive())
                .map(|p| p.measure);
            (s, best)
        })
        .collect();
    let chargeable: Vec<usize> = maximisers
        .iter()
        .filter(|(_, m)| m.is_some())
        .map(|(s, _)| *s)
        .collect();
    let found: Vec<&Vec<Rational>> = maximisers.iter().filter_map(|(_, m)| m.as_ref()).collect();
    if found.is_empty() {
        return (chargeable, None);
    }
    let k = Rational::from(found.len());
    let n = poly.num_states();
    let avg = (0..n)
        .map(|s| found.iter().map(|m| m[s].clone()).sum::<Rational>() / &k)
        .collect();
    (chargeable, Some(avg))
}

/// Some martingale measure has the same null sets as the prior.
pub fn weak_emh(market: &ValidatedMarket, p: &[Rational]) -> Result<EmhReport, EmhError> {
    let p = validated_prior(market, p)?;
    let support: Vec<usize> = (0..p.len()).filter(|&s| p[s].is_positive()).collect();
    let poly = MartingalePolytope::supported_on(market, &support);
    let (chargeable, avg) = equivalent_measure(&poly, &support);
    let verdict = chargeable == support;
    let mut report = EmhReport::new(EmhVariant::Weak, verdict);
    if verdict {
        report.witnesses.extend(avg);
    }
    report.prior_support = Some(support);
    report.chargeable = Some(chargeable);
    Ok(report)
}

/// Every martingale functional of the expectation order lies in the convex
/// hull of the priors, and all of them agree with the priors on payoffs whose
/// mean is unambiguous. This is a necessary condition only.
pub fn knightian_strong(
    market: &ValidatedMarket,
    priors: &[Vec<Rational>],
) -> Result<EmhReport, EmhError> {
    let n = market.num_states();
    let set = PriorSet::new(priors.to_vec(), n)?;
    let ord = build_order(n, OrderKind::Expectation(priors.to_vec()))?;
    let poly = martingale_polytope(market, &ord);
    if poly.is_empty() {
        return Err(EmhError::Polytope(PolytopeError::EmptyPolytope));
    }
    let prior_refs: Vec<&Vec<Rational>> = set.priors().iter().collect();
    let vertices = if n <= VERTEX_ENUMERATION_CAP {
        Some(
            poly.vertices()?
                .into_iter()
                .map(|v| VertexMembership {
                    hull_weights: convex_weights(&v, &prior_refs),
                    is_listed_prior: set.priors().contains(&v),
                    vertex: v,
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    // Without vertices, every element q = Σ λ_k P_k with Σ λ_k = 1 is in the hull.
    let hull_inclusion = vertices
        .as_ref()
        .is_none_or(|vs| vs.iter().all(|v| v.hull_weights.is_some()));

    let first = &set.priors()[0];
    let differences: Vec<Vec<Rational>> = set.priors()[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    let basis = nullspace(&differences, n);
    let agreement: Vec<BasisAgreement> = basis
        .par_iter()
        .map(|x| BasisAgreement {
            payoff: x.clone(),
            prior_mean: dot(first, x),
            min: poly.minimize(x).expect("nonempty").value,
            max: poly.maximize(x).expect("nonempty").value,
        })
        .collect();
    let agrees = agreement
        .iter()
        .all(|a| a.min == a.prior_mean && a.max == a.prior_mean);

    let mut report = EmhReport::new(EmhVariant::KStrong, hull_inclusion && agrees);
    report.witnesses = match &vertices {
        Some(vs) => vs.iter().map(|v| v.vertex.clone()).collect(),
        None => poly.feasible_point().into_iter().collect(),
    };
    report.vertices = vertices;
    report.hull_inclusion = Some(hull_inclusion);
    report.mean_unambiguous_basis = Some(basis);
    report.basis_agreement = Some(agreement);
    report.note = Some("necessary condition verified");
    Ok(report)
}

/// Martingale measures and priors share their polar sets.
pub fn knightian_weak(
    market: &ValidatedMarket,
    priors: &[Vec<Rational>],
) -> Result<EmhReport, EmhError> {
    let ord = build_order(market.num_states(), OrderKind::QuasiSure(priors.to_vec()))?;
    let support = ord.support_states();
    let charges = charged_states(market, &support);
    let chargeable: Vec<usize> = charges
        .iter()
        .filter(|c| c.max_mass.is_positive())
        .map(|c| c.state)
        .collect();
    let mut report = EmhReport::new(EmhVariant::KWeak, chargeable == support);
    report.witnesses = charges
        .into_iter()
        .filter(|c| c.max_mass.is_positive())
        .filter_map(|c| c.measure)
        .collect();
    report.prior_support = Some(support);
    report.chargeable = Some(chargeable);
    Ok(report)
}

/// Weak form under the mixture of the priors, with the state-price density.
pub fn smooth_emh(
    market: &ValidatedMarket,
    weights: &[Rational],
    priors: &[Vec<Rational>],
) -> Result<EmhReport, EmhError> {
    let set = PriorSet::new(priors.to_vec(), market.num_states())?;
    let mixture = set.mixture(weights)?;
    let mut report = weak_emh(market, &mixture)?;
    report.variant = EmhVariant::Smooth;
    report.density = report.witnesses.first().map(|q| {
        q.iter()
            .zip(&mixture)
            .map(|(qs, ps)| (!ps.is_zero()).then(|| qs / ps))
            .collect()
    });
    report.mixture = Some(mixture);
    Ok(report)
}
