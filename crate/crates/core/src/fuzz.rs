//! Random market generation and the cross-check battery run on every
//! generated market, with a shrinker for failing documents.

use std::panic::{catch_unwind, AssertUnwindSafe};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arbitrage::{
    check_nflvr, find_arbitrage, find_one_step_arbitrage, market_relevance, NflvrVerdict,
};
use crate::io::{
    AssetDocument, ConeDocument, CustomRelevance, LoadedMarket, MarketSpecDocument, OrderDocument,
    OrderKindName, RelevanceDocument,
};
use crate::linalg::nullspace;
use crate::market::{ConeMode, Payoff};
use crate::order::{OrderStructure, RelevancePreset};
use crate::polytope::martingale_polytope;
use crate::rational::{dot, Rational};
use crate::superhedge::{full_support_check, superhedge_price, HedgeCertificate, SuperhedgeError};
use crate::support::{ftap_battery, ftap_certificates, support_set, technical_reduction};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorConfig {
    pub max_states: usize,
    pub max_times: usize,
    pub max_assets: usize,
    /// Terminal prices are drawn from `[0, price_bound]`.
    pub price_bound: i64,
    pub max_priors: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            max_states: 12,
            max_times: 3,
            max_assets: 2,
            price_bound: 4,
            max_priors: 3,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_states < 1 || self.max_times < 1 || self.max_assets < 1 {
            return Err("state, time and asset bounds must be positive".into());
        }
        if self.price_bound < 1 || self.max_priors < 1 {
            return Err("price and prior bounds must be positive".into());
        }
        Ok(())
    }
}

fn small_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    let den = rng.gen_range(1..=4i64);
    Rational::new(rng.gen_range(lo * den..=hi * den), den)
}

fn random_prior(rng: &mut ChaCha8Rng, n: usize, zero_chance: f64) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..n)
            .map(|_| {
                if rng.gen_bool(zero_chance) {
                    0
                } else {
                    rng.gen_range(1..=4)
                }
            })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| Rational::new(x, total)).collect();
        }
    }
}

fn refine(rng: &mut ChaCha8Rng, cells: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for cell in cells {
        let k = rng.gen_range(1..=cell.len().min(3));
        let mut groups = vec![Vec::new(); k];
        for &s in cell {
            groups[rng.gen_range(0..k)].push(s);
        }
        out.extend(groups.into_iter().filter(|g| !g.is_empty()));
    }
    out
}

/// A random market document; deterministic in `seed`.
pub fn generate_market(cfg: &GeneratorConfig, seed: u64) -> MarketSpecDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(cfg.max_states.min(2)..=cfg.max_states);
    let horizon = rng.gen_range(1..=cfg.max_times);
    let j = rng.gen_range(1..=cfg.max_assets);
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();

    let mut partitions: Vec<Vec<Vec<usize>>> = vec![vec![(0..n).collect()]];
    for t in 1..=horizon {
        let next = if t == horizon && rng.gen_bool(0.7) {
            (0..n).map(|s| vec![s]).collect()
        } else {
            refine(&mut rng, &partitions[t - 1])
        };
        partitions.push(next);
    }

    // 0: martingale under a full-support measure, 1: under a measure with
    // some zero transition weights, 2: unrelated prices.
    let style = match rng.gen_range(0..10) {
        0..=5 => 0,
        6..=7 => 1,
        _ => 2,
    };
    // One transition measure per cell, shared by all assets.
    let zero_chance = if style == 1 { 0.4 } else { 0.0 };
    let transitions: Vec<Vec<(Vec<usize>, Vec<Rational>)>> = (0..horizon)
        .map(|t| {
            partitions[t]
                .iter()
                .map(|cell| {
                    let children: Vec<usize> = partitions[t + 1]
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| cell.contains(&c[0]))
                        .map(|(i, _)| i)
                        .collect();
                    let w = random_prior(&mut rng, children.len(), zero_chance);
                    (children, w)
                })
                .collect()
        })
        .collect();
    let mut assets = Vec::with_capacity(j);
    for a in 0..j {
        let mut prices = vec![vec![Rational::zero(); n]; horizon + 1];
        for cell in &partitions[horizon] {
            let v = small_rational(&mut rng, 0, cfg.price_bound);
            for &s in cell {
                prices[horizon][s] = v.clone();
            }
        }
        for t in (0..horizon).rev() {
            for (cell, (children, w)) in partitions[t].iter().zip(&transitions[t]) {
                let v = if style == 2 {
                    small_rational(&mut rng, 0, cfg.price_bound)
                } else {
                    children
                        .iter()
                        .zip(w)
                        .map(|(&c, wi)| wi * &prices[t + 1][partitions[t + 1][c][0]])
                        .sum()
                };
                for &s in cell {
                    prices[t][s] = v.clone();
                }
            }
        }
        assets.push(AssetDocument {
            name: format!("A{a}"),
            prices,
        });
    }

    let mode = if rng.gen_bool(0.15) {
        ConeMode::Cone
    } else {
        ConeMode::Linear
    };
    let long_only = if mode == ConeMode::Cone {
        assets
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|a| a.name.clone())
            .collect()
    } else {
        Vec::new()
    };

    let priors_count = rng.gen_range(1..=cfg.max_priors);
    let priors = |rng: &mut ChaCha8Rng| -> Vec<Vec<Rational>> {
        (0..priors_count)
            .map(|_| random_prior(rng, n, 0.25))
            .collect()
    };
    let order = match rng.gen_range(0..20) {
        0..=7 => OrderDocument::default(),
        8..=10 => OrderDocument {
            kind: OrderKindName::AlmostSure,
            priors: Some(vec![priors(&mut rng).remove(0)]),
            mixture_weights: None,
        },
        11..=14 => OrderDocument {
            kind: OrderKindName::QuasiSure,
            priors: Some(priors(&mut rng)),
            mixture_weights: None,
        },
        15..=16 => {
            let ps = priors(&mut rng);
            let k = ps.len();
            OrderDocument {
                kind: OrderKindName::SmoothAmbiguity,
                priors: Some(ps),
                mixture_weights: Some(random_prior(&mut rng, k, 0.0)),
            }
        }
        _ => OrderDocument {
            kind: OrderKindName::Expectation,
            priors: Some(priors(&mut rng)),
            mixture_weights: None,
        },
    };
    let relevance = RelevanceDocument::Preset(match rng.gen_range(0..20) {
        0 => RelevancePreset::Runiform,
        1 => RelevancePreset::Rplus,
        2 => RelevancePreset::Ropen,
        _ => RelevancePreset::Rop,
    });

    MarketSpecDocument {
        states: states.clone(),
        filtration: partitions
            .iter()
            .map(|p| {
                p.iter()
                    .map(|c| c.iter().map(|&s| states[s].clone()).collect())
                    .collect()
            })
            .collect(),
        assets,
        cone: ConeDocument {
            mode,
            generators: None,
            long_only,
        },
        order,
        relevance,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed(String),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatteryResult {
    pub checks: Vec<CheckOutcome>,
}

impl BatteryResult {
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.status, CheckStatus::Failed(_)))
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks
            .iter()
            .find(|c| matches!(c.status, CheckStatus::Failed(_)))
    }
}

/// Names of the battery checks, in execution order.
pub const CHECKS: [&str; 7] = [
    "verdict_agreement",
    "duality",
    "sublinearity",
    "negligible_claims",
    "support_recursion",
    "price_reduction",
    "pricing_measures",
];

type CheckResult = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> CheckResult {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Battery<'a> {
    m: &'a LoadedMarket,
    rng: ChaCha8Rng,
    /// `P_T` cells, for measurable random payoffs.
    cells: Vec<Vec<usize>>,
    rop_arbitrage: bool,
}

impl Battery<'_> {
    fn ord(&self) -> &OrderStructure {
        &self.m.order
    }

    fn random_payoff(&mut self, lo: i64, hi: i64) -> Payoff {
        let n = self.m.market.num_states();
        let mut x = vec![Rational::zero(); n];
        for cell in &self.cells {
            let v = small_rational(&mut self.rng, lo, hi);
            for &s in cell {
                x[s] = v.clone();
            }
        }
        Payoff(x)
    }

    fn price(&self, x: &[Rational]) -> Result<Option<HedgeCertificate>, String> {
        match superhedge_price(&self.m.market, self.ord(), x) {
            Ok(c) => {
                c.verify(&self.m.market, self.ord(), x)
                    .map_err(|e| format!("hedge certificate: {e}"))?;
                Ok(Some(c))
            }
            Err(SuperhedgeError::UnboundedBelow(cert)) => {
                cert.verify(&self.m.market, self.ord())
                    .map_err(|e| format!("unbounded-price certificate: {e}"))?;
                Ok(None)
            }
            Err(e) => Err(e.to_string()),
        }
    }

    fn finite_price(&self, x: &[Rational]) -> Result<Rational, String> {
        self.price(x)?
            .map(|c| c.price)
            .ok_or_else(|| "price unexpectedly unbounded".to_string())
    }

    fn agreement(&mut self) -> CheckResult {
        let (market, ord, rel) = (&self.m.market, &self.m.order, &self.m.relevance);
        let arb = find_arbitrage(market, ord, rel);
        if let Some(c) = &arb {
            c.verify(market, ord)
                .map_err(|e| format!("certificate: {e}"))?;
            c.scaled(&Rational::new(3, 2))
                .verify(market, ord)
                .map_err(|e| format!("scaled certificate: {e}"))?;
        }
        let nflvr = check_nflvr(market, ord, rel);
        ensure(nflvr.consistent, || {
            "generator prices disagree with the verdict".into()
        })?;
        ensure(
            (nflvr.verdict == NflvrVerdict::StronglyFree) == arb.is_none(),
            || "no-free-lunch verdict differs from arbitrage search".into(),
        )?;
        let viability = full_support_check(market, ord, rel);
        ensure(viability.passes == arb.is_none(), || {
            format!(
                "full-support check {} but arbitrage search {}",
                viability.passes,
                arb.is_some()
            )
        })?;
        if ord.is_state_based() {
            let one_step = find_one_step_arbitrage(market, ord).map_err(|e| e.to_string())?;
            if let Some(o) = &one_step {
                o.certificate
                    .verify(market, ord)
                    .map_err(|e| format!("one-step certificate: {e}"))?;
            }
            ensure(one_step.is_some() == self.rop_arbitrage, || {
                "one-step search disagrees with the full search".into()
            })?;
        }
        Ok(())
    }

    fn duality(&mut self) -> CheckResult {
        let poly = martingale_polytope(&self.m.market, self.ord());
        let empty = poly.is_empty();
        let mut measures = Vec::new();
        let mut claims = Vec::new();
        for _ in 0..5 {
            let x = self.random_payoff(-5, 5);
            let hedge = self.price(&x)?;
            match (hedge, poly.maximize(&x)) {
                (Some(h), Some(sup)) => {
                    ensure(h.price == sup.value, || {
                        format!("price {} but dual value {}", h.price, sup.value)
                    })?;
                    ensure(poly.contains(&h.pricing_measure), || {
                        "pricing measure outside the polytope".into()
                    })?;
                    ensure(dot(&h.pricing_measure, &x) == h.price, || {
                        "pricing measure does not reproduce the price".into()
                    })?;
                    measures.push(h.pricing_measure);
                }
                (None, None) => {}
                (h, _) => {
                    return Err(format!(
                        "price finite: {}, polytope empty: {empty}",
                        h.is_some()
                    ))
                }
            }
            claims.push(x);
        }
        // Any family of martingale functionals gives a lower bound.
        for x in &claims {
            if let Some(h) = self.price(x)? {
                for q in &measures {
                    ensure(dot(q, x) <= h.price, || {
                        "a pricing measure exceeds D(X)".into()
                    })?;
                }
            }
        }
        Ok(())
    }

    fn sublinearity(&mut self) -> CheckResult {
        if martingale_polytope(&self.m.market, self.ord()).is_empty() {
            return Err("skip: prices are unbounded below".into());
        }
        let x = self.random_payoff(-4, 4);
        let y = self.random_payoff(-4, 4);
        let dx = self.finite_price(&x)?;
        let dy = self.finite_price(&y)?;
        let dxy = self.finite_price(&x.add(&y))?;
        ensure(dxy <= &dx + &dy, || "subadditivity fails".into())?;
        let lambda = Rational::new(self.rng.gen_range(1..=9), self.rng.gen_range(1..=4));
        ensure(
            self.finite_price(&x.scale(&lambda))? == &lambda * &dx,
            || "positive homogeneity fails".into(),
        )?;
        let c = small_rational(&mut self.rng, -3, 3);
        ensure(self.finite_price(&x.shift(&c))? == &dx + &c, || {
            "cash invariance fails".into()
        })?;
        let bump = self.random_payoff(0, 3);
        ensure(dx <= self.finite_price(&x.add(&bump))?, || {
            "monotonicity fails".into()
        })?;
        let generators = self.m.market.generators();
        if !generators.is_empty() {
            let g = &generators[self.rng.gen_range(0..generators.len())].payoff;
            let dxg = self.finite_price(&x.add(g))?;
            ensure(dxg <= dx, || "adding a net trade raised the price".into())?;
            if self.m.market.mode() == ConeMode::Linear {
                ensure(dxg == dx, || "adding a net trade changed the price".into())?;
            }
        }
        Ok(())
    }

    fn negligibles(&mut self) -> CheckResult {
        if martingale_polytope(&self.m.market, self.ord()).is_empty() {
            return Err("skip: prices are unbounded below".into());
        }
        let n = self.m.market.num_states();
        // Basis of negligible measurable claims, one coordinate per P_T cell.
        let lifted: Vec<Vec<Rational>> = self
            .ord()
            .test_matrix()
            .iter()
            .map(|row| {
                self.cells
                    .iter()
                    .map(|c| c.iter().map(|&s| row[s].clone()).sum())
                    .collect()
            })
            .collect();
        let basis = nullspace(&lifted, self.cells.len());
        if basis.is_empty() {
            return Err("skip: no nonzero negligible claims".into());
        }
        for _ in 0..2 {
            let mut z = vec![Rational::zero(); n];
            for b in &basis {
                let w = small_rational(&mut self.rng, -3, 3);
                for (cell, v) in self.cells.iter().zip(b) {
                    for &s in cell {
                        z[s] += &w * v;
                    }
                }
            }
            let dz = self.finite_price(&z)?;
            ensure(dz.is_zero(), || format!("negligible claim priced at {dz}"))?;
        }
        Ok(())
    }

    fn random_subset(&mut self) -> Vec<usize> {
        let n = self.m.market.num_states();
        let mut set: Vec<usize> = (0..n).filter(|_| self.rng.gen_bool(0.6)).collect();
        if set.is_empty() {
            set.push(self.rng.gen_range(0..n));
        }
        set
    }

    fn support(&mut self) -> CheckResult {
        if !self.ord().is_state_based() {
            return Err("skip: expectation order".into());
        }
        let market = &self.m.market;
        let n = market.num_states();
        let all: Vec<usize> = (0..n).collect();
        let full = support_set(market, self.ord(), &all).map_err(|e| e.to_string())?;
        ensure(full.agrees, || {
            "recursion disagrees with charging programs on Ω".into()
        })?;
        for _ in 0..3 {
            let set = self.random_subset();
            let r = support_set(market, self.ord(), &set).map_err(|e| e.to_string())?;
            ensure(r.agrees, || format!("recursion disagrees on {set:?}"))?;
            for rec in &r.records {
                ensure(rec.is_sound(market), || {
                    format!("unsound splitting at date {}", rec.time)
                })?;
            }
            ensure(r.support.iter().all(|s| full.support.contains(s)), || {
                "support is not monotone".into()
            })?;
            let again = support_set(market, self.ord(), &r.support).map_err(|e| e.to_string())?;
            ensure(again.support == r.support, || {
                "support is not idempotent".into()
            })?;
        }
        Ok(())
    }

    fn reduction(&mut self) -> CheckResult {
        if !self.ord().is_state_based() {
            return Err("skip: expectation order".into());
        }
        if self.rop_arbitrage {
            return Err("skip: market admits an arbitrage".into());
        }
        let x = self.random_payoff(-5, 5);
        let r = technical_reduction(&self.m.market, self.ord(), &x).map_err(|e| e.to_string())?;
        ensure(r.equal, || {
            format!("chain {} / {} / {}", r.price, r.set_price, r.dual_price)
        })
    }

    fn pricing_measures(&mut self) -> CheckResult {
        if !self.ord().is_state_based() {
            return Err("skip: expectation order".into());
        }
        let (market, ord) = (&self.m.market, &self.m.order);
        let n = market.num_states();
        let battery = ftap_battery(market, ord).map_err(|e| e.to_string())?;
        let all_found = battery.iter().all(|(_, m)| m.is_some());
        ensure(all_found != self.rop_arbitrage, || {
            "certificate battery disagrees with the arbitrage verdict".into()
        })?;
        if self.rop_arbitrage {
            let rel = market_relevance(market, RelevancePreset::Rop, ord);
            let cert = find_arbitrage(market, ord, &rel).expect("arbitrage present");
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
            let found =
                ftap_certificates(market, ord, &z, &cert.relevant).map_err(|e| e.to_string())?;
            ensure(found.is_none(), || {
                "a measure charges the arbitrage's relevant claim".into()
            })?;
        } else {
            let polar = ord.polar_mask().to_vec();
            let cells = self.cells.clone();
            let (null_cells, charged_cells): (Vec<&Vec<usize>>, Vec<&Vec<usize>>) =
                cells.iter().partition(|c| c.iter().all(|&s| polar[s]));
            for _ in 0..3 {
                let mut z = vec![Rational::zero(); n];
                for c in &null_cells {
                    if self.rng.gen_bool(0.5) {
                        let v = -small_rational(&mut self.rng, 1, 3);
                        for &s in c.iter() {
                            z[s] = v.clone();
                        }
                    }
                }
                let mut r = vec![Rational::zero(); n];
                let picked = charged_cells
                    .choose(&mut self.rng)
                    .expect("some cell is charged");
                for c in &cells {
                    let mut v = if std::ptr::eq(c, *picked) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    };
                    if self.rng.gen_bool(0.3) {
                        v += small_rational(&mut self.rng, 0, 2);
                    }
                    for &s in c {
                        r[s] = v.clone();
                    }
                }
                let q = ftap_certificates(market, ord, &z, &r).map_err(|e| e.to_string())?;
                let q =
                    q.ok_or_else(|| "no pricing measure for an arbitrage-free market".to_string())?;
                ensure(dot(&q, &r).is_positive() && dot(&q, &z).is_zero(), || {
                    "certificate measure has the wrong signs".into()
                })?;
            }
        }
        Ok(())
    }
}

/// Runs every cross-check on one market document. Random payoffs and sets
/// are drawn from `seed`.
pub fn equivalence_battery(doc: &MarketSpecDocument, seed: u64) -> BatteryResult {
    let loaded = match catch_unwind(|| doc.load()) {
        Ok(Ok(l)) => l,
        Ok(Err(e)) => {
            return BatteryResult {
                checks: vec![CheckOutcome {
                    name: "load",
                    status: CheckStatus::Failed(e.to_string()),
                }],
            }
        }
        Err(_) => {
            return BatteryResult {
                checks: vec![CheckOutcome {
                    name: "load",
                    status: CheckStatus::Failed("panic while loading".into()),
                }],
            }
        }
    };
    let rop = market_relevance(&loaded.market, RelevancePreset::Rop, &loaded.order);
    let rop_arbitrage = find_arbitrage(&loaded.market, &loaded.order, &rop).is_some();
    let cells = loaded.market.filtration().terminal().cells().to_vec();
    let mut b = Battery {
        m: &loaded,
        rng: ChaCha8Rng::seed_from_u64(seed),
        cells,
        rop_arbitrage,
    };
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(i, &name)| {
            let run = AssertUnwindSafe(|| match i {
                0 => b.agreement(),
                1 => b.duality(),
                2 => b.sublinearity(),
                3 => b.negligibles(),
                4 => b.support(),
                5 => b.reduction(),
                _ => b.pricing_measures(),
            });
            let status = match catch_unwind(run) {
                Ok(Ok(())) => CheckStatus::Passed,
                Ok(Err(msg)) => match msg.strip_prefix("skip: ") {
                    Some(reason) => CheckStatus::Skipped(reason.to_string()),
                    None => CheckStatus::Failed(msg),
                },
                Err(panic) => CheckStatus::Failed(format!(
                    "panic: {}",
                    panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default()
                )),
            };
            CheckOutcome { name, status }
        })
        .collect();
    BatteryResult { checks }
}

fn without_state(doc: &MarketSpecDocument, s: usize) -> Option<MarketSpecDocument> {
    if doc.states.len() <= 1 {
        return None;
    }
    let name = &doc.states[s];
    let mut d = doc.clone();
    d.states.remove(s);
    for part in d.filtration.iter_mut() {
        for cell in part.iter_mut() {
            cell.retain(|x| x != name);
        }
        part.retain(|c| !c.is_empty());
    }
    for a in d.assets.iter_mut() {
        for row in a.prices.iter_mut() {
            row.remove(s);
        }
    }
    if let Some(gens) = d.cone.generators.as_mut() {
        for g in gens.iter_mut() {
            g.remove(s);
        }
    }
    if let RelevanceDocument::Custom(CustomRelevance { custom }) = &mut d.relevance {
        for g in custom.iter_mut() {
            g.remove(s);
        }
    }
    if let Some(priors) = d.order.priors.as_mut() {
        let mut keep = Vec::new();
        for p in priors.iter_mut() {
            p.remove(s);
            let total: Rational = p.iter().sum();
            if total.is_zero() {
                keep.push(false);
                continue;
            }
            for v in p.iter_mut() {
                *v = &*v / &total;
            }
            keep.push(true);
        }
        if !keep.iter().any(|&k| k) {
            return None;
        }
        let mut i = 0;
        priors.retain(|_| {
            i += 1;
            keep[i - 1]
        });
        if let Some(w) = d.order.mixture_weights.as_mut() {
            let mut i = 0;
            w.retain(|_| {
                i += 1;
                keep[i - 1]
            });
            let total: Rational = w.iter().sum();
            if total.is_zero() {
                return None;
            }
            for v in w.iter_mut() {
                *v = &*v / &total;
            }
        }
    }
    Some(d)
}

fn without_time(doc: &MarketSpecDocument, t: usize) -> Option<MarketSpecDocument> {
    if doc.filtration.len() <= 2 || t == 0 {
        return None;
    }
    let mut d = doc.clone();
    d.filtration.remove(t);
    for a in d.assets.iter_mut() {
        a.prices.remove(t);
    }
    Some(d)
}

fn without_asset(doc: &MarketSpecDocument, j: usize) -> Option<MarketSpecDocument> {
    if doc.assets.len() <= 1 {
        return None;
    }
    let mut d = doc.clone();
    let name = d.assets.remove(j).name;
    d.cone.long_only.retain(|a| *a != name);
    Some(d)
}

type Removal = fn(&MarketSpecDocument, usize) -> Option<MarketSpecDocument>;
type Count = fn(&MarketSpecDocument) -> usize;

/// Greedily removes states, then dates, then assets while `still_fails`
/// holds and the document stays loadable.
pub fn shrink<F>(doc: &MarketSpecDocument, still_fails: F) -> MarketSpecDocument
where
    F: Fn(&MarketSpecDocument) -> bool,
{
    let mut current = doc.clone();
    loop {
        let mut changed = false;
        let passes: [(Removal, Count); 3] = [
            (without_state, |d| d.states.len()),
            (without_time, |d| d.filtration.len()),
            (without_asset, |d| d.assets.len()),
        ];
        for (remove, count) in passes {
            let mut i = 0;
            while i < count(&current) {
                match remove(&current, i) {
                    Some(candidate) if candidate.load().is_ok() && still_fails(&candidate) => {
                        current = candidate;
                        changed = true;
                    }
                    _ => i += 1,
                }
            }
        }
        if !changed {
            return current;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzFailure {
    pub index: usize,
    pub market_seed: u64,
    pub check: &'static str,
    pub message: String,
    pub counterexample: MarketSpecDocument,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckTally {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzSummary {
    pub markets: usize,
    pub seed: u64,
    pub tallies: Vec<CheckTally>,
    pub failures: Vec<FuzzFailure>,
}

/// Seed of the `index`-th market of a run.
pub fn market_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 step, so neighbouring runs do not share markets.
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index as u64)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates `count` markets and runs the battery on each; failing markets
/// are shrunk to a minimal document that still fails the same check.
pub fn run_fuzz(cfg: &GeneratorConfig, count: usize) -> FuzzSummary {
    let results: Vec<(usize, u64, MarketSpecDocument, BatteryResult)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let s = market_seed(cfg.seed, i);
            let doc = generate_market(cfg, s);
            let result = equivalence_battery(&doc, s);
            (i, s, doc, result)
        })
        .collect();
    let mut tallies: Vec<CheckTally> = CHECKS
        .iter()
        .map(|&name| CheckTally {
            name,
            passed: 0,
            failed: 0,
            skipped: 0,
        })
        .collect();
    let mut failures = Vec::new();
    for (i, s, doc, result) in results {
        for c in &result.checks {
            if let Some(t) = tallies.iter_mut().find(|t| t.name == c.name) {
                match c.status {
                    CheckStatus::Passed => t.passed += 1,
                    CheckStatus::Failed(_) => t.failed += 1,
                    CheckStatus::Skipped(_) => t.skipped += 1,
                }
            }
        }
        if let Some(f) = result.first_failure() {
            let name = f.name;
            let message = match &f.status {
                CheckStatus::Failed(m) => m.clone(),
                _ => String::new(),
            };
            let counterexample = shrink(&doc, |d| {
                equivalence_battery(d, s)
                    .first_failure()
                    .is_some_and(|g| g.name == name)
            });
            failures.push(FuzzFailure {
                index: i,
                market_seed: s,
                check: name,
                message,
                counterexample,
            });
        }
    }
    FuzzSummary {
        markets: count,
        seed: cfg.seed,
        tallies,
        failures,
    }
}
