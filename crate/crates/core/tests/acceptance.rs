//! Acceptance suite: one line per criterion, exit status 1 if any fails.
//! Runs without the libtest harness so the lines always reach the output.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use knightmark_core::arbitrage::{find_arbitrage, market_relevance};
use knightmark_core::emh::{knightian_strong, knightian_weak, strong_emh, weak_emh, EmhError};
use knightmark_core::fuzz::{generate_market, market_seed, run_fuzz, GeneratorConfig, CHECKS};
use knightmark_core::io::{parse_spec, read_spec, LoadedMarket};
use knightmark_core::linalg::rank;
use knightmark_core::market::Payoff;
use knightmark_core::order::RelevancePreset;
use knightmark_core::polytope::{martingale_polytope, PolytopeError};
use knightmark_core::rational::{qvec, Rational};
use knightmark_core::superhedge::{full_support_check, sublinear_expectation, superhedge_price};
use knightmark_core::support::support_set;

type Verdict = Result<String, String>;

fn fixture(name: &str) -> LoadedMarket {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    read_spec(&path).unwrap().load().unwrap()
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn fuzz_seed() -> u64 {
    std::env::var("KNIGHTMARK_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(2024)
}

fn fuzz_markets(count: usize, seed: u64) -> Vec<LoadedMarket> {
    let cfg = GeneratorConfig::default();
    (0..count)
        .map(|i| generate_market(&cfg, market_seed(seed, i)).load().unwrap())
        .collect()
}

fn random_claim(rng: &mut ChaCha8Rng, m: &LoadedMarket) -> Payoff {
    let mut x = vec![Rational::zero(); m.market.num_states()];
    for cell in m.market.filtration().terminal().cells() {
        let v = Rational::new(rng.gen_range(-20..=20), rng.gen_range(1..=4));
        for &s in cell {
            x[s] = v.clone();
        }
    }
    Payoff(x)
}

fn random_prior(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0
                } else {
                    rng.gen_range(1..=5)
                }
            })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| Rational::new(x, total)).collect();
        }
    }
}

fn two_prior_golden() -> Verdict {
    let m = fixture("two-priors.json");
    let quarter = Rational::new(1, 4);
    let uniform = vec![quarter.clone(); 4];
    let vertices = martingale_polytope(&m.market, &m.order)
        .vertices()
        .map_err(|e| e.to_string())?;
    check(vertices == vec![uniform.clone()], || {
        format!("vertices {vertices:?}")
    })?;
    let priors = match &m.order.kind() {
        knightmark_core::order::OrderKind::Expectation(p) => p.clone(),
        other => return Err(format!("unexpected order {}", other.name())),
    };
    let r = knightian_strong(&m.market, &priors).map_err(|e| e.to_string())?;
    check(r.verdict, || "knightian strong verdict is false".into())?;
    check(r.witnesses == vec![uniform], || {
        "witness is not the uniform point".into()
    })?;
    // Payoffs with unambiguous mean are exactly those with x1 = x2.
    let basis = r.mean_unambiguous_basis.unwrap_or_default();
    check(basis.len() == 3 && rank(&basis, 4) == 3, || {
        format!("basis {basis:?}")
    })?;
    check(basis.iter().all(|b| b[0] == b[1]), || {
        "a basis vector has x1 != x2".into()
    })?;
    Ok("single point (1/4, 1/4, 1/4, 1/4); unambiguous means span {x1 = x2}".into())
}

fn bond_stock_market(u: &Rational, d: &Rational, r: &Rational) -> LoadedMarket {
    let growth = Rational::one() + r;
    let doc = format!(
        r#"{{"states":["up","down"],"filtration":[[["up","down"]],[["up"],["down"]]],
            "assets":[{{"name":"B","prices":[[1,1],["{growth}","{growth}"]]}},
                      {{"name":"S","prices":[[1,1],["{u}","{d}"]]}}]}}"#
    );
    parse_spec(doc.as_bytes())
        .unwrap()
        .with_numeraire("B")
        .unwrap()
        .load()
        .unwrap()
}

fn bond_stock_formula() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let (mut free, mut arb) = (0, 0);
    for _ in 0..100 {
        let r = Rational::new(rng.gen_range(0..=20), 100);
        let a: i64 = rng.gen_range(50..=180);
        let b: i64 = loop {
            let b = rng.gen_range(50..=180);
            if b != a {
                break b;
            }
        };
        let (d, u) = (Rational::new(a.min(b), 100), Rational::new(a.max(b), 100));
        let growth = Rational::one() + &r;
        let m = bond_stock_market(&u, &d, &r);
        if d < growth && growth < u {
            let p_up = (&growth - &d) / (&u - &d);
            let expected = vec![p_up.clone(), Rational::one() - &p_up];
            let vertices = martingale_polytope(&m.market, &m.order)
                .vertices()
                .map_err(|e| e.to_string())?;
            check(vertices == vec![expected.clone()], || {
                format!("u={u} d={d} r={r}: {vertices:?} != {expected:?}")
            })?;
            check(
                find_arbitrage(&m.market, &m.order, &m.relevance).is_none(),
                || format!("u={u} d={d} r={r}: spurious arbitrage"),
            )?;
            free += 1;
        } else {
            continue_with_arbitrage(&u, &d, &r, &mut arb)?;
        }
    }
    check(free > 0 && arb > 0, || {
        format!("unbalanced sample: {free} free, {arb} arbitrage")
    })?;
    Ok(format!(
        "{free} arbitrage-free triples priced by the formula, {arb} certificates"
    ))
}

fn continue_with_arbitrage(
    u: &Rational,
    d: &Rational,
    r: &Rational,
    arb: &mut usize,
) -> Result<(), String> {
    let m = bond_stock_market(u, d, r);
    let cert = find_arbitrage(&m.market, &m.order, &m.relevance)
        .ok_or_else(|| format!("u={u} d={d} r={r}: no arbitrage found"))?;
    cert.verify(&m.market, &m.order)
        .map_err(|e| e.to_string())?;
    *arb += 1;
    Ok(())
}

fn kreps() -> Verdict {
    let m = fixture("kreps.json");
    let cert = find_arbitrage(&m.market, &m.order, &m.relevance).ok_or("no arbitrage found")?;
    cert.verify(&m.market, &m.order)
        .map_err(|e| e.to_string())?;
    let k = cert.payoff[1].clone();
    check(
        k.is_positive()
            && cert.payoff.0 == qvec(&[0, 1, 1]).iter().map(|x| x * &k).collect::<Vec<_>>(),
        || {
            format!(
                "net trade {:?} is not a multiple of 1_{{w>0}}",
                cert.payoff.0
            )
        },
    )?;
    let poly = martingale_polytope(&m.market, &m.order);
    let vertices = poly.vertices().map_err(|e| e.to_string())?;
    check(vertices == vec![qvec(&[1, 0, 0])], || {
        format!("polytope {vertices:?}")
    })?;
    for s in [1, 2] {
        let charge = poly.max_state_mass(s).map(|p| p.value).unwrap_or_default();
        check(charge.is_zero(), || format!("state {s} is charged"))?;
    }
    let viability = full_support_check(&m.market, &m.order, &m.relevance);
    check(!viability.passes, || "viability passes".into())?;
    Ok(
        "certificate 1_{w>0}; interpretation: the polytope is {delta_0}, so no element \
        charges w=1 or w=2 (empty on the relevant states) and viability fails"
            .into(),
    )
}

fn three_point() -> Verdict {
    let m = fixture("uniform3.json");
    let poly = martingale_polytope(&m.market, &m.order);
    let half = Rational::new(1, 2);
    let expected = vec![
        qvec(&[0, 1, 0]),
        vec![half.clone(), Rational::zero(), half.clone()],
    ];
    let vertices = poly.vertices().map_err(|e| e.to_string())?;
    check(vertices == expected, || format!("vertices {vertices:?}"))?;
    let rop = market_relevance(&m.market, RelevancePreset::Rop, &m.order);
    check(full_support_check(&m.market, &m.order, &rop).passes, || {
        "full support fails".into()
    })?;
    for w in 0..3 {
        // ½(δ_ω + δ_{1−ω}); states are ordered 0, 1/2, 1.
        let mut q = vec![Rational::zero(); 3];
        q[w] += &half;
        q[2 - w] += &half;
        check(poly.contains(&q) && q[w].is_positive(), || {
            format!("charging measure for state {w}")
        })?;
    }
    Ok("vertices {(0,1,0), (1/2,0,1/2)}; every state charged".into())
}

fn fuzz_battery() -> Verdict {
    let cfg = GeneratorConfig {
        seed: fuzz_seed(),
        ..Default::default()
    };
    let summary = run_fuzz(&cfg, 500);
    if let Some(f) = summary.failures.first() {
        return Err(format!(
            "{} failures; first: market {} check {}: {}\n{}",
            summary.failures.len(),
            f.index,
            f.check,
            f.message,
            serde_json::to_string(&f.counterexample).unwrap()
        ));
    }
    let tallies: Vec<String> = summary
        .tallies
        .iter()
        .map(|t| format!("{} {} passed/{} skipped", t.name, t.passed, t.skipped))
        .collect();
    check(summary.tallies.len() == CHECKS.len(), || {
        "missing checks".into()
    })?;
    Ok(format!(
        "seed {}, 0 failures; {}",
        cfg.seed,
        tallies.join(", ")
    ))
}

fn duality_stress() -> Verdict {
    let markets = fuzz_markets(500, fuzz_seed());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut compared = 0;
    for (i, m) in markets.iter().enumerate() {
        if find_arbitrage(&m.market, &m.order, &m.relevance).is_some() {
            continue;
        }
        for _ in 0..5 {
            let x = random_claim(&mut rng, m);
            let primal = superhedge_price(&m.market, &m.order, &x)
                .map_err(|e| format!("market {i}: {e}"))?
                .price;
            let dual = sublinear_expectation(&m.market, &m.order, &x)
                .map_err(|e| format!("market {i}: {e}"))?;
            check(primal == dual, || format!("market {i}: {primal} != {dual}"))?;
            compared += 1;
        }
    }
    check(compared > 0, || "no arbitrage-free markets".into())?;
    Ok(format!(
        "{compared} claims on {} arbitrage-free markets, all equal",
        compared / 5
    ))
}

fn support_cross_check() -> Verdict {
    let markets = fuzz_markets(500, fuzz_seed());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sets = 0;
    for (i, m) in markets.iter().enumerate() {
        if !m.order.is_state_based() {
            continue;
        }
        let n = m.market.num_states();
        let mut candidates = vec![(0..n).collect::<Vec<_>>()];
        for _ in 0..3 {
            let mut s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
            if s.is_empty() {
                s.push(rng.gen_range(0..n));
            }
            candidates.push(s);
        }
        for set in candidates {
            let r =
                support_set(&m.market, &m.order, &set).map_err(|e| format!("market {i}: {e}"))?;
            check(r.agrees, || format!("market {i}, set {set:?}"))?;
            sets += 1;
        }
    }
    Ok(format!(
        "{sets} sets, recursion and charging programs agree"
    ))
}

fn emh_hierarchy() -> Verdict {
    let markets = fuzz_markets(100, fuzz_seed().wrapping_add(1));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut strong_true, mut weak_true) = (0, 0);
    for (i, m) in markets.iter().enumerate() {
        let n = m.market.num_states();
        let pointwise =
            knightmark_core::order::build_order(n, knightmark_core::order::OrderKind::Pointwise)
                .unwrap();
        // Every third prior is a martingale measure, so the strong form is exercised.
        let p = match (
            i % 3,
            martingale_polytope(&m.market, &pointwise).feasible_point(),
        ) {
            (0, Some(q)) => q,
            _ => random_prior(&mut rng, n),
        };
        let strong = strong_emh(&m.market, &p).map_err(|e| e.to_string())?;
        let weak = weak_emh(&m.market, &p).map_err(|e| e.to_string())?;
        check(!strong.verdict || weak.verdict, || {
            format!("market {i}: strong holds, weak fails")
        })?;
        let k_strong = match knightian_strong(&m.market, std::slice::from_ref(&p)) {
            Ok(r) => r.verdict,
            Err(EmhError::Polytope(PolytopeError::EmptyPolytope)) => false,
            Err(e) => return Err(e.to_string()),
        };
        check(k_strong == strong.verdict, || {
            format!("market {i}: singleton strong forms differ")
        })?;
        let k_weak =
            knightian_weak(&m.market, std::slice::from_ref(&p)).map_err(|e| e.to_string())?;
        check(
            k_weak.verdict == weak.verdict
                && k_weak.chargeable == weak.chargeable
                && k_weak.prior_support == weak.prior_support,
            || format!("market {i}: singleton weak forms differ"),
        )?;
        strong_true += strong.verdict as usize;
        weak_true += weak.verdict as usize;
    }
    Ok(format!(
        "100 markets, strong held {strong_true} times, weak {weak_true}; singleton forms agree"
    ))
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Duration,
    run: fn() -> Verdict,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "two-prior golden polytope and knightian strong form",
            budget: Duration::from_secs(1),
            run: two_prior_golden,
        },
        Criterion {
            id: 2,
            name: "one-period bond/stock risk-neutral formula",
            budget: Duration::from_secs(5),
            run: bond_stock_formula,
        },
        Criterion {
            id: 3,
            name: "kreps market arbitrage and viability failure",
            budget: Duration::from_secs(1),
            run: kreps,
        },
        Criterion {
            id: 4,
            name: "three-point market vertices and charging measures",
            budget: Duration::from_secs(1),
            run: three_point,
        },
        Criterion {
            id: 5,
            name: "500-market equivalence battery",
            budget: Duration::from_secs(600),
            run: fuzz_battery,
        },
        Criterion {
            id: 6,
            name: "duality stress on arbitrage-free fuzzed markets",
            budget: Duration::from_secs(600),
            run: duality_stress,
        },
        Criterion {
            id: 7,
            name: "support recursion against charging programs",
            budget: Duration::from_secs(600),
            run: support_cross_check,
        },
        Criterion {
            id: 8,
            name: "efficient-market hierarchy on fuzzed markets",
            budget: Duration::from_secs(600),
            run: emh_hierarchy,
        },
    ];
    let mut failed = 0;
    for c in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.budget => {
                Err(format!("took {elapsed:.2?}, budget {:?}", c.budget))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {}: {} ({elapsed:.2?}) {detail}",
                c.id, c.name
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "FAIL criterion {}: {} ({elapsed:.2?}) {detail}",
                    c.id, c.name
                );
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
