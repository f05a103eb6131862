//! Command-line surface: parses arguments, runs one analysis and renders the
//! report as JSON or as a plain table.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use knightmark_core::arbitrage::{
    check_nflvr, find_arbitrage, find_one_step_arbitrage, NflvrVerdict,
};
use knightmark_core::emh::{
    knightian_strong, knightian_weak, smooth_emh, strong_emh, weak_emh, EmhVariant,
};
use knightmark_core::fuzz::{equivalence_battery, run_fuzz, GeneratorConfig};
use knightmark_core::io::{
    parse_payoff, parse_state_set, read_spec, LoadedMarket, MarketSpecDocument,
};
use knightmark_core::polytope::{martingale_polytope, PolytopeError};
use knightmark_core::superhedge::{
    full_support_check, sublinear_expectation, superhedge_price, SuperhedgeError,
};
use knightmark_core::support::support_set;

/// Exit code for malformed input or requests the market cannot answer.
pub const EXIT_INPUT: i32 = 2;
/// Exit code when a self-check inside the tool fails.
pub const EXIT_INTERNAL: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Human,
}

#[derive(Debug, Parser)]
#[command(
    name = "knightmark",
    version,
    about = "Exact no-arbitrage analysis of finite markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads for batched linear programs.
    #[arg(long, global = true)]
    parallel: Option<usize>,
}

#[derive(Debug, clap::Args)]
struct SpecArgs {
    /// Market specification (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Re-express prices in units of this asset before the analysis.
    #[arg(long)]
    numeraire: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Strong,
    Weak,
    KStrong,
    KWeak,
    Smooth,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a specification.
    Validate(SpecArgs),
    /// Search for an arbitrage and run the no-free-lunch check.
    Arbitrage(SpecArgs),
    /// Cheapest super-replication price of a claim.
    Superhedge {
        #[command(flatten)]
        spec: SpecArgs,
        /// Claim as an inline JSON array/object or a file path.
        #[arg(long)]
        payoff: String,
    },
    /// The polytope of normalized martingale functionals.
    Polytope(SpecArgs),
    /// Check that every relevant claim is charged by some martingale functional.
    Viability(SpecArgs),
    /// States charged by martingale measures living on a set.
    Support {
        #[command(flatten)]
        spec: SpecArgs,
        /// States as a comma list, JSON array or file; defaults to all states.
        #[arg(long)]
        set: Option<String>,
    },
    /// Efficient-market diagnostics against the priors in the specification.
    Emh {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum)]
        variant: VariantArg,
        /// Prior used by the single-prior variants.
        #[arg(long, default_value_t = 0)]
        prior: usize,
    },
    /// Every applicable analysis in one document.
    Report {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        payoff: Option<String>,
    },
    /// Generate random markets and run the cross-check battery on each.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Defaults to KNIGHTMARK_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 12)]
        max_states: usize,
        #[arg(long, default_value_t = 3)]
        max_times: usize,
        #[arg(long, default_value_t = 2)]
        max_assets: usize,
    },
}

/// Exit code plus the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutput {
    fn input_error(message: String) -> Self {
        Self {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    fn internal(message: impl ToString) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<(Value, i32), Failure>;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values always serialize")
}

fn load_doc(args: &SpecArgs) -> Result<MarketSpecDocument, Failure> {
    let doc = read_spec(&args.spec).map_err(Failure::input)?;
    match &args.numeraire {
        Some(asset) => doc.with_numeraire(asset).map_err(Failure::input),
        None => Ok(doc),
    }
}

fn load(args: &SpecArgs) -> Result<(MarketSpecDocument, LoadedMarket), Failure> {
    let doc = load_doc(args)?;
    let loaded = doc.load().map_err(Failure::input)?;
    Ok((doc, loaded))
}

fn echo(name: &str, args: &SpecArgs, extra: Value) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), json!(name));
    m.insert("spec".into(), json!(args.spec.display().to_string()));
    if let Some(n) = &args.numeraire {
        m.insert("numeraire".into(), json!(n));
    }
    if let Value::Object(extra) = extra {
        m.extend(extra);
    }
    Value::Object(m)
}

fn document(command: Value, states: &[String], result: Value, backed_by: &[&str]) -> Value {
    json!({
        "command": command,
        "states": states,
        "result": result,
        "backed_by": backed_by,
    })
}

fn validate_section(doc: &MarketSpecDocument, m: &LoadedMarket) -> Value {
    json!({
        "valid": true,
        "states": m.market.num_states(),
        "horizon": m.market.horizon(),
        "assets": m.market.assets(),
        "cone_mode": to_value(&m.market.mode()),
        "net_trade_generators": m.market.generators().len(),
        "order": m.order.kind().name(),
        "polar_states": m.market.labels_of(&m.order.polar_states()),
        "relevance": to_value(&m.relevance.preset),
        "relevance_generators": m.relevance.generators.len(),
        "relevance_exact": m.relevance.exact,
        "terminal_cells": doc.filtration.last().map_or(0, |p| p.len()),
    })
}

fn arbitrage_section(m: &LoadedMarket) -> Result<Value, Failure> {
    let (market, ord, rel) = (&m.market, &m.order, &m.relevance);
    let cert = find_arbitrage(market, ord, rel);
    if let Some(c) = &cert {
        c.verify(market, ord).map_err(Failure::internal)?;
    }
    let nflvr = check_nflvr(market, ord, rel);
    let one_step = if ord.is_state_based() {
        let found = find_one_step_arbitrage(market, ord).map_err(Failure::input)?;
        if let Some(o) = &found {
            o.certificate
                .verify(market, ord)
                .map_err(Failure::internal)?;
        }
        to_value(&found)
    } else {
        json!({"skipped": "one-step search needs a state-based order"})
    };
    let holdings = cert.as_ref().map(|c| market.holdings(&c.coefficients));
    Ok(json!({
        "verdict": if cert.is_some() { "arbitrage" } else { "strongly_free" },
        "certificate": to_value(&cert),
        "holdings": to_value(&holdings),
        "verified": true,
        "one_step": one_step,
        "no_free_lunch": {
            "verdict": match nflvr.verdict {
                NflvrVerdict::StronglyFree => "strongly_free",
                NflvrVerdict::FreeLunch { .. } => "free_lunch",
            },
            "justification": to_value(&nflvr.justification),
            "generator_prices": to_value(&nflvr.generator_prices),
            "consistent": nflvr.consistent,
        },
    }))
}

fn superhedge_section(m: &LoadedMarket, payoff: &str, states: &[String]) -> Result<Value, Failure> {
    let claim = parse_payoff(payoff, states).map_err(Failure::input)?;
    let (market, ord) = (&m.market, &m.order);
    match superhedge_price(market, ord, &claim) {
        Ok(cert) => {
            cert.verify(market, ord, &claim)
                .map_err(Failure::internal)?;
            let dual = sublinear_expectation(market, ord, &claim).map_err(Failure::internal)?;
            Ok(json!({
                "claim": to_value(&claim),
                "price": to_value(&cert.price),
                "dual_value": to_value(&dual),
                "duality_holds": dual == cert.price,
                "hedge": to_value(&cert),
                "verified": true,
            }))
        }
        Err(SuperhedgeError::UnboundedBelow(cert)) => {
            cert.verify(market, ord).map_err(Failure::internal)?;
            Ok(json!({
                "claim": to_value(&claim),
                "price": Value::Null,
                "unbounded_below": true,
                "certificate": to_value(&cert),
                "verified": true,
            }))
        }
        Err(SuperhedgeError::Payoff(e)) => Err(Failure::input(e)),
    }
}

fn polytope_section(m: &LoadedMarket) -> Result<Value, Failure> {
    let poly = martingale_polytope(&m.market, &m.order);
    if poly.is_empty() {
        return Ok(json!({"empty": true, "vertices": []}));
    }
    match poly.vertices() {
        Ok(vs) => Ok(json!({"empty": false, "vertices": to_value(&vs)})),
        Err(PolytopeError::TooLarge { states, cap }) => Ok(json!({
            "empty": false,
            "feasible_point": to_value(&poly.feasible_point()),
            "note": format!("vertex enumeration skipped: {states} states exceed the cap of {cap}"),
        })),
        Err(e) => Err(Failure::internal(e)),
    }
}

fn viability_section(m: &LoadedMarket) -> Value {
    to_value(&full_support_check(&m.market, &m.order, &m.relevance))
}

fn support_section(m: &LoadedMarket, set: &[usize]) -> Result<Value, Failure> {
    let r = support_set(&m.market, &m.order, set).map_err(Failure::input)?;
    let mut v = to_value(&r);
    if let Value::Object(obj) = &mut v {
        obj.insert(
            "support_labels".into(),
            json!(m.market.labels_of(&r.support)),
        );
    }
    Ok(v)
}

fn emh_section(
    doc: &MarketSpecDocument,
    m: &LoadedMarket,
    variant: VariantArg,
    prior: usize,
) -> Result<Value, Failure> {
    let priors = doc
        .order
        .priors
        .as_ref()
        .ok_or_else(|| Failure::input("the specification lists no priors"))?;
    let single = || {
        priors
            .get(prior)
            .ok_or_else(|| Failure::input(format!("prior {prior} does not exist")))
    };
    let report = match variant {
        VariantArg::Strong => strong_emh(&m.market, single()?),
        VariantArg::Weak => weak_emh(&m.market, single()?),
        VariantArg::KStrong => knightian_strong(&m.market, priors),
        VariantArg::KWeak => knightian_weak(&m.market, priors),
        VariantArg::Smooth => {
            let weights = doc
                .order
                .mixture_weights
                .as_ref()
                .ok_or_else(|| Failure::input("smooth variant needs mixture_weights"))?;
            smooth_emh(&m.market, weights, priors)
        }
    };
    report.map(|r| to_value(&r)).map_err(Failure::input)
}

fn emh_tag(variant: VariantArg) -> &'static str {
    match variant {
        VariantArg::Strong => "prior_is_martingale_measure",
        VariantArg::Weak => "equivalent_martingale_measure",
        VariantArg::KStrong => "martingale_functionals_in_prior_hull",
        VariantArg::KWeak => "martingale_measures_share_prior_null_sets",
        VariantArg::Smooth => "mixture_equivalent_martingale_measure",
    }
}

fn skipped(reason: impl ToString) -> Value {
    json!({"skipped": reason.to_string()})
}

fn report_section(
    doc: &MarketSpecDocument,
    m: &LoadedMarket,
    payoff: Option<&str>,
) -> Result<Value, Failure> {
    let all: Vec<usize> = (0..m.market.num_states()).collect();
    let mut out = Map::new();
    out.insert("validate".into(), validate_section(doc, m));
    out.insert("arbitrage".into(), arbitrage_section(m)?);
    out.insert("polytope".into(), polytope_section(m)?);
    out.insert("viability".into(), viability_section(m));
    let support = if m.order.is_state_based() {
        support_section(m, &all)?
    } else {
        skipped("support sets need a state-based order")
    };
    out.insert("support".into(), support);
    if let Some(p) = payoff {
        out.insert("superhedge".into(), superhedge_section(m, p, &doc.states)?);
    }
    if doc.order.priors.is_some() {
        let mut emh = Map::new();
        let variants = [
            ("strong", VariantArg::Strong),
            ("weak", VariantArg::Weak),
            ("k-strong", VariantArg::KStrong),
            ("k-weak", VariantArg::KWeak),
            ("smooth", VariantArg::Smooth),
        ];
        for (name, v) in variants {
            let section = match emh_section(doc, m, v, 0) {
                Ok(r) => r,
                Err(f) if f.code == EXIT_INPUT => skipped(f.message),
                Err(f) => return Err(f),
            };
            emh.insert(name.into(), section);
        }
        out.insert("emh".into(), Value::Object(emh));
    }
    let battery = equivalence_battery(doc, 0);
    out.insert("cross_checks".into(), to_value(&battery));
    Ok(Value::Object(out))
}

fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate(args) => {
            let (doc, m) = load(args)?;
            Ok((
                document(
                    echo("validate", args, json!({})),
                    &doc.states,
                    validate_section(&doc, &m),
                    &[],
                ),
                0,
            ))
        }
        Command::Arbitrage(args) => {
            let (doc, m) = load(args)?;
            Ok((
                document(
                    echo("arbitrage", args, json!({})),
                    &doc.states,
                    arbitrage_section(&m)?,
                    &[
                        "strong_no_arbitrage_iff_viable",
                        "one_step_reduction",
                        "lattice_attainment",
                    ],
                ),
                0,
            ))
        }
        Command::Superhedge { spec, payoff } => {
            let (doc, m) = load(spec)?;
            let result = superhedge_section(&m, payoff, &doc.states)?;
            Ok((
                document(
                    echo("superhedge", spec, json!({"payoff": payoff})),
                    &doc.states,
                    result,
                    &["superhedging_duality"],
                ),
                0,
            ))
        }
        Command::Polytope(args) => {
            let (doc, m) = load(args)?;
            Ok((
                document(
                    echo("polytope", args, json!({})),
                    &doc.states,
                    polytope_section(&m)?,
                    &["martingale_functional_polytope"],
                ),
                0,
            ))
        }
        Command::Viability(args) => {
            let (doc, m) = load(args)?;
            Ok((
                document(
                    echo("viability", args, json!({})),
                    &doc.states,
                    viability_section(&m),
                    &["strong_no_arbitrage_iff_viable"],
                ),
                0,
            ))
        }
        Command::Support { spec, set } => {
            let (doc, m) = load(spec)?;
            let states = match set {
                Some(s) => parse_state_set(s, &doc.states).map_err(Failure::input)?,
                None => (0..doc.states.len()).collect(),
            };
            Ok((
                document(
                    echo("support", spec, json!({"set": m.market.labels_of(&states)})),
                    &doc.states,
                    support_section(&m, &states)?,
                    &["backward_support_recursion"],
                ),
                0,
            ))
        }
        Command::Emh {
            spec,
            variant,
            prior,
        } => {
            let (doc, m) = load(spec)?;
            let result = emh_section(&doc, &m, *variant, *prior)?;
            let name = to_value(&match variant {
                VariantArg::Strong => EmhVariant::Strong,
                VariantArg::Weak => EmhVariant::Weak,
                VariantArg::KStrong => EmhVariant::KStrong,
                VariantArg::KWeak => EmhVariant::KWeak,
                VariantArg::Smooth => EmhVariant::Smooth,
            });
            Ok((
                document(
                    echo("emh", spec, json!({"variant": name, "prior": prior})),
                    &doc.states,
                    result,
                    &[emh_tag(*variant)],
                ),
                0,
            ))
        }
        Command::Report { spec, payoff } => {
            let (doc, m) = load(spec)?;
            let result = report_section(&doc, &m, payoff.as_deref())?;
            Ok((
                document(
                    echo("report", spec, json!({"payoff": payoff})),
                    &doc.states,
                    result,
                    &[
                        "strong_no_arbitrage_iff_viable",
                        "superhedging_duality",
                        "backward_support_recursion",
                    ],
                ),
                0,
            ))
        }
        Command::Fuzz {
            count,
            seed,
            max_states,
            max_times,
            max_assets,
        } => {
            let seed = match seed {
                Some(s) => *s,
                None => match std::env::var("KNIGHTMARK_SEED") {
                    Ok(s) => s.parse().map_err(|_| {
                        Failure::input(format!("KNIGHTMARK_SEED={s:?} is not a number"))
                    })?,
                    Err(_) => 0,
                },
            };
            let cfg = GeneratorConfig {
                max_states: *max_states,
                max_times: *max_times,
                max_assets: *max_assets,
                seed,
                ..Default::default()
            };
            cfg.validate().map_err(Failure::input)?;
            let summary = run_fuzz(&cfg, *count);
            let code = if summary.failures.is_empty() {
                0
            } else {
                EXIT_INTERNAL
            };
            Ok((
                json!({
                    "command": {"name": "fuzz", "count": count, "seed": seed, "config": to_value(&cfg)},
                    "result": to_value(&summary),
                }),
                code,
            ))
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn render_human(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                render_human(&key, child, out);
            }
        }
        Value::Array(items) => {
            let flat: Option<Vec<String>> = items.iter().map(scalar).collect();
            match flat {
                Some(xs) => out.push_str(&format!("{prefix}: ({})\n", xs.join(", "))),
                None => {
                    for (i, child) in items.iter().enumerate() {
                        render_human(&format!("{prefix}[{i}]"), child, out);
                    }
                }
            }
        }
        other => {
            out.push_str(&format!(
                "{prefix}: {}\n",
                scalar(other).unwrap_or_default()
            ));
        }
    }
}

/// Renders a report in the requested format.
pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
            s.push('\n');
            s
        }
        Format::Human => {
            let mut s = String::new();
            render_human("", report, &mut s);
            s
        }
    }
}

/// Runs one command line (including the program name) to completion.
pub fn run_command<I, S>(argv: I) -> CommandOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CommandOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                CommandOutput::input_error(
                    text.trim_start_matches("error: ").trim_end().to_string(),
                )
            };
        }
    };
    let outcome = match cli.parallel {
        Some(0) => return CommandOutput::input_error("--parallel must be at least 1".into()),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => return CommandOutput::input_error(format!("cannot start worker pool: {e}")),
        },
        None => execute(&cli),
    };
    match outcome {
        Ok((report, code)) => CommandOutput {
            code,
            stdout: render(&report, cli.format),
            stderr: String::new(),
        },
        Err(f) => CommandOutput {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}
