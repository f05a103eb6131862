use knightmark_cli::{run_command, CommandOutput, EXIT_INPUT};
use knightmark_core::io::read_spec;
use knightmark_core::order::dominates;
use knightmark_core::rational::Rational;
use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> CommandOutput {
    let mut argv = vec!["knightmark"];
    argv.extend_from_slice(args);
    run_command(argv)
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn rationals(v: &Value) -> Vec<Rational> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn binomial_call_costs_one_third() {
    let spec = fixture("binomial.json");
    let v = run_json(&["superhedge", "--spec", &spec, "--payoff", "[1,0]"]);
    assert_eq!(v["result"]["price"], "1/3");
    assert_eq!(v["result"]["dual_value"], "1/3");
    assert_eq!(
        v["result"]["hedge"]["pricing_measure"],
        serde_json::json!(["1/3", "2/3"])
    );
    assert_eq!(v["backed_by"][0], "superhedging_duality");
}

#[test]
fn two_prior_market_has_the_uniform_witness() {
    let spec = fixture("two-priors.json");
    let v = run_json(&["emh", "--spec", &spec, "--variant", "k-strong"]);
    assert_eq!(v["result"]["verdict"], true);
    assert_eq!(
        v["result"]["witnesses"],
        serde_json::json!([["1/4", "1/4", "1/4", "1/4"]])
    );
}

#[test]
fn kreps_arbitrage_is_data_and_revalidates() {
    let spec = fixture("kreps.json");
    let v = run_json(&["arbitrage", "--spec", &spec]);
    assert_eq!(v["result"]["verdict"], "arbitrage");
    let cert = &v["result"]["certificate"];
    let payoff = rationals(&cert["payoff"]);
    assert_eq!(payoff, rationals(&serde_json::json!(["0", "1", "1"])));

    let loaded = read_spec(spec.as_ref()).unwrap().load().unwrap();
    let coefficients = rationals(&cert["coefficients"]);
    assert_eq!(loaded.market.gains(&coefficients).0, payoff);
    let relevant = rationals(&cert["relevant"]);
    assert!(dominates(&relevant, &payoff, &loaded.order));
    assert!(relevant.iter().any(|r| *r > Rational::from(0)));
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    for name in [
        "binomial.json",
        "kreps.json",
        "two-priors.json",
        "uniform3.json",
    ] {
        let spec = fixture(name);
        let outputs: Vec<String> = ["1", "2", "3"]
            .iter()
            .map(|n| {
                let out = run(&[
                    "report",
                    "--spec",
                    &spec,
                    "--parallel",
                    n,
                    "--payoff",
                    if name == "two-priors.json" {
                        "[1,0,0,0]"
                    } else if name == "binomial.json" {
                        "[1,0]"
                    } else {
                        "[1,0,0]"
                    },
                ]);
                assert_eq!(out.code, 0, "{name}: {}", out.stderr);
                out.stdout
            })
            .collect();
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{name}");
    }
}

#[test]
fn numeraire_changes_the_unit_of_account() {
    let spec = fixture("atom-of-finance.json");
    // Cash earns nothing while the bond earns 5%, so undiscounted prices
    // are unbounded below.
    let plain = run_json(&["superhedge", "--spec", &spec, "--payoff", "[1,0]"]);
    assert_eq!(plain["result"]["unbounded_below"], true);
    let discounted = run_json(&[
        "superhedge",
        "--spec",
        &spec,
        "--payoff",
        "[1,0]",
        "--numeraire",
        "B",
    ]);
    assert_eq!(discounted["result"]["price"], "1/2");
}

#[test]
fn human_format_is_a_flat_table() {
    let spec = fixture("binomial.json");
    let out = run(&[
        "superhedge",
        "--spec",
        &spec,
        "--payoff",
        "[1,0]",
        "--format",
        "human",
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().any(|l| l == "result.price: 1/3"));
    assert!(out.stdout.lines().any(|l| l == "states: (up, down)"));
}

#[test]
fn input_errors_exit_with_two() {
    let binomial = fixture("binomial.json");
    let example = fixture("two-priors.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["validate", "--spec", "/nonexistent/spec.json"],
        vec!["superhedge", "--spec", &binomial, "--payoff", "[1]"],
        vec!["superhedge", "--spec", &binomial, "--payoff", "[\"x\",1]"],
        vec!["emh", "--spec", &binomial, "--variant", "strong"],
        vec!["support", "--spec", &example],
        vec!["support", "--spec", &binomial, "--set", "sideways"],
        vec!["validate", "--spec", &binomial, "--numeraire", "Z"],
        vec!["polytope", "--spec", &binomial, "--parallel", "0"],
        vec!["frobnicate"],
    ];
    for case in cases {
        let out = run(&case);
        assert_eq!(out.code, EXIT_INPUT, "{case:?}");
        assert!(out.stdout.is_empty());
        assert!(
            out.stderr.starts_with("error: "),
            "{case:?}: {}",
            out.stderr
        );
    }
}

#[test]
fn schema_errors_name_the_path() {
    let dir = std::env::temp_dir().join(format!("knightmark-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"states":["a","b"],"filtration":[[["a","b"]],[["a"],"b"]],"assets":[]}"#,
    )
    .unwrap();
    let out = run(&["validate", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("filtration"), "{}", out.stderr);
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("superhedge"));
}

#[test]
fn fuzz_command_is_reproducible() {
    let a = run(&["fuzz", "--count", "12", "--seed", "5"]);
    let b = run(&["fuzz", "--count", "12", "--seed", "5", "--parallel", "2"]);
    assert_eq!(a.code, 0, "{}", a.stdout);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(v["result"]["failures"], serde_json::json!([]));
}

#[test]
fn every_command_runs_on_the_fixtures() {
    for name in [
        "binomial.json",
        "kreps.json",
        "uniform3.json",
        "atom-of-finance.json",
    ] {
        let spec = fixture(name);
        for cmd in ["validate", "arbitrage", "polytope", "viability", "support"] {
            let out = run(&[cmd, "--spec", &spec]);
            assert_eq!(out.code, 0, "{cmd} {name}: {}", out.stderr);
        }
    }
    let spec = fixture("two-priors.json");
    for variant in ["strong", "weak", "k-strong", "k-weak"] {
        let out = run(&["emh", "--spec", &spec, "--variant", variant]);
        assert_eq!(out.code, 0, "{variant}: {}", out.stderr);
    }
}

#[test]
fn published_schema_matches_the_parser_vocabulary() {
    let text = std::fs::read_to_string(format!(
        "{}/../../docs/market-spec.schema.json",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let props = &schema["properties"];
    let kinds: Vec<&str> = props["order"]["properties"]["kind"]["enum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    for kind in &kinds {
        let doc = format!(
            r#"{{"states":["a"],"filtration":[[["a"]],[["a"]]],"assets":[],"order":{{"kind":"{kind}"}}}}"#
        );
        knightmark_core::io::parse_spec(doc.as_bytes()).unwrap();
    }
    for preset in props["relevance"]["oneOf"][0]["enum"].as_array().unwrap() {
        let doc = format!(
            r#"{{"states":["a"],"filtration":[[["a"]],[["a"]]],"assets":[],"relevance":{preset}}}"#
        );
        knightmark_core::io::parse_spec(doc.as_bytes()).unwrap();
    }
    let top: Vec<&String> = props.as_object().unwrap().keys().collect();
    assert_eq!(
        top,
        [
            "states",
            "filtration",
            "assets",
            "cone",
            "order",
            "relevance"
        ]
    );
}
