//! End-to-end runs of the `robustfin` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robustfin")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str, contents: &str) -> String {
    let p = std::env::temp_dir().join(format!("robustfin-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gap_pathwise_price_is_one_half() {
    let out = run(&["price", "--market", &fixture("gap.json"), "--claim", &fixture("gap-zero-indicator.json"), "--scope", "omega"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains(r#""price":"1/2""#));
}

#[test]
fn gap_quasi_sure_price_is_zero() {
    let out = run(&["price", "--market", "gap", "--claim", "gap-zero-indicator", "--scope", "quasi-sure", "--priors", "gap-12-priors"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["price"], "0");
}

#[test]
fn binomial_ftap_statements_are_equivalent() {
    let out = run(&["ftap", "--market", &fixture("binom.json"), "--priors", &fixture("binom-omega-priors.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains(r#""all_equivalent":true"#));
    assert!(text.contains(r#"["1/3","2/3"]"#), "martingale measure missing: {text}");
}

#[test]
fn ex35_replay_reports_failure_and_infeasibility() {
    let out = run(&["examples", "--name", "ex35"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["assumption_3_6_ok"], false);
    assert_eq!(v["capital_check"]["feasible"], false);
    assert_eq!(v["capital_check"]["certificate"]["outcome"]["status"], "Infeasible");
    assert_eq!(v["separators"].as_array().unwrap().len(), 2);
    assert_eq!(v["price_on_omega_star"], "0");
}

#[test]
fn every_example_runs_cleanly() {
    for name in ["binom", "ex31", "ex32", "ex35", "gap", "inta", "sausa"] {
        let out = run(&["examples", "--name", name]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(run(&["examples", "--name", "nope"]).status.code(), Some(1));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["arbitrage", "--market", "binom", "--priors", "binom-omega-priors"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = ["random", "--seed", "7", "--count", "5"];
    assert_eq!(run(&r).stdout, run(&r).stdout);
}

#[test]
fn verify_accepts_reports_and_rejects_tampered_certificates() {
    let out = run(&["price", "--market", "gap", "--claim", "gap-zero-indicator"]);
    let mut v = json(&out);
    let path = scratch("report.json", &v.to_string());
    let ok = run(&["verify", "--report", &path]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["checked"], 1);

    v["result"]["certificate"]["outcome"]["value"] = Value::String("1/3".into());
    let bad = scratch("tampered.json", &v.to_string());
    let rej = run(&["verify", "--report", &bad]);
    assert_eq!(rej.status.code(), Some(2));
    assert!(!json(&rej)["failed"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_json_reports_line_and_column() {
    let path = scratch("broken.json", "{\n  \"T\": 1,\n  \"d\": ]\n}");
    let out = run(&["arbitrage", "--market", &path]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&format!("{path}:3:")), "{err}");
}

#[test]
fn schema_errors_name_the_field() {
    let path = scratch("nofield.json", r#"{"d": 1, "paths": [], "options": []}"#);
    let out = run(&["arbitrage", "--market", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`T`"));

    let claim = scratch("shortclaim.json", r#"{"name": "x", "g": ["1"]}"#);
    let out = run(&["price", "--market", "gap", "--claim", &claim]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`g`"));
}

#[test]
fn input_errors_exit_with_one() {
    assert_eq!(run(&["price", "--market", "gap", "--claim", "gap-zero-indicator", "--scope", "quasi-sure"]).status.code(), Some(1));
    assert_eq!(run(&["ftap", "--market", "gap"]).status.code(), Some(1));
    assert_eq!(run(&["arbitrage", "--market", "/no/such/file.json"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn table_format_is_readable() {
    let out = run(&["duality-chain", "--market", "gap", "--claim", "gap-zero-indicator", "--priors", "gap-omega-priors", "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("chain.all_equal") && l.ends_with("true")));
}

#[test]
fn poly_market_with_claim() {
    let claim = scratch("poly-claim.json", r#"{"name": "one", "pieces": [{"a": ["0"], "b": "1"}]}"#);
    let out = run(&["poly", "--market", &fixture("ex31.json"), "--claim", &claim]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["price"], "1");
    assert_eq!(v["price_on_efficient_set"], "-inf");
    assert_eq!(v["SA"]["present"], true);
}

#[test]
fn efficient_set_and_extension_commands() {
    let out = run(&["efficient-set", "--market", "inta"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["omega_star"], serde_json::json!(["low", "mid"]));

    let limits = scratch("limits.json", r#"[{"path": "b2_0", "parents": ["b2_1/4", "b2_2/5"]}]"#);
    let out = run(&["extension", "--market", "ex35", "--claim", "ex35-claim", "--limit-points", &limits]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["assumption_3_6_ok"], false);
}
