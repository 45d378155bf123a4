use std::path::PathBuf;
use std::process::{Command, Output};

fn predens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_predens")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

fn scenario(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("predens-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const EXPANSION: &str = r#"{
    "version": 1,
    "scenario": "expansion",
    "model": {"kind": "normal", "p": 2, "sx2": 1.0, "sy2": 1.0},
    "estimators": [{"c2": 1.0}, {"c2": 2.0}, {"c2": 6.0}],
    "mu_grid": [[0.0, 0.0], [2.0, 0.0]],
    "n": 20000
}"#;

#[test]
fn threshold_reports_known_cutoffs() {
    let o = predens(&["threshold", "--p", "2,4", "--r", "1"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!((v[0]["value"].as_f64().unwrap() - 6.0).abs() < 1e-9);
    assert_eq!(v[1]["value"], "inf");
    assert_eq!(v[1]["note"], "infinite (p ≥ p0 = 3.419)");
    assert!(stderr(&o).contains("resolved config"));
}

#[test]
fn shrunk_threshold_at_a_equal_one_matches_the_plain_cutoff() {
    let o = predens(&["threshold", "--p", "3", "--a", "1"]);
    let v = json(&o);
    assert!((v[0]["value"].as_f64().unwrap() - 11.47).abs() < 0.01);
}

#[test]
fn risk_table_matches_closed_forms() {
    let cfg = scenario("risk.json", EXPANSION);
    let o = predens(&["--seed", "3", "risk", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let two_pi = 2.0 * std::f64::consts::PI;
    for (row, expect) in rows.iter().zip([1.0 / 3.0, 0.25, 1.0 / 3.0].iter().cycle()) {
        let closed = row["closed_form"].as_f64().unwrap();
        assert!((closed * two_pi - expect).abs() < 1e-12);
        let (mean, se) = (row["mc_mean"].as_f64().unwrap(), row["se"].as_f64().unwrap());
        assert!((mean - closed).abs() <= 3.0 * se + 1e-12, "{row}");
    }
}

#[test]
fn printed_config_reproduces_the_run() {
    let cfg = scenario("repro.json", &EXPANSION.replace("\"n\": 20000", "\"n\": 5000"));
    let first = predens(&["risk", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert!(first.status.success());
    let err = stderr(&first);
    let resolved = err.split_once("resolved config:\n").unwrap().1;
    let again = scenario("resolved.json", resolved);
    let second = predens(&["risk", "--config", again.to_str().unwrap()]);
    assert!(second.status.success());
    assert_eq!(stdout(&first), stdout(&second));
    let third = predens(&["--threads", "2", "risk", "--config", again.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&third));
}

#[test]
fn csv_and_json_both_render() {
    let cfg = scenario("formats.json", EXPANSION);
    let csv = predens(&["--seed", "9", "--format", "csv", "risk", "--config", cfg.to_str().unwrap()]);
    let text = stdout(&csv);
    assert!(text.starts_with("scenario,estimator,mu,closed_form,mc_mean,se,n,seed\n"));
    assert_eq!(text.lines().count(), 7);
    let js = predens(&["--seed", "9", "--format", "json", "risk", "--config", cfg.to_str().unwrap()]);
    assert_eq!(json(&js)["seed"], 9);
}

#[test]
fn out_flag_writes_a_file() {
    let out = std::env::temp_dir().join(format!("predens-out-{}.csv", std::process::id()));
    let o = predens(&["--format", "csv", "--out", out.to_str().unwrap(), "distance", "--delta", "2", "--loss", "l1"]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let value: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((value - 1.3653789).abs() < 1e-6);
    std::fs::remove_file(out).ok();
}

#[test]
fn dominance_verdicts_agree_across_seeds() {
    let body = r#"{
        "version": 1,
        "scenario": "stein",
        "model": {"kind": "normal", "p": 3, "sx2": 1.0, "sy2": 1.0},
        "estimators": [
            {"base": "mre", "location": {"kind": "james_stein", "sigma2": 1.0}},
            {"base": "mre"}
        ],
        "n": 20000
    }"#;
    let cfg = scenario("stein.json", body);
    let verdicts: Vec<_> = ["42", "43"]
        .iter()
        .map(|s| {
            let o = predens(&["--seed", s, "dominance", "--config", cfg.to_str().unwrap()]);
            assert!(o.status.success(), "{}", stderr(&o));
            json(&o)["report"]["verdict"].clone()
        })
        .collect();
    assert_eq!(verdicts[0], "dominates");
    assert_eq!(verdicts[0], verdicts[1]);
}

#[test]
fn dominance_needs_two_estimators() {
    let cfg = scenario("three.json", EXPANSION);
    let o = predens(&["dominance", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(predens(&["risk"]).status.code(), Some(2));
    assert_eq!(predens(&["threshold"]).status.code(), Some(2));
    assert_eq!(predens(&["--format", "xml", "threshold", "--p", "2"]).status.code(), Some(2));
    assert_eq!(predens(&["--threads", "0", "threshold", "--p", "2"]).status.code(), Some(2));
    let bad = scenario("bad.json", &EXPANSION.replace("\"version\": 1,", "\"version\": 1, \"extra\": true,"));
    let o = predens(&["risk", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown field"));
    let missing = predens(&["risk", "--config", "/nonexistent/predens.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn verify_thresholds_passes() {
    let o = predens(&["verify", "--suite", "thresholds"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn bounds_report_normal_caps() {
    let o = predens(&["bounds", "--kind", "normal", "--p", "5"]);
    let v = json(&o);
    let ids: Vec<_> = v.as_array().unwrap().iter().map(|b| b["equation_id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids, ["l2_normal_baranchik_cap", "l1_normal_general_cap", "l1_normal_dual_cap"]);
    assert!((v[1]["value"].as_f64().unwrap() - 1.92).abs() < 1e-12);
    assert!((v[2]["value"].as_f64().unwrap() - 3.2).abs() < 1e-12);
}

#[test]
fn sampled_bounds_record_their_seed() {
    let law = r#"{"kind":"gamma","shape":3,"scale":1}"#;
    let o = predens(&["bounds", "--kind", "l2-dual", "--p", "3", "--g", law, "--h", law, "--n", "20000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    let resolved: serde_json::Value = serde_json::from_str(err.split_once("resolved config:\n").unwrap().1).unwrap();
    assert!(resolved["seed"].is_u64());
}
