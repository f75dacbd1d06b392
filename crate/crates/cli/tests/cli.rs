use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_khrushchev"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("khrushchev-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bundled_campaign_passes() {
    let out = run(&["campaign", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["failures"], 0);
    assert_eq!(report["errors"], 0);
}

#[test]
fn empty_campaign_succeeds() {
    let dir = scratch("empty");
    let cfg = dir.join("empty.json");
    fs::write(&cfg, r#"{"schema_version": 1, "jobs": []}"#).unwrap();
    let out = run(&["campaign", "run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["cases"], 0);
}

#[test]
fn campaign_with_non_contractive_parameter_is_an_input_error() {
    let dir = scratch("corrupt");
    let cfg = dir.join("corrupt.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "jobs": [{
            "kind": "verify", "name": "bad", "theorem": "site", "family": "C", "j": 0,
            "params": {"inline": {"d": 1, "alphas": [{"rows": 1, "cols": 1, "data": [[1.0, 0.5]]}]}}
        }]}"#,
    )
    .unwrap();
    let out = run(&["campaign", "run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_is_a_check_failure() {
    let out = run(&["--tol", "0", "--order", "6", "verify", "--theorem", "site", "--seed", "4", "--j", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn verify_with_path_oracle() {
    let dir = scratch("verify");
    let report = dir.join("report.json");
    let out = run(&[
        "verify",
        "--theorem",
        "range",
        "--d",
        "2",
        "--seed",
        "7",
        "--j",
        "1",
        "--k",
        "2",
        "--oracle",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let saved: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved["pass"], true);
    assert_eq!(saved["seed"], 7);
    assert!(saved["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("path enumeration")));
}

#[test]
fn schur_round_trip_through_files() {
    let dir = scratch("schur");
    let params = dir.join("p.json");
    let series = dir.join("f.csv");
    let back = dir.join("back.json");
    let p = params.to_str().unwrap();
    assert_eq!(
        run(&["--seed", "2", "--out", p, "random", "params", "--d", "2", "--length", "3"]).status.code(),
        Some(0)
    );
    let s = series.to_str().unwrap();
    assert_eq!(run(&["--order", "8", "--out", s, "schur", "synthesize", "--params", p]).status.code(), Some(0));
    let b = back.to_str().unwrap();
    assert_eq!(run(&["--out", b, "schur", "params", "--series", s, "--steps", "3"]).status.code(), Some(0));
    let original: serde_json::Value = serde_json::from_str(&fs::read_to_string(&params).unwrap()).unwrap();
    let recovered: serde_json::Value = serde_json::from_str(&fs::read_to_string(&back).unwrap()).unwrap();
    for (a, b) in original["alphas"].as_array().unwrap().iter().zip(recovered["alphas"].as_array().unwrap()) {
        for (x, y) in a["data"].as_array().unwrap().iter().zip(b["data"].as_array().unwrap()) {
            for c in 0..2 {
                assert!((x[c].as_f64().unwrap() - y[c].as_f64().unwrap()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn overlap_check_and_construct() {
    let dir = scratch("overlap");
    let params = dir.join("p.json");
    let unitary = dir.join("u.json");
    let (p, u) = (params.to_str().unwrap(), unitary.to_str().unwrap());
    run(&["--seed", "9", "--out", p, "random", "params", "--d", "1", "--length", "5", "--terminal"]);
    assert_eq!(run(&["--out", u, "cmv", "build", "--params", p]).status.code(), Some(0));
    // Each CMV column reaches at most two sites ahead, so a one-site center separates {0} from {2..}.
    let ok = run(&["overlap", "construct", "--unitary", u, "--partition", "L=0", "C=1,2", "R=3,4,5"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let out: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!(out["reconstruction_residual"].as_f64().unwrap() < 1e-12);
    let bad = run(&["overlap", "check", "--unitary", u, "--partition", "L=0,1", "C=2", "R=3,4,5"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(run(&["overlap", "check", "--unitary", u, "--partition", "L=0", "C=9"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_an_input_error() {
    assert_eq!(run(&["cmv", "build", "--params", "/nonexistent/p.json"]).status.code(), Some(2));
}
