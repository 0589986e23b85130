use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fuchsol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuchsol")).args(args).env_remove("FUCHSOL_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn ode_run_writes_outputs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = fuchsol(&["run", "--system", "ode", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["record.csv", "oracle.csv", "report.json", "config.json", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["system"], "ode");
    assert_eq!(manifest["config"]["schema"], "fuchsol/v1");
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|v| v == "oracle.csv"));
    assert!(fs::read_to_string(out.join("oracle.csv")).unwrap().starts_with("t,u1,u2,u1_limit\n"));

    let again = dir.path().join("b");
    let cfg = out.join("config.json");
    let o = fuchsol(&["run", "--system", "ode", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(out.join("record.csv")).unwrap(), fs::read(again.join("record.csv")).unwrap());
}

#[test]
fn fit_recovers_the_decay_of_the_oracle_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"schema": "fuchsol/v1", "params": {"a": 2, "p": 0.4, "t_floor": -1e-6}}"#).unwrap();
    assert_eq!(code(&fuchsol(&["run", "--system", "ode", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let csv = out.join("oracle.csv");
    let o = fuchsol(&["fit", "--input", csv.to_str().unwrap(), "--t-min", "-1e-4", "--t-max", "-1e-6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(fit["column"], "u2");
    assert!((fit["exponent"].as_f64().unwrap() - 0.4).abs() < 0.02, "{fit}");
}

#[test]
fn check_reports_structure_as_json() {
    let o = fuchsol(&["check", "--system", "ode", "--samples", "50"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["system", "samples", "constants", "violations"] {
        assert!(r.get(key).is_some(), "{key}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let bad = dir.path().join("bad.json");
    let write = |p: &Path, s: &str| fs::write(p, s).unwrap();

    write(&bad, r#"{"schema": "fuchsol/v1", "params": {"bogus": 1}}"#);
    assert_eq!(code(&fuchsol(&["run", "--system", "ode", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
    write(&bad, r#"{"schema": "fuchsol/v0"}"#);
    assert_eq!(code(&fuchsol(&["run", "--system", "ode", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
    write(&bad, r#"{"schema": "fuchsol/v1", "system": "euler"}"#);
    assert_eq!(code(&fuchsol(&["check", "--system", "ode", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&fuchsol(&["run", "--system", "nope", "--out", "x"])), 2);
    assert_eq!(code(&fuchsol(&["check", "--system", "ode", "--samples", "0"])), 2);
    assert_eq!(code(&fuchsol(&["repro-acceptance", "--criteria", "12"])), 2);
    assert_eq!(code(&fuchsol(&["fit", "--input", "missing.csv", "--t-min", "1", "--t-max", "0"])), 2);
    assert_eq!(code(&fuchsol(&[])), 2);
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = Command::new(env!("CARGO_BIN_EXE_fuchsol"))
        .args(["run", "--system", "ode", "--out", out.to_str().unwrap()])
        .env("FUCHSOL_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 42);
    let o = Command::new(env!("CARGO_BIN_EXE_fuchsol")).args(["check", "--system", "ode"]).env("FUCHSOL_SEED", "-1").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn fast_acceptance_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("acc.tsv");
    let o = fuchsol(&["repro-acceptance", "--criteria", "3,9", "--out", tsv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().all(|l| l.contains(" PASS ")));
    assert!(fs::read_to_string(tsv).unwrap().starts_with("criterion\ttitle\t"));
}
