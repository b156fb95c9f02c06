use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use renorm_core::cascade::CascadeTable;
use serde_json::Value;

fn renorm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renorm")).args(args).current_dir(dir).env_remove("RENORM_LOG").output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixed_point_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = renorm(
        &["fixed-point", "--alpha", "2.0", "--word", "doubling", "--degree", "40", "--tol", "1e-12", "--out", "fp.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("fp.json"));
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["point"]["coeffs"].as_array().unwrap().len(), 41);
    assert_eq!(v["point"]["interval"], serde_json::json!([-1.0, 0.0]));

    // Continuation from the saved report.
    let out = renorm(&["fixed-point", "--alpha", "1.95", "--seed-file", "fp.json", "--out", "fp195.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("fp195.json"));
    assert_eq!(v["point"]["alpha"].as_f64(), Some(1.95));
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn cascade_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = renorm(&["cascade", "--alpha", "2.0", "--levels", "10", "--format", "csv", "--out", "cascade.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("cascade.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,c,delta_n,lambda_n");
    assert_eq!(lines.len(), 11);
    assert!(text.ends_with('\n'));
    assert_eq!(CascadeTable::from_csv(&text, 2.0).unwrap().to_csv(), text);

    let out = renorm(&["cascade", "--levels", "0", "--format", "csv", "--out", "empty.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("empty.csv")).unwrap(), "n,c,delta_n,lambda_n\n");
}

#[test]
fn argument_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = renorm(&["fixed-point", "--alpha", "0.5", "--out", "x.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha > 1"));

    let out = renorm(&["fixed-point", "--frobnicate", "--out", "x.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = renorm(&["cascade", "--alpha", "1.9,2.0", "--format", "csv", "--out", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = renorm(&["horseshoe", "--word", "quadrupling", "--out", "x.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_renorm"))
        .args(["cascade", "--levels", "1", "--out", "x.json"])
        .current_dir(dir.path())
        .env("RENORM_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.json").exists());
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn solver_error_leaves_target_untouched() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("seed.json"), r#"{"alpha": 2.0, "interval": [-1.0, 0.0], "coeffs": [-0.5, 0.5], "rho": 1000.0}"#)
        .unwrap();
    fs::write(dir.path().join("report.json"), "previous").unwrap();
    // The seed is the identity-like map psi(y) = y, far from any tripling fixed point.
    let out = renorm(&["fixed-point", "--word", "tripling", "--seed-file", "seed.json", "--out", "report.json"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("report.json")).unwrap(), "previous");
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 2);
}

#[test]
fn spectrum_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = renorm(&["spectrum", "--out", "s.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.path().join("s.json"));
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["alpha", "degree", "delta", "eigenvalues", "gap", "residual", "word"]);
    assert!((v["delta"].as_f64().unwrap() - 4.6692).abs() < 1e-3);
    assert!(v["eigenvalues"][0]["re"].is_number() && v["eigenvalues"][0]["im"].is_number());
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = renorm(&["cascade", "--alpha", "1.9,2.0,2.1", "--levels", "6", "--jobs", "3", "--out", name], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let v: Value = serde_json::from_slice(&a).unwrap();
    let alphas: Vec<f64> = v.as_array().unwrap().iter().map(|t| t["alpha"].as_f64().unwrap()).collect();
    assert_eq!(alphas, [1.9, 2.0, 2.1]);
}

#[test]
fn horseshoe_stable_skew_tower() {
    let dir = tempfile::tempdir().unwrap();
    let out = renorm(&["horseshoe", "--word", "doubling;tripling", "--tol", "1e-10", "--out", "h.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let h = json(&dir.path().join("h.json"));
    assert_eq!(h["maps"].as_array().unwrap().len(), 2);
    assert!(h["residuals"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() < 1e-8));

    let out = renorm(&["stable", "--steps", "6", "--format", "csv", "--out", "s.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(s.starts_with("m,distance,scaling_difference\n"));
    assert_eq!(s.lines().count(), 8);

    let out = renorm(&["skew", "--steps", "6", "--out", "k.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let k = json(&dir.path().join("k.json"));
    assert_eq!(k["norms"].as_array().unwrap().len(), 6);
    assert!(k["fit"]["lambda"].as_f64().unwrap() < 1.0);

    let out = renorm(&["tower", "--c", "0.7", "--steps", "4", "--format", "csv", "--out", "t.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let t = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(t.starts_with("step,m,theta,half_width,refit_residual,tail_norm\n"));
}
