use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bures(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bures"))
        .args(args)
        .current_dir(dir)
        .env_remove("BURES_TOL")
        .output()
        .unwrap()
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("a.json", r#"{"n": 3, "data": [[2, 0.5, 0], [0.5, 1, 0.2], [0, 0.2, 3]]}"#),
        ("b.csv", "1.5,0,0.3\n0,2,0\n0.3,0,0.8\n"),
        ("i2.json", r#"{"n": 2, "data": [[1, 0], [0, 1]]}"#),
        ("k.json", r#"{"n": 2, "data": [[4, 0], [0, 4]]}"#),
        ("one.csv", "3\n"),
        ("zero.json", r#"{"n": 3, "data": [[0, 0, 0], [0, 0, 0], [0, 0, 0]]}"#),
        ("asym.csv", "1,0.5\n0.4,1\n"),
        ("nearly.csv", "1,0.5\n0.5000000000001,1\n"),
        ("singular.csv", "1,1\n1,1\n"),
        ("ragged.csv", "1,0\n0\n"),
    ];
    for (name, body) in files {
        fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn dist_exit_codes() {
    let w = workspace();
    let d = w.path();
    assert_eq!(stdout(&bures(d, &["dist", "a.json", "a.json"])), "0.000000000000\n");
    assert_eq!(bures(d, &["dist", "a.json", "i2.json"]).status.code(), Some(2));
    assert_eq!(bures(d, &["dist", "a.json", "missing.json"]).status.code(), Some(2));
    assert_eq!(bures(d, &["dist", "i2.json", "asym.csv"]).status.code(), Some(2));
    assert_eq!(bures(d, &["dist", "i2.json", "ragged.csv"]).status.code(), Some(2));
    assert_eq!(bures(d, &["dist", "i2.json", "singular.csv"]).status.code(), Some(3));
    assert_eq!(bures(d, &["dist", "i2.json", "nearly.csv"]).status.code(), Some(0));
}

#[test]
fn log_then_exp_round_trips() {
    let w = workspace();
    let d = w.path();
    let log = bures(d, &["log", "a.json", "b.csv"]);
    assert_eq!(log.status.code(), Some(0));
    fs::write(d.join("v.json"), &log.stdout).unwrap();
    let exp = bures(d, &["exp", "a.json", "v.json"]);
    assert_eq!(exp.status.code(), Some(0));
    fs::write(d.join("b2.json"), &exp.stdout).unwrap();
    let back: f64 = stdout(&bures(d, &["dist", "b.csv", "b2.json"])).trim().parse().unwrap();
    assert!(back < 1e-6, "{back}");
}

#[test]
fn exp_with_zero_tangent_is_identity_map() {
    let w = workspace();
    let d = w.path();
    let out = stdout(&bures(d, &["exp", "a.json", "zero.json"]));
    assert_eq!(out, "{\"n\":3,\"data\":[[2.0,0.5,0.0],[0.5,1.0,0.2],[0.0,0.2,3.0]]}\n");
    assert_eq!(bures(d, &["exp", "a.json", "zero.json", "--t", "nan"]).status.code(), Some(2));
}

#[test]
fn geodesic_records() {
    let w = workspace();
    let d = w.path();
    let out = bures(d, &["geodesic", "a.json", "b.csv", "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    let ts: Vec<f64> = lines.iter().map(|l| l["t"].as_f64().unwrap()).collect();
    assert_eq!(ts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    for l in &lines {
        assert!(l["eigenvalues"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() > 0.0));
        assert!(l["radius"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(lines[0]["matrix"], serde_json::json!([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 3.0]]));
    assert_eq!(bures(d, &["geodesic", "a.json", "b.csv", "--samples", "1"]).status.code(), Some(2));
}

#[test]
fn curvature_reports() {
    let w = workspace();
    let d = w.path();
    let k: serde_json::Value = serde_json::from_str(&stdout(&bures(d, &["curvature", "k.json"]))).unwrap();
    assert!((k["scalar_curvature"].as_f64().unwrap() - 2.25 / 4.0).abs() < 1e-12);
    let one: serde_json::Value = serde_json::from_str(&stdout(&bures(d, &["curvature", "one.csv"]))).unwrap();
    assert_eq!(one["scalar_curvature"].as_f64().unwrap(), 0.0);
}

#[test]
fn check_is_deterministic_and_honours_tolerance() {
    let w = workspace();
    let d = w.path();
    let args = ["check", "--n", "3", "--trials", "10", "--seed", "42"];
    let first = bures(d, &args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, bures(d, &args).stdout);

    let strict = Command::new(env!("CARGO_BIN_EXE_bures"))
        .args(args)
        .env("BURES_TOL", "1e-300")
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
    assert!(stdout(&strict).contains("FAIL sylvester/"));

    let bad = Command::new(env!("CARGO_BIN_EXE_bures"))
        .args(args)
        .env("BURES_TOL", "loose")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(bures(d, &["check", "--trials", "0"]).status.code(), Some(2));
}
