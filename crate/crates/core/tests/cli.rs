use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::Command;

use conic_uot::cli::{parse_config, run, EXIT_NUMERICAL, EXIT_OK, EXIT_SCHEMA};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_conic-uot");

fn run_text(text: &str, out: &Path) -> conic_uot::cli::Report {
    run(&parse_config(text).unwrap(), out, None).unwrap()
}

fn summary(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

fn csv_column(dir: &Path, name: &str, col: &str) -> Vec<f64> {
    let text = fs::read_to_string(dir.join(format!("{name}.csv"))).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == col).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

const BATCH: &str = r#"{"runs": [
  {"command": "gauss-geodesic", "sigma": [1.0, 0.2, 0.2, 0.8], "m": 1.3,
   "p": [0.1, 0.0, 0.0, -0.2], "xi": 0.4, "steps": 200},
  {"command": "pde-evolve", "model": "wfr", "n": 32,
   "rho": {"constant": 1.0, "cos": [0.2]}, "theta": {"constant": 0.1, "sin": [0.3]},
   "steps": 100},
  {"command": "bb-action", "n": 32, "rho": {"constant": 1.0, "cos": [0.1]},
   "theta": {"constant": 0.2, "sin": [0.1]}, "steps": 50, "perturbations": 2, "seed": 3}
]}"#;

#[test]
fn same_config_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run_text(BATCH, a.path()).exit_code, EXIT_OK);
    assert_eq!(run_text(BATCH, b.path()).exit_code, EXIT_OK);
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?} differs");
    }
}

#[test]
fn scaling_connection_has_zero_momentum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "gauss-connect", "sigma0": [1.0, 0.0, 0.0, 2.0], "m0": 1.0,
                  "sigma1": [1.0, 0.0, 0.0, 2.0], "m1": 4.0}"#;
    assert_eq!(run_text(cfg, dir.path()).exit_code, EXIT_OK);
    let s = summary(dir.path(), "gauss-connect");
    assert_eq!(s["status"], "ok");
    assert!((s["result"]["xi0"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    for p in s["result"]["p0"].as_array().unwrap() {
        assert!(p.as_f64().unwrap().abs() < 1e-8);
    }
    assert!(s["convergence"]["converged"].as_bool().unwrap());
}

#[test]
fn uniform_evolution_follows_the_radial_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "pde-evolve", "model": "small", "n": 128,
                  "rho": {"constant": 1.0}, "theta": {"constant": 1.0},
                  "dt": 0.001, "steps": 1000, "output": "uniform"}"#;
    assert_eq!(run_text(cfg, dir.path()).exit_code, EXIT_OK);
    let t = csv_column(dir.path(), "uniform", "t");
    let m = csv_column(dir.path(), "uniform", "m");
    assert_eq!(t.len(), 1001);
    for (t, m) in t.iter().zip(&m) {
        // 2√m grows linearly at rate ξ√m0 with ξ = 1
        let want = TAU * (1.0 + t / 2.0).powi(2);
        assert!((m - want).abs() < 1e-6, "t = {t}");
    }
    let s = summary(dir.path(), "uniform");
    assert!(s["diagnostics"]["h_drift"].as_f64().unwrap() < 1e-6);
}

#[test]
fn unknown_keys_are_rejected_before_anything_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(
        &path,
        r#"{"command": "gauss-geodesic", "sigma": [1.0], "m": 1.0, "xi": 0.0, "speed": 3}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(BIN)
        .args([
            "--config",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_SCHEMA));
    let s = summary(&out, "config-error");
    assert_eq!(s["reason"]["kind"], "schema_error");
    assert!(s["reason"]["message"].as_str().unwrap().contains("speed"));
    let reason: Value = serde_json::from_slice(&status.stderr).unwrap();
    assert_eq!(reason["kind"], "schema_error");
}

#[test]
fn one_bad_run_stops_the_whole_batch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"runs": [
      {"command": "gauss-geodesic", "sigma": [1.0], "m": 1.0, "xi": 0.5, "steps": 10},
      {"command": "gauss-geodesic", "sigma": [1.0, 0.5, 0.0, 1.0], "m": 1.0, "xi": 0.0}
    ]}"#;
    let report = run_text(cfg, dir.path());
    assert_eq!(report.exit_code, EXIT_SCHEMA);
    assert!(!dir.path().join("00-gauss-geodesic.csv").exists());
    assert!(!dir.path().join("00-gauss-geodesic.json").exists());
    let s = summary(dir.path(), "01-gauss-geodesic");
    assert_eq!(s["status"], "error");
    assert_eq!(s["reason"]["kind"], "schema_error");
}

#[test]
fn malformed_json_is_a_schema_error() {
    assert!(parse_config("{\"command\": ").is_err());
    assert!(parse_config(r#"{"command": "teleport"}"#).is_err());
    assert!(parse_config(r#"{"runs": []}"#).is_err());
}

#[test]
fn positivity_loss_reports_the_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "pde-evolve", "model": "small", "n": 64,
                  "rho": {"constant": 1.0}, "theta": {"constant": -3.0},
                  "dt": 0.001, "steps": 1000}"#;
    let report = run_text(cfg, dir.path());
    assert_eq!(report.exit_code, EXIT_NUMERICAL);
    let s = summary(dir.path(), "pde-evolve");
    assert_eq!(s["status"], "error");
    let step = s["reason"]["step"].as_u64().unwrap();
    // m(t) = m0 (1 − 3t/2)² vanishes at t = 2/3
    assert!((600..=667).contains(&step), "step {step}");
}

#[test]
fn check_suite_runs_without_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(BIN)
        .args(["--out", dir.path().to_str().unwrap(), "--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.lines().filter(|l| l.contains("PASS")).count() >= 13);
    assert!(!stdout.contains("FAIL"));
    let s = summary(dir.path(), "check");
    assert_eq!(s["result"]["seed"], 5);
}
