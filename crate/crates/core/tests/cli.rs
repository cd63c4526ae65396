use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperladder"))
        .args(args)
        .env_remove("SPECFACTORY_SEED")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(out: &Output) -> Vec<Vec<f64>> {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| line.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn describe_reports_exact_spectra() {
    let legendre = json(&run(&["--preset", "legendre", "describe"]));
    let expected: Vec<String> = (0..=10).map(|l| (l * (l + 1)).to_string()).collect();
    assert_eq!(legendre["eigenvalues"], serde_json::json!(expected));
    assert_eq!(legendre["algebra"], "su(1,1)");

    let hermite = json(&run(&["--preset", "hermite", "describe"]));
    let expected: Vec<String> = (0..=10).map(|l| (2 * l).to_string()).collect();
    assert_eq!(hermite["eigenvalues"], serde_json::json!(expected));
    assert_eq!(hermite["algebra"], "h(2)");
}

#[test]
fn malformed_family_exits_with_validation_code() {
    let out = run(&["--family", r#"{"sigma":"1 - s^2"}"#, "describe"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
    let out = run(&["--preset", "jacobi", "--param", "alpha=-1", "--param", "beta=0", "describe"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["--preset", "legendre", "--l", "2", "--m", "3", "sample"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flat_poschl_teller_potential_is_constant() {
    let rows = csv_rows(&run(&[
        "--preset", "poschl-teller", "--param", "mu=1", "--param", "eta=1",
        "--grid-n", "41", "--format", "csv", "sample", "--what", "potential",
    ]));
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|r| (r[1] + 1.0).abs() <= 1e-10));
}

#[test]
fn associated_samples_match_closed_form() {
    // sqrt(1 − s²)·(15s² − 3) up to normalization
    let rows = csv_rows(&run(&[
        "--preset", "legendre", "--l", "3", "--m", "1", "--grid-n", "9",
        "--format", "csv", "sample", "--what", "associated",
    ]));
    let shape = |s: f64| (1.0 - s * s).sqrt() * (15.0 * s * s - 3.0);
    let (s0, p0) = (rows[0][0], rows[0][1]);
    for r in &rows {
        let expected = p0 * shape(r[0]) / shape(s0);
        assert!((r[1] - expected).abs() <= 1e-12 * (1.0 + expected.abs()), "{r:?}");
    }
}

#[test]
fn vacuum_coherent_state_is_ground_state() {
    let out = json(&run(&["--preset", "hermite", "--z", "0", "--trunc", "5", "coherent"]));
    assert_eq!(out["normalizer"].as_f64(), Some(1.0));
    let coeffs = out["coeffs"].as_array().unwrap();
    assert_eq!(coeffs.len(), 6);
    assert_eq!(coeffs[0][0].as_f64(), Some(1.0));
    assert!(coeffs[1..].iter().all(|c| c[0].as_f64() == Some(0.0) && c[1].as_f64() == Some(0.0)));
}

#[test]
fn verify_is_deterministic_and_passes() {
    let args = ["--preset", "laguerre", "--param", "alpha=1/2", "verify", "--suite", "all"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    let report = json(&first);
    assert_eq!(report["failed"], 0);
    assert!(report["total"].as_u64().unwrap() > 500);
}

#[test]
fn tightened_tolerance_can_fail_verification() {
    let out = run(&["--preset", "hermite", "--tol", "norm=0", "verify", "--suite", "ladder"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--preset", "hermite", "--tol", "norm=1", "verify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"preset": "legendre", "l": 4, "grid_n": 5, "format": "csv", "what": "wavefunction"}"#).unwrap();
    let path = config.to_str().unwrap();
    let rows = csv_rows(&run(&["--config", path, "sample"]));
    assert_eq!(rows.len(), 5);
    let rows = csv_rows(&run(&["--config", path, "--grid-n", "7", "sample"]));
    assert_eq!(rows.len(), 7);

    let out_path = dir.path().join("out.csv");
    let out = run(&["--config", path, "--out", out_path.to_str().unwrap(), "sample"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out_path).unwrap().lines().count(), 6);
    let out = run(&["--config", path, "--out", "/nonexistent/dir/out.csv", "sample"]);
    assert_eq!(out.status.code(), Some(3));
}
