use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qgen(args: &[&str], report_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qgen"));
    cmd.args(args).env_remove("ADIABATIC_REPORT_DIR");
    if let Some(dir) = report_dir {
        cmd.env("ADIABATIC_REPORT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn column(report: &Value, series: &str, name: &str) -> Vec<f64> {
    let s = &report["series"][series];
    let k = s["columns"].as_array().unwrap().iter().position(|c| c == name).unwrap();
    s["rows"].as_array().unwrap().iter().map(|r| r[k].as_f64().unwrap()).collect()
}

#[test]
fn trotter_sweep_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = qgen(&["trotter-sweep", "--seed", "42"], Some(a.path()));
    let second = qgen(&["trotter-sweep", "--seed", "42"], Some(b.path()));
    assert!(first.status.success() && second.status.success());
    let name = "trotter-sweep-trotter.dat";
    let fa = std::fs::read(a.path().join(name)).unwrap();
    let fb = std::fs::read(b.path().join(name)).unwrap();
    assert_eq!(fa, fb);
    let (ra, rb) = (report(&first), report(&second));
    assert_eq!(ra["scalars"], rb["scalars"]);
    assert_eq!(ra["series"], rb["series"]);

    let text = String::from_utf8(fa).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# config_hash {}", ra["config_hash"].as_str().unwrap()));
    assert_eq!(lines.next().unwrap(), "# delta measured_error bound");
    assert_eq!(lines.count(), 6);
}

#[test]
fn seeds_change_the_instance() {
    let a = report(&qgen(&["trotter-sweep", "--seed", "1"], None));
    let b = report(&qgen(&["trotter-sweep", "--seed", "2"], None));
    assert_ne!(a["series"], b["series"]);
    assert_ne!(a["config_hash"], b["config_hash"]);
}

#[test]
fn zeno_failure_column_is_monotone() {
    let out = qgen(&["zeno-run", "--zeno-steps", "250,500,1000,2000", "--runs", "2000"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let failure = column(&report(&out), "zeno", "failure");
    assert_eq!(failure.len(), 4);
    assert!(failure.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn matchings_seed_probability_is_one_fifth() {
    let out = qgen(&["matchings-qsample", "--n", "2"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = report(&out)["scalars"]["seed_perfect_probability"].as_f64().unwrap();
    assert!((p - 0.2).abs() < 1e-9);
}

#[test]
fn config_file_overrides_flags_and_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("qr.toml");
    std::fs::write(&path, "command = \"szk-qr\"\nmoduli = [21]\nshots = 2000\n").unwrap();
    let out = qgen(&["--config", path.to_str().unwrap(), "--shots", "5", "--seed", "9"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["command"], "szk-qr");
    assert_eq!(r["config"]["shots"], 2000);
    assert_eq!(r["config"]["seed"], 9);
    assert_eq!(r["scalars"]["checked"], 12.0);
}

#[test]
fn schema_violations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "command = \"szk-qr\"\nshotz = 3\n").unwrap();
    let out = qgen(&["--config", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("shotz"));

    assert_eq!(qgen(&["szk-qr", "--moduli", "16"], None).status.code(), Some(2));
    assert_eq!(qgen(&["trotter-sweep", "--alpha", "-1"], None).status.code(), Some(2));
    assert_eq!(qgen(&[], None).status.code(), Some(2));
}

#[test]
fn failed_assertions_exit_with_one_and_are_named() {
    // a single Hadamard-test shot cannot separate the promise cases reliably,
    // and twelve units at one shot each will mismatch at least once
    let out = qgen(&["szk-qr", "--moduli", "33", "--shots", "1", "--seed", "3"], None);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let failed: Vec<&Value> =
        r["assertions"].as_array().unwrap().iter().filter(|a| a["passed"] == false).collect();
    assert_eq!(failed[0]["name"], "decisions_match_referee");
    assert!(String::from_utf8_lossy(&out.stderr).contains("decisions_match_referee"));
}

#[test]
fn gap_formula_series_has_expected_columns() {
    let out = qgen(&["gap-formula", "--instances", "3", "--points", "11"], None);
    assert!(out.status.success());
    let r = report(&out);
    let gap = column(&r, "gap", "gap");
    let formula = column(&r, "gap", "formula");
    assert_eq!(gap.len(), 11);
    for (g, f) in gap.iter().zip(&formula) {
        assert!((g - f).abs() < 1e-9);
    }
}
