//! End-to-end checks of the binary: exit codes, determinism of the
//! generated data files, and agreement between equivalent configs.
//!
//! Figure sweeps (reproduce fig3/fig4) cover an 81x81 grid and take
//! about a minute each on one core, so they are exercised manually,
//! not here.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mpcc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpcc"))
        .args(args)
        .current_dir(dir)
        .env_remove("MPCC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Pulls `name=value` off a report line.
fn field(line: &str, name: &str) -> f64 {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{name}=")))
        .unwrap_or_else(|| panic!("field {name} in {line:?}"))
        .parse()
        .expect("numeric field")
}

#[test]
fn fidelity_defaults_report_the_optimal_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcc(&["fidelity"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let analytic = text.lines().find(|l| l.starts_with("analytic")).expect("analytic line");
    let simulated = text.lines().find(|l| l.starts_with("simulated")).expect("simulated line");
    assert!((field(analytic, "f_avg") - 0.8594442723176612).abs() < 1e-9);
    assert!((field(analytic, "p_success") - 0.2596364487341332).abs() < 1e-9);
    assert!((field(simulated, "f_avg") - 0.8594442723176612).abs() < 1e-6);
}

#[test]
fn fidelity_accepts_a_universal_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("uc.toml");
    fs::write(&config, "cloner = \"uc\"\n").unwrap();
    let out = mpcc(&["fidelity", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let analytic = text.lines().find(|l| l.starts_with("analytic")).unwrap();
    assert!((field(analytic, "f_avg") - 5.0 / 6.0).abs() < 1e-9);
}

#[test]
fn second_moment_config_matches_the_named_equatorial_cloner() {
    let dir = tempfile::tempdir().unwrap();
    let named = dir.path().join("pcc.toml");
    let moment = dir.path().join("a2.toml");
    fs::write(&named, "cloner = \"pcc\"\n").unwrap();
    fs::write(&moment, "cloner = { a2 = -0.5 }\n").unwrap();
    let a = mpcc(&["fidelity", "--config", named.to_str().unwrap()], dir.path());
    let b = mpcc(&["fidelity", "--config", moment.to_str().unwrap()], dir.path());
    assert_eq!(exit_code(&a), 0);
    assert_eq!(exit_code(&b), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "clonner = \"uc\"\n").unwrap();
    let out = mpcc(&["fidelity", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_cloner_name_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "cloner = \"telecloner\"\n").unwrap();
    let out = mpcc(&["fidelity", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn reproduce_table1_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    for out_dir in [&first, &second] {
        let out = mpcc(
            &["reproduce", "table1", "--format", "csv", "--out", out_dir.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(exit_code(&out), 0, "stdout: {}", stdout(&out));
        assert!(stdout(&out).contains("within tolerance"));
    }
    let a = fs::read(first.join("table1.csv")).unwrap();
    let b = fs::read(second.join("table1.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reproduce_table2_reports_the_known_misses() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcc(
        &["reproduce", "table2", "--format", "csv", "--out", dir.path().to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("MISS"));
    assert!(text.contains("out of tolerance"));
}

#[test]
fn reproduce_rejects_unknown_targets() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcc(&["reproduce", "table9"], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpcc(&["validate"], dir.path());
    assert_eq!(exit_code(&out), 0, "stdout: {}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("PASS")));
    assert!(text.contains("expected-fail demo"));
    assert!(!text.lines().any(|l| l.starts_with("FAIL") && !l.contains("expected-fail demo")));
}

#[test]
fn sweep_runs_a_small_grid_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("tiny.toml");
    fs::write(
        &spec,
        "gamma_squared = 0.01\nquadrature_points = 16\n\n\
         [mu]\nmin = 0.2\nmax = 0.8\npoints = 3\n\n\
         [nu]\nmin = 0.2\nmax = 0.8\npoints = 3\n",
    )
    .unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    for out_dir in [&first, &second] {
        let out = mpcc(
            &["sweep", spec.to_str().unwrap(), "--format", "csv", "--out", out_dir.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(exit_code(&out), 0, "stdout: {}", stdout(&out));
    }
    let a = fs::read_to_string(first.join("tiny.csv")).unwrap();
    let b = fs::read_to_string(second.join("tiny.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 10);
    assert!(a.lines().next().unwrap().starts_with("mu,nu,"));
    let center = a.lines().find(|l| l.starts_with("0.5,0.5,")).expect("center row");
    assert!(center.contains("blocked"));
}

#[test]
fn sweep_rejects_unknown_spec_keys() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    fs::write(&spec, "gamma = 0.01\n").unwrap();
    let out = mpcc(&["sweep", spec.to_str().unwrap()], dir.path());
    assert_eq!(exit_code(&out), 2);
}
