//! End-to-end tests driving the compiled binary against the bundled
//! configs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fqx() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fqx"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    fqx().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

#[test]
fn poisson_check_on_bundled_unit_comb_passes() {
    let cfg = config("poisson_unit_comb.json");
    let out = run(&["poisson-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    let residual = report["max_relative_residual"].as_f64().unwrap();
    assert!(residual < 1e-8, "residual {residual}");
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn malformed_json_exits_with_config_error() {
    let path = std::env::temp_dir().join("fqx_malformed_config.json");
    fs::write(&path, "{ this is not json").unwrap();
    let out = run(&["poisson-check", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_file(&path);
}

#[test]
fn missing_config_flag_is_a_config_error() {
    let out = run(&["growth"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_flags_produce_the_exact_power() {
    let out = run(&["kronecker-certify", "--N", "3", "--q", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["check"]["exact_sum"], "256");
    assert_eq!(report["check"]["target"], "256");
    assert_eq!(report["check"]["passes"], true);
}

#[test]
fn certify_config_reports_the_cancellation_deficit() {
    let cfg = config("kronecker_certify_dependent.json");
    let out = run(&["kronecker-certify", "--config", cfg.to_str().unwrap()]);
    // The dependent instance cancels; the strict deficit is the expected
    // outcome, so the check passes.
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["collisions"], true);
    let deficit = report["check"]["deficit"].as_f64().unwrap();
    assert!((deficit - 26.0).abs() < 1e-6, "deficit {deficit}"); // 27 - 1
}

#[test]
fn obstructed_relations_exit_as_failed_check() {
    let cfg = config("kronecker_relations_obstructed.json");
    let out = run(&["kronecker-relations", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["solvable"], false);
    assert_eq!(report["violations"][0]["relation"], serde_json::json!([2, -1]));
}

#[test]
fn kronecker_solve_succeeds_on_bundled_instance() {
    let cfg = config("kronecker_solve_sqrt2.json");
    let out = run(&["kronecker-solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["satisfied"], true);
    for r in report["residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap() < 0.01);
    }
}

#[test]
fn growth_writes_the_csv_series() {
    let cfg = config("growth_unit_comb.json");
    let csv_path = std::env::temp_dir().join("fqx_growth_series.csv");
    let out = run(&[
        "growth",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let exponent = report["fitted_exponent"].as_f64().unwrap();
    assert!((exponent - 1.0).abs() < 0.05);
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,value"));
    assert_eq!(csv.lines().count(), 11);
    let _ = fs::remove_file(&csv_path);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let cfg = config("theorem3_modulated_comb.json");
    let first = run(&["theorem3", "--config", cfg.to_str().unwrap()]);
    let second = run(&["theorem3", "--config", cfg.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn theorem2_passes_and_emits_series() {
    let cfg = config("theorem2_unit_comb.json");
    let csv_path = std::env::temp_dir().join("fqx_theorem2_series.csv");
    let out = run(&[
        "theorem2",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
    assert!(report["constant"].as_f64().unwrap() >= 3.0 - 1e-6);
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("r,value\n"));
    let _ = fs::remove_file(&csv_path);
}

#[test]
fn certificates_pass_on_bundled_configs() {
    for (cmd, cfg) in [("prop2", "prop2_unit_comb.json"), ("prop3", "prop3_unit_comb.json")] {
        let path = config(cfg);
        let out = run(&[cmd, "--config", path.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn bohr_and_parseval_and_periods_pass() {
    for (cmd, cfg) in [
        ("bohr", "bohr_two_terms.json"),
        ("parseval", "parseval_two_terms.json"),
        ("almost-periods", "almost_periods_single.json"),
        ("translation-bound", "translation_bound_unit_comb.json"),
        ("poisson-check", "poisson_square_lattice.json"),
    ] {
        let path = config(cfg);
        let out = run(&[cmd, "--config", path.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn output_flag_writes_the_report_file() {
    let cfg = config("translation_bound_unit_comb.json");
    let out_path = std::env::temp_dir().join("fqx_tb_report.json");
    let out = run(&[
        "translation-bound",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["sup_estimate"].as_f64(), Some(2.0));
    let _ = fs::remove_file(&out_path);
}
