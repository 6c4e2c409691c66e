use std::fs;
use std::process::{Command, Output};

use duotherm::export::parse_csv;

const HEADER: &str = "t1,t2,var_t1,var_t2,cov,total_var,det_qfim,attain_residual,singular";

fn duotherm(args: &[&str]) -> Output {
    duotherm_env(args, &[])
}

fn duotherm_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_duotherm"));
    cmd.args(args).env_remove("DUOTHERM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_to_stdout_is_csv() {
    let o = duotherm(&["sweep", "--setup", "swi2", "--grid", "3"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some(HEADER));
    assert_eq!(parse_csv(text.as_bytes()).unwrap().len(), 9);
}

#[test]
fn sweep_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("mz2b");
    let o = duotherm(&[
        "sweep",
        "--setup",
        "mz2b_wc",
        "--grid",
        "4",
        "--format",
        "both",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("mz2b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
    let pgm = fs::read(dir.path().join("mz2b.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n4 4\n255\n"));
    assert_eq!(pgm.len(), b"P5\n4 4\n255\n".len() + 16);
}

#[test]
fn singular_setup_renders_white_and_inf() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("ps.csv");
    let o = duotherm(&[
        "sweep",
        "--setup",
        "mz1b",
        "--grid",
        "3",
        "--format",
        "both",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&base).unwrap();
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.contains(",inf,") && l.ends_with("true")));
    let pgm = fs::read(dir.path().join("ps.pgm")).unwrap();
    assert!(pgm[pgm.len() - 9..].iter().all(|&p| p == 255));
}

#[test]
fn json_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    fs::write(&cfg, r#"{"setup": "swi3", "grid_n": 5, "t_max": 0.8}"#).unwrap();
    let o = duotherm(&["sweep", "--config", cfg.to_str().unwrap(), "--grid", "2"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let recs = parse_csv(stdout(&o).as_bytes()).unwrap();
    assert_eq!(recs.len(), 4);
    assert_eq!(recs[3].t1, 0.8);
}

#[test]
fn bounds_prints_one_row() {
    let o = duotherm(&["bounds", "--setup", "swi2", "--t1", "0.3", "--t2", "0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = parse_csv(stdout(&o).as_bytes()).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!((recs[0].t1, recs[0].t2), (0.3, 0.7));
    assert!(recs[0].var_t1.is_finite() && !recs[0].singular);
}

#[test]
fn compare_lists_every_setup() {
    let o = duotherm(&["compare", "--grid", "3"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "setup,effective_dimension,min_var,max_var,min_total,max_total"
    );
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().any(|l| l.starts_with("mz1b,2,empty,empty")));
    assert!(lines.iter().any(|l| l.starts_with("swi4,8,")));
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        &["sweep", "--setup", "swi9"][..],
        &["sweep", "--grid", "1"],
        &["sweep", "--tmin", "2.0"],
        &["sweep", "--format", "pgm"],
        &["sweep", "--setup", "swi2", "--qubits", "2"],
        &["sweep", "--config", "/nonexistent/spec.json"],
        &["bounds", "--t1", "-1", "--t2", "0.5"],
        &["compare", "--setup", "swi2"],
    ] {
        let o = duotherm(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn bad_thread_env_is_a_configuration_error() {
    let o = duotherm_env(
        &["sweep", "--setup", "swi2", "--grid", "2"],
        &[("DUOTHERM_THREADS", "lots")],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("run");
    let o = duotherm(&[
        "sweep",
        "--setup",
        "swi2",
        "--grid",
        "2",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing"));
}

#[test]
fn output_is_identical_across_worker_counts() {
    let args = ["sweep", "--setup", "swi4", "--grid", "6"];
    let one = duotherm_env(&args, &[("DUOTHERM_THREADS", "1")]);
    let eight = duotherm_env(&args, &[("DUOTHERM_THREADS", "8")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, eight.stdout);
}

#[test]
fn validate_reports_named_checks_and_injected_failure() {
    let o = duotherm(&["validate", "--grid", "3", "--inject-defect"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL channel.kraus_completeness"));
    assert!(text.contains("PASS channel.gibbs_fixed_point"));
    assert!(text.lines().all(|l| l.contains(" ms): ")));
}

#[test]
fn validate_json_is_machine_readable() {
    let o = duotherm(&["validate", "--grid", "3", "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .all(|c| c["name"].is_string() && c["passed"].is_boolean() && c["wall_time"].is_f64()));
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    // Exit status tracks the report.
    assert_eq!(o.status.code(), Some(if failed.is_empty() { 0 } else { 1 }));
}
