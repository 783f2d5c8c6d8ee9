use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TRACE_HEADER: &str = "outer_iter,inner_iter,oracle_calls,t,psi_hat,f,g,wall_seconds";

fn fcbio(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcbio"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    let stdout = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(stdout.trim()).unwrap_or_else(|e| panic!("bad summary {stdout:?}: {e}"))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn min_norm_solve_prints_summary_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = fcbio(&["solve", "--experiment", "min_norm", "--dims", "10", "20", "--eps-f", "1e-4", "--eps-g", "1e-4"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s = summary(&out);
    let mut keys: Vec<_> = s.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["certified", "experiment", "f_gap", "g_gap", "oracle_calls", "wall_seconds"]);
    assert_eq!(s["experiment"], "min_norm");
    assert_eq!(s["certified"], true);
    assert!(s["g_gap"].as_f64().unwrap() <= 1e-4);
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some(TRACE_HEADER));
    assert!(trace.lines().nth(1).unwrap().starts_with("-1,"));
}

#[test]
fn identical_configs_give_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["solve", "--experiment", "min_norm", "--dims", "6", "12", "--seed", "3", "--eps-f", "1e-3", "--trace-every", "10"];
    let mut traces = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let mut args = base.to_vec();
        args.extend(["--out", name]);
        assert_eq!(fcbio(&args, dir.path()).status.code(), Some(0));
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let rows: Vec<String> = text.lines().skip(1).map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect();
        traces.push(rows);
    }
    assert!(traces[0].len() > 2);
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn hard_smooth_reports_stall() {
    let dir = tempfile::tempdir().unwrap();
    let out = fcbio(&["solve", "--experiment", "hard_smooth", "--horizon", "50"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("before 50 calls: true"), "{err}");
    let gap: f64 = err
        .lines()
        .find_map(|l| l.strip_prefix("stall: |f(x_0) - f*| = "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(gap >= 1.0 / 48.0);
    assert_eq!(summary(&out)["experiment"], "hard_smooth");
}

#[test]
fn logistic_trace_starts_at_log_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = fcbio(
        &["solve", "--experiment", "logistic", "--dims", "40", "5", "--eps-f", "1e-2", "--reference-factor", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s = summary(&out);
    assert!(s["f_gap"].as_f64().unwrap().abs() <= 1e-2);
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let first: Vec<f64> = trace.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((first[5] - std::f64::consts::LN_2).abs() < 1e-12);
    assert!((first[6] - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# small run\nexperiment = min_norm\ndims = 6 12\neps_f = 1e-3\neps_g = 1e-3\nout = from_file.csv\n").unwrap();
    let out = fcbio(&["solve", "--config", "run.cfg", "--out", "from_flag.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("from_flag.csv").exists());
    assert!(!dir.path().join("from_file.csv").exists());
}

#[test]
fn invalid_config_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "radius = -2\n").unwrap();
    let out = fcbio(&["solve", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("'radius'"), "{}", stderr(&out));
    let out = fcbio(&["solve", "--eps-f", "-1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("'eps_f'"));
    let out = fcbio(&["solve", "--budget", "per-round:0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_data_exits_with_io_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = fcbio(&["solve", "--experiment", "custom", "--data", "missing.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    std::fs::write(dir.path().join("bad.libsvm"), "+1 1:0.5\n-1 2:x\n").unwrap();
    let out = fcbio(&["solve", "--experiment", "custom", "--data", "bad.libsvm", "--format", "libsvm"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn generated_data_round_trips_into_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = fcbio(&["gen-data", "--experiment", "min_norm", "--dims", "6", "12", "--format", "libsvm", "--out", "d.libsvm"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let from_file = fcbio(
        &["solve", "--experiment", "min_norm", "--data", "d.libsvm", "--format", "libsvm", "--eps-f", "1e-3"],
        dir.path(),
    );
    let synthetic = fcbio(&["solve", "--experiment", "min_norm", "--dims", "6", "12", "--eps-f", "1e-3"], dir.path());
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    let (a, b) = (summary(&from_file), summary(&synthetic));
    assert_eq!(a["oracle_calls"], b["oracle_calls"]);
    assert_eq!(a["certified"], true);
    let custom = fcbio(&["solve", "--experiment", "custom", "--data", "d.libsvm", "--format", "libsvm", "--eps-f", "1e-3"], dir.path());
    assert_eq!(custom.status.code(), Some(0));
    assert!(summary(&custom)["f_gap"].is_null());
}

#[test]
fn verify_dispatch_and_unknown_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = fcbio(&["verify", "projections"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.lines().next().unwrap().starts_with("suite"));
    assert!(table.contains("ball_idempotent"));
    assert!(table.contains("0 failed"));
    let out = fcbio(&["verify", "everything"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
