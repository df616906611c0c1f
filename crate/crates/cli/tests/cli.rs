use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use signorini_core::freeboundary::{classifications_from_csv, Verdict};
use signorini_core::functionals::FrequencyProfile;
use signorini_core::io::read_field;

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_signorini"));
    cmd.args(args).env_remove("SIGNORINI_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run_with(cmd: &str, cfg: &Path, out: &Path) -> Output {
    run(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[])
}

const REGULAR_257: &str = r#"{
    "grid": {"dim": 2, "resolution": 257},
    "boundary": {"exact": "regular32:a=1,nu=0deg"}
}"#;

#[test]
fn solve_writes_field_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", REGULAR_257);
    let out = dir.path().join("out");
    let o = run_with("solve", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let u = read_field(&out.join("field")).unwrap();
    assert_eq!(u.grid().resolution(), 257);
    let diag: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["converged"], true);
}

#[test]
fn malformed_config_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{"grid": {"dim": 2, "resolution": 33}, "boundary": {"exact": "constant"}, "solver": {"tol_residual": "tiny"}}"#,
    );
    let o = run_with("solve", &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("solver.tol_residual"), "{err}");
    let cfg = config(dir.path(), "d.json", "{ not json");
    assert_eq!(run_with("solve", &cfg, &dir.path().join("out")).status.code(), Some(1));
}

#[test]
fn exhausted_budget_exits_two_with_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{"grid": {"dim": 2, "resolution": 65}, "boundary": {"exact": "regular32:a=1,nu=0deg"},
            "solver": {"max_sweeps": 1}}"#,
    );
    let out = dir.path().join("out");
    let o = run_with("solve", &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["converged"], false);
    assert!(out.join("field.bin").exists());
}

#[test]
fn profile_of_exact_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{"grid": {"dim": 2, "resolution": 257}, "boundary": {"exact": "regular32:a=1,nu=0deg"},
            "field": "exact", "analysis": {"radii": [0.001, 0.0625, 0.1, 0.2, 0.28]}}"#,
    );
    let out = dir.path().join("out");
    let o = run_with("profile", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("profile_0.csv")).unwrap();
    assert!(csv.starts_with("r,H,D,N,Ntilde,Nhat,W_1p5,W_2,m_1p5,m_2,degenerate"));
    let p = FrequencyProfile::from_csv(&csv).unwrap();
    assert_eq!(p.to_csv(), csv);
    assert!(p.rows[0].degenerate);
    for row in &p.rows[1..] {
        assert!(!row.degenerate);
        assert!((row.n - 1.5).abs() < 0.02, "{row:?}");
    }
    assert!(out.join("profile_0.json").exists());
}

#[test]
fn off_plane_center_and_missing_field_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{"grid": {"dim": 2, "resolution": 65}, "boundary": {"exact": "regular32"},
            "field": "exact", "analysis": {"centers": [[0.0, 0.25]]}}"#,
    );
    assert_eq!(run_with("profile", &cfg, &dir.path().join("out")).status.code(), Some(1));
    let cfg = config(
        dir.path(),
        "d.json",
        r#"{"grid": {"dim": 2, "resolution": 65}, "boundary": {"exact": "regular32"},
            "field": {"file": "nowhere/field"}}"#,
    );
    let o = run_with("profile", &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));
}

#[test]
fn classify_exact_q_is_singular() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{"grid": {"dim": 2, "resolution": 513}, "boundary": {"exact": "qpoly2d:1"}, "field": "exact"}"#,
    );
    let out = dir.path().join("out");
    let o = run_with("classify", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = classifications_from_csv(&fs::read_to_string(out.join("classification.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].verdict, Verdict::Singular(2));
}

#[test]
fn solved_field_round_trip_through_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "solve.json", REGULAR_257);
    let solved = dir.path().join("solved");
    assert_eq!(run_with("solve", &cfg, &solved).status.code(), Some(0));
    let cfg = config(
        dir.path(),
        "blow.json",
        r#"{"grid": {"dim": 2, "resolution": 257}, "boundary": {"exact": "regular32:a=1,nu=0deg"},
            "field": {"file": "solved/field"}}"#,
    );
    let out = dir.path().join("blow");
    let o = run_with("blowup", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("blowup_0.json")).unwrap()).unwrap();
    let metrics: Vec<f64> = v["rotation_metrics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m.as_f64().unwrap())
        .collect();
    assert!(metrics.len() >= 2);
    assert!(metrics.windows(2).all(|w| w[1] < w[0]), "{metrics:?}");
    assert_eq!(v["fit"]["kind"]["kind"], "regular");
    assert!(read_field(&out.join("blowup_0_limit")).is_ok());
}

#[test]
fn outputs_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        r#"{"grid": {"dim": 2, "resolution": 129}, "boundary": {"exact": "regular32:a=1,nu=0deg"},
            "analysis": {"centers": [[0.0, 0.0], [0.2, 0.0]]}}"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("out{threads}"));
        let args = ["profile", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        let o = run(&args, &[("SIGNORINI_THREADS", threads)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push([
            fs::read(out.join("profile_0.csv")).unwrap(),
            fs::read(out.join("profile_1.csv")).unwrap(),
        ]);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn verify_rejects_unknown_suite() {
    let o = run(&["verify", "--suite", "everything"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_monotonicity_reports_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let o = run(&["verify", "--suite", "monotonicity", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(series.starts_with("label,r,value,delta"));
    assert!(series.lines().any(|l| l.starts_with("W_1p5 solved 513,")));
    assert!(series.lines().any(|l| l.starts_with("Nhat drift 129,")));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
}
