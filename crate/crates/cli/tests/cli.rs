use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn lab(kind: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_melnikov-lab"))
        .arg(kind)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn soliton_demo_reports_annihilation_time() {
    let dir = tempfile::tempdir().unwrap();
    let run = lab("soliton-demo", &config("soliton_demo.json"), dir.path(), &["--svg"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let r = report(dir.path());
    let t_star = r["results"]["t_star"].as_f64().unwrap();
    assert!((t_star - std::f64::consts::LN_2).abs() < 1e-12);
    assert_eq!(r["passed"], Value::Bool(true));
    assert_eq!(r["calibration"]["orientation"].as_f64().unwrap().abs(), 1.0);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,c\n"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 2));
    assert!(dir.path().join("trajectory.svg").exists());
}

#[test]
fn free_scan_finds_closed_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let run = lab("floquet-scan", &config("floquet_scan_free.json"), dir.path(), &[]);
    assert_eq!(run.status.code(), Some(0));
    let r = report(dir.path());
    let closed: Vec<f64> =
        r["results"]["closed_gaps"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(closed.len(), 2, "{closed:?}");
    assert!((closed[0] - 0.25).abs() < 1e-8 && (closed[1] - 1.0).abs() < 1e-8, "{closed:?}");
    assert!(r["results"]["open_gaps"].as_array().unwrap().is_empty());
    assert!(!dir.path().join("discriminant.svg").exists());
}

#[test]
fn ba_verify_example_passes_and_writes_path_grid() {
    let dir = tempfile::tempdir().unwrap();
    let run = lab("ba-verify", &config("ba_verify.json"), dir.path(), &[]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let grid = std::fs::read_to_string(dir.path().join("potential_path.csv")).unwrap();
    assert!(grid.starts_with("x,tau,u_re,u_im\n"));
    assert_eq!(grid.lines().count(), 1 + 5 * 5);
}

#[test]
fn evolve_example_conserves_discriminant() {
    let dir = tempfile::tempdir().unwrap();
    let run = lab("evolve", &config("evolve_gap_source.json"), dir.path(), &["--svg"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let drift = std::fs::read_to_string(dir.path().join("delta_drift.csv")).unwrap();
    assert!(drift.starts_with("t,delta_probe_1,"));
    let invariants = std::fs::read_to_string(dir.path().join("invariants.csv")).unwrap();
    assert!(invariants.starts_with("t,mean_u,l2,delta_probe_1"));
    assert!(dir.path().join("waterfall.svg").exists());
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let run = lab("verify-all", &config("verify_all.json"), dir.path(), &["--seed", "11"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let r = report(dir.path());
    assert_eq!(r["seed"].as_u64(), Some(11));
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), r["tolerances"].as_array().unwrap().len());
    assert!(checks.iter().all(|c| c["passed"] == Value::Bool(true)));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let run = lab("soliton-demo", &config("soliton_demo.json"), dir.path(), &["--seed", "3"]);
        assert_eq!(run.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&a, "report.json"), read(&b, "report.json"));
    assert_eq!(read(&a, "trajectory.csv"), read(&b, "trajectory.csv"));
    assert!(!String::from_utf8(read(&a, "report.json")).unwrap().contains("elapsed"));
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = write_config(dir.path(), r#"{"kappa": 1, "c0": 0.5, "speed": 3}"#);
    assert_eq!(lab("soliton-demo", &bad, &out, &[]).status.code(), Some(2));
    assert!(!out.join("report.json").exists());
    assert_eq!(lab("soliton-demo", &dir.path().join("missing.json"), &out, &[]).status.code(), Some(2));
    assert_eq!(lab("no-such-kind", &bad, &out, &[]).status.code(), Some(2));
    let good = config("soliton_demo.json");
    let threads = Command::new(env!("CARGO_BIN_EXE_melnikov-lab"))
        .args(["soliton-demo", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out)
        .env("MELNIKOV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
    // Source energy on a band edge of the free operator.
    let edge = write_config(
        dir.path(),
        r#"{"grid": {"n": 32, "length": 6.283185307179586}, "u0": "zero", "dt": 0.01, "t_end": 0.1,
            "sources": [{"energy": 0.25, "coupling": 1}]}"#,
    );
    assert_eq!(lab("evolve", &edge, &out, &[]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let strict = write_config(
        dir.path(),
        r#"{"grid": {"n": 64, "length": 6.283185307179586}, "u0": {"cos": 0.2}, "dt": 0.001, "t_end": 0.02,
            "sources": [{"energy": 0.2, "coupling": 0.05}], "probes": [0.6, 1.5],
            "tolerances": {"drift": 1e-30}}"#,
    );
    let out = dir.path().join("out");
    let run = lab("evolve", &strict, &out, &[]);
    assert_eq!(run.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["passed"], Value::Bool(false));
    assert_eq!(r["tolerances"][0]["tolerance"].as_f64(), Some(1e-30));
}
