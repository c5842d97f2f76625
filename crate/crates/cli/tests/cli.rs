use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use beppo_cli::plot::{emit_plot_script, PlotKind};
use beppo_cli::RunError;
use serde_json::Value;

fn beppo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beppo")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_config(experiment: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![experiment, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    beppo(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

const ELLIPTIC: &str = r#"{
  "experiment": "ellipticity-check",
  "d": 2,
  "tensors": ["laplacian", "isotropic(1,1)"]
}"#;

#[test]
fn malformed_json_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\n  \"experiment\": \"deny-lions\",\n  \"n_values\": [1, 2,\n}\n");
    let o = run_config("deny-lions", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.json:"), "{}", stderr(&o));
}

#[test]
fn unknown_key_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = "{\n  \"experiment\": \"ellipticity-check\",\n  \"d\": 2,\n  \"tensors\": [\"laplacian\"],\n  \"colour\": 1\n}\n";
    let cfg = write_config(dir.path(), "unknown.json", text);
    let o = run_config("ellipticity-check", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("unknown.json:5"), "{err}");
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn experiment_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", ELLIPTIC);
    let o = run_config("solve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("e.json:2"), "{}", stderr(&o));
}

#[test]
fn missing_field_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "experiment": "density-demo",
  "field": "file:nowhere.bin",
  "grid": { "d": 1, "half_width": 8.0, "n": 64 },
  "cutoffs": [2.0]
}"#;
    let cfg = write_config(dir.path(), "f.json", text);
    let o = run_config("density-demo", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("nowhere.bin"), "{}", stderr(&o));
}

#[test]
fn rank_one_failure_exits_two_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{ "experiment": "ellipticity-check", "d": 2, "tensors": ["isotropic(-3,1)"] }"#;
    let cfg = write_config(dir.path(), "lh.json", text);
    let out = dir.path().join("out");
    let o = run_config("ellipticity-check", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["exit_code"], 2);
    assert!(out.join("ellipticity.csv").exists());
}

#[test]
fn unreachable_tolerance_hits_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "experiment": "solve",
  "grid": { "d": 2, "half_width": 8.0, "n": 32 },
  "tensor": "perturbed-laplacian(0.3)",
  "rhs": "gaussian-dipole(2, 1)",
  "tol": 1e-300
}"#;
    let cfg = write_config(dir.path(), "cap.json", text);
    let o = run_config("solve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn flags_override_and_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", ELLIPTIC);
    let out = dir.path().join("elsewhere");
    let o = run_config("ellipticity-check", &cfg, &out, &["--seed", "77"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["effective"]["seed"], 77);
    assert_eq!(m["effective"]["out"], out.to_str().unwrap());
    assert_eq!(m["status"], "ok");
    assert!(m["outputs"].as_array().unwrap().iter().any(|v| v == "ellipticity.csv"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "experiment": "growth-study",
  "seed": 5,
  "decomposition": { "grid": { "d": 2, "half_width": 8.0, "n": 32 }, "levels": 1, "samples": 4, "kmax": 1.0 }
}"#;
    let cfg = write_config(dir.path(), "g.json", text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_config("growth-study", &cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(run_config("growth-study", &cfg, &b, &[]).status.code(), Some(0));
    let mut compared = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "manifest.json" {
            continue;
        }
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
        compared += 1;
    }
    assert!(compared > 0);
}

#[test]
fn plot_script_names_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    fs::write(&csv, "r,sup\r\n1,2\r\n").unwrap();
    match emit_plot_script(&csv, PlotKind::Growth) {
        Err(RunError::MissingColumn { column, .. }) => assert_eq!(column, "envelope"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn growth_and_convergence_scripts_use_log_axes() {
    let dir = tempfile::tempdir().unwrap();
    let growth = dir.path().join("g.csv");
    fs::write(&growth, "r,sup,envelope\r\n1,2,3\r\n2,3,4\r\n").unwrap();
    let conv = dir.path().join("c.csv");
    fs::write(&conv, "n,error\r\n32,1e-3\r\n64,1e-9\r\n").unwrap();
    let g = fs::read_to_string(emit_plot_script(&growth, PlotKind::Growth).unwrap()).unwrap();
    let c = fs::read_to_string(emit_plot_script(&conv, PlotKind::Convergence).unwrap()).unwrap();
    assert!(g.contains("logscale"));
    assert!(c.contains("logscale y"));
}
