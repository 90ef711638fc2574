use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use qcorr::cli::config::{Experiment, ExperimentConfig, Format, Grid};
use qcorr::cli::run::{run_experiment, SCAN_HEADER, SUMMARY_SCHEMA};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qcorr"))
}

fn all_formats(exp: Experiment, dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        formats: BTreeSet::from([Format::Csv, Format::Json, Format::Svg]),
        trials: 2000,
        ..ExperimentConfig::new(exp, dir)
    }
}

#[test]
fn every_summary_validates_against_the_schema() {
    let schema: Value = serde_json::from_str(SUMMARY_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for exp in Experiment::ALL {
        let summary = run_experiment(&all_formats(exp, dir.path())).unwrap();
        let text = std::fs::read_to_string(dir.path().join(format!("{}.summary.json", exp.name()))).unwrap();
        assert_eq!(text, summary.to_json());
        let doc: Value = serde_json::from_str(&text).unwrap();
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{exp}: {errors:?}");
    }
}

#[test]
fn every_csv_has_a_header() {
    let dir = tempfile::tempdir().unwrap();
    for exp in Experiment::ALL {
        run_experiment(&all_formats(exp, dir.path())).unwrap();
        let csv = std::fs::read_to_string(dir.path().join(format!("{}.csv", exp.name()))).unwrap();
        let first = csv.lines().next().unwrap();
        assert!(
            first.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == ','),
            "{first}"
        );
        assert!(!csv.contains('\r'));
    }
}

#[test]
fn writes_stay_inside_output_dir() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("nested/out");
    for exp in Experiment::ALL {
        run_experiment(&all_formats(exp, &out)).unwrap();
    }
    let top: Vec<_> = std::fs::read_dir(root.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(top, vec![std::ffi::OsString::from("nested")]);
    for entry in std::fs::read_dir(&out).unwrap() {
        let entry = entry.unwrap();
        assert!(entry.file_type().unwrap().is_file());
    }
}

#[test]
fn scan_csv_schema_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::new(Experiment::Scan, dir.path());
    let summary = run_experiment(&cfg).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SCAN_HEADER.join(","));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 360);
    for r in &rows {
        assert!((r[7] - r[0].cos()).abs() < 1e-12);
    }
    assert!(summary.metric_f64("max_abs_error_vs_cosine").unwrap() < 1e-12);
    assert_eq!(summary.files, vec!["scan.csv"]);
}

#[test]
fn mzi_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        grid: Grid {
            start: 0.0,
            stop: std::f64::consts::PI,
            points: 3,
        },
        ..ExperimentConfig::new(Experiment::Mzi, dir.path())
    };
    run_experiment(&cfg).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("mzi.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dphi_rad,p_d1,p_d2");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000"));
}

#[test]
fn rto_summary_at_zero_phase() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&ExperimentConfig::new(Experiment::Rto, dir.path())).unwrap();
    assert!((s.metric_f64("E").unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn empty_sample_still_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sample", "--trials", "0", "--format", "csv,json", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    assert_eq!(csv, "a,b,count\nA1,B1,0\nA1,B2,0\nA2,B1,0\nA2,B2,0\n");
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["metrics"]["total"], 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| {
        bin()
            .args(args)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(code(&["table1"]), Some(0));
    assert_eq!(code(&["warp-drive"]), Some(2));
    assert_eq!(code(&["scan", "--grid", "0:1:1"]), Some(2));
    assert_eq!(code(&["scan", "--trials", "-1"]), Some(2));
    assert_eq!(code(&["scan", "--format", "pdf"]), Some(2));

    // output path occupied by a regular file
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let status = bin().args(["rto", "--out"]).arg(&blocker).output().unwrap().status;
    assert_eq!(status.code(), Some(3));
}

#[test]
fn config_file_and_env_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "experiment = \"rto\"\nphase_b = \"pi\"\nseed = 7\n").unwrap();
    let env_out = dir.path().join("env-out");
    let out = bin()
        .args(["rto", "--config"])
        .arg(&cfg_path)
        .env("QCORR_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(env_out.join("rto.csv").exists());
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["config"]["seed"], 7);
    assert!((summary["metrics"]["E"].as_f64().unwrap() + 1.0).abs() < 1e-12);

    std::fs::write(&cfg_path, "seed = [1").unwrap();
    let out = bin().args(["rto", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.toml:1"));
}
