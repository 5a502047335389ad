//! End-to-end checks of the `moimpute` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

const SMALL: [&str; 6] = ["--population", "12", "--max-generations", "3", "--pool-size", "4"];

fn moimpute(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moimpute"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn gen_missing_writes_mask_and_sidecar() {
    let dir = tempdir().unwrap();
    let out = moimpute(&["gen-missing", "--dataset", "iris", "--ratio", "0.1", "--pattern", "Medium"], dir.path());
    let sidecar = stdout_json(&out);
    assert_eq!(sidecar["masked_cells"], 60);
    assert_eq!(sidecar["spec"]["pattern"], "Medium");
    let csv = fs::read_to_string(dir.path().join("mask.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61, "header plus one line per masked cell");
    assert!(dir.path().join("mask.json").exists());
}

#[test]
fn gen_missing_rejects_over_capacity() {
    let dir = tempdir().unwrap();
    let out = moimpute(&["gen-missing", "--dataset", "sonar", "--ratio", "0.05"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("allows at most"));
}

#[test]
fn run_writes_report_files() {
    let dir = tempdir().unwrap();
    let mut args = vec!["run", "--dataset", "iris", "--formulation", "VR", "--out", "res"];
    args.extend(SMALL);
    let report = stdout_json(&moimpute(&args, dir.path()));
    assert_eq!(report["formulation"], "VR");
    assert_eq!(report["failed"], false);
    assert!(report["generations"].as_u64().unwrap() <= 3);
    let names: Vec<String> = fs::read_dir(dir.path().join("res"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    for ext in [".json", ".history.jsonl", ".toml", ".csv"] {
        assert!(names.iter().any(|n| n.ends_with(ext)), "missing {ext} in {names:?}");
    }

    // the saved config reproduces the run
    let toml = names.iter().find(|n| n.ends_with(".toml")).unwrap();
    let config = format!("res/{toml}");
    let again = stdout_json(&moimpute(&["run", "--config", &config, "--out", "res2"], dir.path()));
    assert_eq!(again["front1_size"], report["front1_size"]);
    assert_eq!(again["mean_objectives"], report["mean_objectives"]);
}

#[test]
fn matrix_resumes_and_report_aggregates() {
    let dir = tempdir().unwrap();
    let mut args = vec![
        "matrix", "--datasets", "iris", "--formulations", "ASW,VR", "--ratios", "0.05",
        "--patterns", "Simple", "--types", "Overall", "--situations", "TestOnly", "--seeds", "1",
        "--out", "grid",
    ];
    args.extend(SMALL);
    let first = moimpute(&args, dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let grid = dir.path().join("grid");
    assert_eq!(fs::read_to_string(grid.join("manifest.txt")).unwrap().lines().count(), 2);
    assert!(grid.join("reports.csv").exists());

    let second = moimpute(&args, dir.path());
    assert!(String::from_utf8_lossy(&second.stderr).contains("(2 resumed)"));

    let summary = moimpute(&["report", "grid", "--out", "summary"], dir.path());
    assert!(summary.status.success());
    let table = String::from_utf8_lossy(&summary.stdout);
    assert!(table.starts_with("category"));
    assert!(dir.path().join("summary/aggregate.csv").exists());
    let rows = fs::read_to_string(dir.path().join("summary/reports.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
}
