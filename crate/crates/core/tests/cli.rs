use std::path::Path;
use std::process::{Command, Output};

use cavity_mems::cli::{figure_preset, FIGURE_PRESETS};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavity-mems"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn metadata<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix(": ")))
}

#[test]
fn presets_match_parameter_table() {
    let table = [
        ("1a", 0.0, 1.0, 0.0, 50.0),
        ("1b", 0.5, 1.0, 0.0, 50.0),
        ("1c", 5.0, 1.0, 0.0, 50.0),
        ("2a", 0.5, 0.9, 0.0, 500.0),
        ("2b", 0.5, 0.7, 0.0, 500.0),
        ("2c", 0.5, 0.6, 0.0, 500.0),
        ("3a", 0.0, 1.0, 0.0, 500.0),
        ("3b", 0.01, 1.0, 0.0, 500.0),
        ("3c", 5.0, 1.0, 0.0, 500.0),
        ("4a", 0.0, 1.0, 0.01, 500.0),
        ("4b", 0.5, 1.0, 0.01, 500.0),
        ("4c", 1.0, 1.0, 0.01, 500.0),
    ];
    assert_eq!(FIGURE_PRESETS.len(), table.len());
    for (tag, delta, lambda, gamma, gt_max) in table {
        let p = figure_preset(tag).unwrap();
        assert_eq!((p.delta_over_g, p.lambda, p.gamma_times_g, p.gt_max), (delta, lambda, gamma, gt_max), "{tag}");
        assert_eq!(p.bell_frontier, tag.starts_with('3'), "{tag}");
    }
}

#[test]
fn evolve_writes_schema_and_metadata() {
    let out = run(&["evolve", "--delta", "0.5", "--lambda", "1", "--gt-max", "50", "--no-timestamp"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# cavity-mems "));
    assert_eq!(metadata(&text, "delta_over_g"), Some("0.5"));
    assert_eq!(metadata(&text, "gt_max"), Some("50"));
    assert_eq!(metadata(&text, "n_steps"), Some("5001"));
    assert!(metadata(&text, "timestamp_unix").is_none());
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "gt,concurrence,linear_entropy,bell_max,purity");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 5001);
    assert_eq!(rows[0], vec![0.0, 0.0, 0.0, 2.0, 1.0]);
    assert_eq!(rows.last().unwrap()[0], 50.0);
}

#[test]
fn dephased_evolve_and_timestamp() {
    let out = run(&["evolve", "--delta", "0", "--gamma", "0.01", "--gt-max", "500", "--n-steps", "501"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(metadata(&text, "gamma_times_g"), Some("0.01"));
    assert!(metadata(&text, "timestamp_unix").is_some());
    let last = csv_rows(&text).pop().unwrap();
    assert!((last[1] - 0.25).abs() < 0.05);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        vec!["evolve", "--lambda", "1.5"],
        vec!["evolve", "--gamma", "-1"],
        vec!["evolve", "--n-steps", "1"],
        vec!["figure", "5d"],
        vec!["frontier", "--kind", "bell", "--samples", "10"],
        vec!["frontier", "--kind", "sphere"],
        vec!["recurrences", "--lambda", "0.5"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_with_one() {
    let out = run(&["evolve", "--n-steps", "3", "--output", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# figure 2c\ndelta = 0.5\nlambda = 0.6\ngt_max = 20\nn_steps = 21\n").unwrap();
    let out = run(&["evolve", "--config", cfg.to_str().unwrap(), "--lambda", "0.7", "--no-timestamp"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(metadata(&text, "delta_over_g"), Some("0.5"));
    assert_eq!(metadata(&text, "lambda"), Some("0.7"));
    assert_eq!(csv_rows(&text).len(), 21);

    std::fs::write(&cfg, "detuning = 1\n").unwrap();
    let out = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn figure_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(run(&["figure", "1c", "-o", d, "--n-steps", "101", "--no-timestamp"]).status.success());
    let traj = read(&dir.path().join("fig1c_trajectory.csv"));
    assert_eq!(metadata(&traj, "delta_over_g"), Some("5"));
    assert_eq!(metadata(&traj, "gt_max"), Some("50"));
    let werner = csv_rows(&read(&dir.path().join("fig1c_werner.csv")));
    assert_eq!(werner[0], vec![0.0, 1.0]);
    assert!(!dir.path().join("fig1c_bell.csv").exists());

    assert!(run(&["figure", "3a", "-o", d, "--no-timestamp"]).status.success());
    let rows = csv_rows(&read(&dir.path().join("fig3a_trajectory.csv")));
    assert_eq!(rows.len(), 50_001);
    assert!(rows.iter().all(|r| r[3] <= 2.0 + 1e-9));
    let bell = read(&dir.path().join("fig3a_bell.csv"));
    assert_eq!(bell.lines().find(|l| !l.starts_with('#')), Some("linear_entropy,value"));

    assert!(run(&["figure", "2c", "-o", d, "--n-steps", "11", "--no-timestamp"]).status.success());
    let traj = read(&dir.path().join("fig2c_trajectory.csv"));
    assert_eq!(metadata(&traj, "lambda"), Some("0.6"));
    assert_eq!(metadata(&traj, "delta_over_g"), Some("0.5"));
    assert_eq!(metadata(&traj, "gt_max"), Some("500"));
}

#[test]
fn frontier_curves() {
    let mems = run(&["frontier", "--kind", "mems", "--n-points", "4", "--no-timestamp"]);
    let rows = csv_rows(&String::from_utf8(mems.stdout).unwrap());
    assert!(rows.iter().any(|r| (r[0] - 16.0 / 27.0).abs() < 1e-11 && (r[1] - 2.0 / 3.0).abs() < 1e-11));

    let werner = run(&["frontier", "--kind", "werner", "--no-timestamp"]);
    let rows = csv_rows(&String::from_utf8(werner.stdout).unwrap());
    assert_eq!(rows[0], vec![0.0, 1.0]);
    let last = rows.last().unwrap();
    assert!((last[0] - 8.0 / 9.0).abs() < 1e-11 && last[1] == 0.0);
}

#[test]
fn recurrences_report() {
    let out = run(&["recurrences", "--delta", "0.5", "--k-max", "100", "--no-timestamp"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(metadata(&text, "classification"), Some("EFFECTIVELY_IRRATIONAL"));
    assert_eq!(metadata(&text, "best_q"), Some("none"));
    assert_eq!(text.lines().find(|l| !l.starts_with('#')), Some("k,gt,concurrence"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 100);
    let omega = 8.25f64.sqrt();
    for r in rows {
        let k = r[0];
        assert!((r[1] - 2.0 * k * std::f64::consts::PI / omega).abs() < 1e-9);
        assert!((r[2] - (0.5 * k * std::f64::consts::PI / omega).sin().abs()).abs() < 1e-9);
    }
}

#[test]
fn seeded_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("bell{i}.csv"));
        let args = ["frontier", "--kind", "bell", "--samples", "100000", "--seed", "7", "--n-points", "41"];
        let out = bin().args(args).args(["--no-timestamp", "--output", path.to_str().unwrap()]).output().unwrap();
        assert!(out.status.success());
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
}
