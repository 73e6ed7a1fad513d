use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mermin-lhv"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn bounds_for_three_particles() {
    let out = cli(&["bounds", "--n", "3"]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert_eq!(j["classical_bound"], "2");
    assert_eq!(j["quantum_value"], "4");
    assert_eq!(j["eta_crit"], "3/4");
    assert_eq!(j["v_crit_f64"], 0.5);
}

#[test]
fn threshold_for_four_particles() {
    let out = cli(&["threshold", "--n", "4", "--v", "1"]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    let lo = j["eta_low"].as_f64().unwrap();
    let hi = j["eta_high"].as_f64().unwrap();
    assert!((lo - 2.0 / 3.0).abs() <= 1e-6 && (hi - 2.0 / 3.0).abs() <= 1e-6, "[{lo}, {hi}]");
    assert_eq!(j["exact_boundary_feasible"], true);
}

#[test]
fn fixture_verifies_at_its_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture3.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&cli(&["fixture", "--n", "3", "--out", p])), 0);
    let ok = cli(&["verify", "--model", p, "--n", "3", "--eta", "0.75", "--v", "1"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout_json(&ok)["exact_match"], true);
    let off = cli(&["verify", "--model", p, "--n", "3", "--eta", "0.8", "--v", "1"]);
    assert_eq!(code(&off), 1);
    let wrong_n = cli(&["verify", "--model", p, "--n", "4", "--eta", "0.75", "--v", "1"]);
    assert_eq!(code(&wrong_n), 2);
}

#[test]
fn argument_errors_exit_two() {
    for args in [
        vec!["bounds", "--n", "2"],
        vec!["bounds", "--n", "3", "--bogus"],
        vec!["target", "--n", "3", "--eta", "1.5", "--v", "1"],
        vec!["target", "--n", "3", "--eta", "x", "--v", "1"],
        vec!["tradeoff", "--n", "3", "--grid", "0.2,0.6"],
        vec!["threshold", "--n", "3", "--mode", "other"],
        vec!["threshold", "--n", "3", "--tol", "0"],
        vec!["fixture", "--n", "6"],
        vec!["simulate", "--source", "quantum", "--n", "3"],
        vec!["simulate", "--source", "lhv"],
        vec!["verify", "--model", "/nonexistent/model.json", "--n", "3", "--eta", "1", "--v", "1"],
    ] {
        assert_eq!(code(&cli(&args)), 2, "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&cli(&["--help"])), 0);
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        vec!["simulate", "--n", "3", "--eta", "3/4", "--v", "1", "--shots", "20000", "--seed", "9"],
        vec!["tradeoff", "--n", "3", "--grid", "0.5:1:0.125"],
        vec!["threshold", "--n", "3", "--v", "3/4"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = dir.path().join(format!("a{i}"));
        let b = dir.path().join(format!("b{i}"));
        for path in [&a, &b] {
            let mut full = args.clone();
            full.extend(["--out", path.to_str().unwrap()]);
            assert_eq!(code(&cli(&full)), 0, "{full:?}");
        }
        assert_eq!(read(&a), read(&b), "{args:?}");
    }
}

#[test]
fn threads_do_not_change_results() {
    let base = ["simulate", "--n", "4", "--eta", "2/3", "--v", "1/2", "--shots", "150000", "--seed", "4"];
    let one = cli(&[&base[..], &["--threads", "1"]].concat());
    let two = cli(&[&base[..], &["--threads", "3"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn csv_and_json_agree() {
    let grid = ["tradeoff", "--n", "3", "--grid", "0.5,0.8,0.9,1"];
    let csv = cli(&[&grid[..], &["--format", "csv"]].concat());
    let json = cli(&[&grid[..], &["--format", "json"]].concat());
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,eta,v_max"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let points = stdout_json(&json);
    let points = points.as_array().unwrap();
    assert_eq!(rows.len(), points.len());
    for (row, p) in rows.iter().zip(points) {
        assert_eq!(row[0], 3.0);
        assert!((row[1] - p["eta_f64"].as_f64().unwrap()).abs() < 1e-11);
        assert!((row[2] - p["v_max_f64"].as_f64().unwrap()).abs() < 1e-11);
        assert!(p["model"].is_object());
    }

    let target = ["target", "--n", "3", "--eta", "3/4", "--v", "1/2"];
    let csv = String::from_utf8(cli(&[&target[..], &["--format", "csv"]].concat()).stdout).unwrap();
    let json = stdout_json(&cli(&target));
    let cells: usize = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["outcomes"].as_array().unwrap().len())
        .sum();
    assert_eq!(csv.lines().count() - 1, cells);
}

#[test]
fn simulated_fixture_matches_quantum_target() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&cli(&["fixture", "--n", "3", "--out", p])), 0);
    let out = cli(&[
        "simulate", "--source", "lhv", "--model", p, "--eta", "3/4", "--v", "1", "--shots", "200000", "--seed", "1",
    ]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    assert_eq!(j["report"]["pass"], true);
    assert_eq!(j["table"]["shots"], 200000);
}
