use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_geodesic-forest"));
    c.env_remove("GEODESIC_FOREST_JOBS");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(path: PathBuf) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) {
    let mut args = vec!["generate", "--classes", "3", "--n", "240", "--seed", "4", "--out", name];
    args.extend_from_slice(extra);
    ok(dir, &args);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "a.csv", &[]);
    generate(dir.path(), "b.csv", &[]);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let manifest = json(dir.path().join("a.csv.manifest.json"));
    assert_eq!(manifest["command"], "generate");
    assert_eq!(manifest["seeds"][0], 4);
}

#[test]
fn zero_noise_collapses_each_class() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "d.csv", &["--noise", "0"]);
    let mut seen: std::collections::HashMap<String, Vec<String>> = Default::default();
    for row in rows(dir.path().join("d.csv")) {
        let coords = row[1..].to_vec();
        let first = seen.entry(row[0].clone()).or_insert_with(|| coords.clone());
        assert_eq!(*first, coords);
    }
    assert_eq!(seen.len(), 3);
}

#[test]
fn predictions_match_training_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "d.csv", &[]);
    ok(d, &["fit", "--data", "d.csv", "--model", "forest", "--trees", "6", "--out", "m.json"]);
    ok(d, &["predict", "--model", "m.json", "--data", "d.csv", "--out", "p.csv"]);
    let fit_acc = json(d.join("m.json.manifest.json"))["results"]["accuracy"].as_f64().unwrap();
    let pred_acc = json(d.join("p.csv.manifest.json"))["results"]["accuracy"].as_f64().unwrap();
    assert_eq!(fit_acc, pred_acc);

    let truth = rows(d.join("d.csv"));
    let pred = rows(d.join("p.csv"));
    let hits = truth.iter().zip(&pred).filter(|(t, p)| t[0] == p[0]).count();
    assert_eq!(hits as f64 / truth.len() as f64, pred_acc);
    for p in &pred {
        let total: f64 = p[1..].iter().map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "d.csv", &[]);
    let bad = run(d, &["fit", "--data", "d.csv", "--impurity", "bogus", "--out", "m.json"]);
    assert_eq!(bad.status.code(), Some(2));
    let mismatch = run(d, &["fit", "--data", "d.csv", "--impurity", "mse", "--out", "m.json"]);
    assert_eq!(mismatch.status.code(), Some(2));
    let coords = run(
        d,
        &["fit", "--data", "d.csv", "--geometry", "euclidean", "--coords", "poincare", "--out", "m.json"],
    );
    assert_eq!(coords.status.code(), Some(2));
    assert!(!d.join("m.json").exists());
}

#[test]
fn off_manifold_rows_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.csv"), "label,x0,x1,x2\n0,1.0,0.0,0.0\n1,2.0,0.5,0.5\n").unwrap();
    let out = run(d, &["fit", "--data", "bad.csv", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn euclidean_fit_on_raw_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "d.csv", &[]);
    ok(d, &["fit", "--data", "d.csv", "--geometry", "euclidean", "--out", "e.json"]);
    ok(d, &["predict", "--model", "e.json", "--data", "d.csv", "--out", "p.csv"]);
    assert_eq!(rows(d.join("p.csv")).len(), 240);
}

#[test]
fn evaluate_reports_identical_specs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "d.csv", &[]);
    let stdout = ok(
        d,
        &[
            "evaluate", "--data", "d.csv", "--predictor", "hyperdt,name=a", "--predictor",
            "hyperdt,name=b", "--folds", "3", "--seeds", "0,1", "--out-dir", "ev",
        ],
    );
    assert!(stdout.contains("a vs b: identical"), "{stdout}");
    assert_eq!(rows(d.join("ev/cv.csv")).len(), 2 * 3 * 2);
    let summary = json(d.join("ev/summary.json"));
    assert_eq!(summary["t_tests"].as_array().unwrap().len(), 1);
    assert!(d.join("ev/manifest.json").exists());
}

#[test]
fn poincare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "d.csv", &["--curvature", "2"]);
    let conv = |from: &str, to: &str, src: &str, dst: &str| {
        ok(d, &["convert", "--data", src, "--from", from, "--to", to, "--curvature", "2", "--out", dst]);
    };
    conv("hyperboloid", "poincare", "d.csv", "p.csv");
    conv("poincare", "hyperboloid", "p.csv", "back.csv");
    for (a, b) in rows(d.join("d.csv")).iter().zip(rows(d.join("back.csv"))) {
        assert_eq!(a[0], b[0]);
        let x0: f64 = a[1].parse().unwrap();
        for (u, v) in a[1..].iter().zip(&b[1..]) {
            let (u, v): (f64, f64) = (u.parse().unwrap(), v.parse().unwrap());
            assert!((u - v).abs() <= 1e-10 * x0.max(1.0), "{u} vs {v}");
        }
    }
}

#[test]
fn boundaries_export_schema() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d, "d.csv", &[]);
    ok(d, &["fit", "--data", "d.csv", "--max-depth", "2", "--out", "t.json"]);
    ok(d, &["boundaries", "--model", "t.json", "--resolution", "16", "--out", "b.json"]);
    let b = json(d.join("b.json"));
    let first = &b["boundaries"][0];
    assert_eq!(first["depth"], 0);
    assert_eq!(first["region"], "");
    assert!(first["angle"].is_f64());
    assert!(first["polyline"][0].as_array().unwrap().len() == 2);
    assert_eq!(b["grid"]["resolution"], 16);
    assert_eq!(b["grid"]["classes"].as_array().unwrap().len(), 256);

    ok(d, &["fit", "--data", "d.csv", "--model", "forest", "--trees", "2", "--out", "f.json"]);
    let forest = run(d, &["boundaries", "--model", "f.json", "--out", "x.json"]);
    assert_eq!(forest.status.code(), Some(1));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["sweep", "--axis", "max_depth", "--grid", "1,3", "--trials", "2", "--n", "200", "--out", "s.json"],
    );
    let s = json(d.join("s.json"));
    let rows = s["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["value"], 3);
    assert_eq!(json(d.join("s.json.manifest.json"))["seeds"].as_array().unwrap().len(), 2);
}
