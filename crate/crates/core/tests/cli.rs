//! End-to-end runs of the `dtcae` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dtcae::{load_model, save_model, Dims, ModelParams};

fn dtcae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtcae")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = dtcae(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A small dataset so training runs stay quick.
fn small_data(dir: &Path, classes: usize) -> std::path::PathBuf {
    let file = dir.join(format!("small{classes}.json"));
    let classes = format!("classes={classes}");
    ok(&["synth", "--seed", "3", "--out", path(&file), "--set", "points=12,12,16", "--set", &classes]);
    file
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["synth", "--seed", "7", "--out", path(&a)]);
    ok(&["synth", "--seed", "7", "--out", path(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.json");
    ok(&["synth", "--seed", "8", "--out", path(&c)]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn missing_required_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = dtcae(&["synth", "--out", path(&dir.path().join("a.json"))]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("'seed'"), "{}", stderr(&out));

    let out = dtcae(&["train", "--out", path(dir.path())]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("'data'"), "{}", stderr(&out));
}

#[test]
fn config_file_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let data = dir.path().join("d.json");
    fs::write(&cfg, format!("# synthetic data\nseed = 5\nout = {}\npoints = 4,4,6\n", data.display())).unwrap();
    ok(&["synth", "--config", path(&cfg)]);
    let text = fs::read_to_string(&data).unwrap();
    assert_eq!(text.matches("\"x\"").count(), 14);

    fs::write(&cfg, "seed = 5\nlearnin_rate = 2\n").unwrap();
    let out = dtcae(&["synth", "--config", path(&cfg)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("learnin_rate"), "{}", stderr(&out));
}

#[test]
fn train_writes_model_curve_and_report_that_eval_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path(), 3);
    let run = dir.path().join("run");
    fs::create_dir(&run).unwrap();
    ok(&["train", "--data", path(&data), "--out", path(&run), "--seed", "2", "--set", "max_iters=15", "--set", "knn_k=3"]);

    let model = load_model(run.join("model.json")).unwrap();
    assert_eq!(model.dims().classes, 3);

    let curve = fs::read_to_string(run.join("curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next().unwrap(), dtcae::trainer::CURVE_HEADER);
    assert_eq!(lines.count(), 16);

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["iterations"], 15);
    assert_eq!(report["split"]["test"], 8);
    assert_eq!(report["split"]["labeled"], 4);

    let eval_out = dir.path().join("eval.json");
    ok(&["eval", "--model", path(&run.join("model.json")), "--data", path(&data), "--seed", "2", "--out", path(&eval_out)]);
    let eval: serde_json::Value = serde_json::from_str(&fs::read_to_string(&eval_out).unwrap()).unwrap();
    assert_eq!(eval["target_test_accuracy"], report["target_test_accuracy"]);
    assert_eq!(eval["domains"], report["domains"]);
}

#[test]
fn zero_step_keeps_objective_constant() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path(), 2);
    ok(&["train", "--data", path(&data), "--out", path(dir.path()), "--set", "tau=0", "--set", "tolerance=0", "--set", "max_iters=5", "--set", "knn_k=3"]);
    let curve = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let totals: Vec<&str> = curve.lines().skip(1).map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(totals.len(), 6);
    assert!(totals.iter().all(|t| *t == totals[0]), "{totals:?}");
}

#[test]
fn eval_rejects_model_with_other_class_count() {
    let dir = tempfile::tempdir().unwrap();
    let data3 = small_data(dir.path(), 3);
    let data2 = small_data(dir.path(), 2);
    ok(&["train", "--data", path(&data3), "--out", path(dir.path()), "--set", "max_iters=1", "--set", "knn_k=3"]);
    let out = dtcae(&["eval", "--model", path(&dir.path().join("model.json")), "--data", path(&data2)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("Y = 3") && stderr(&out).contains("Y = 2"), "{}", stderr(&out));
}

#[test]
fn two_point_fixture_scores_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("two.json");
    fs::write(
        &data,
        r#"{"version": 1, "d": 1, "A": 1, "Y": 2, "domains": [
            {"id": "aux", "target": false, "points": [{"x": [[1.0]], "a": [1], "y": [1, 0]}]},
            {"id": "tgt", "target": true, "points": [
                {"x": [[0.5]], "a": [0], "y": [1, 0], "role": "test"},
                {"x": [[-0.5]], "a": [1], "y": [0, 1], "role": "test"}
            ]}
        ]}"#,
    )
    .unwrap();
    // all scores zero, so every point is assigned the first class
    let dims = Dims { input_dim: 1, attrs: 1, classes: 2, shared_filters: 1, attr_filters: 1, domain_filters: vec![1, 1], width: 1 };
    let model = dir.path().join("zero.json");
    save_model(&ModelParams::zeros(dims).unwrap(), &model).unwrap();
    let out = ok(&["eval", "--model", path(&model), "--data", path(&data)]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["target_test_accuracy"], 0.5);
    assert_eq!(report["domains"][0]["accuracy"], 1.0);
}

#[test]
fn gradcheck_passes_and_is_repeatable() {
    let a = ok(&["gradcheck", "--seed", "4", "--set", "gradcheck_instances=3"]);
    let b = ok(&["gradcheck", "--seed", "4", "--set", "gradcheck_instances=3"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("max relative error"));
}

#[test]
fn impossible_tolerance_fails_gradcheck() {
    let out = dtcae(&["gradcheck", "--set", "gradcheck_instances=1", "--set", "gradcheck_tolerance=0"]);
    assert_eq!(out.status.code(), Some(5), "{}", stderr(&out));
}

#[test]
fn workers_do_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path(), 3);
    let mut files = Vec::new();
    for (name, workers) in [("one", "1"), ("four", "4")] {
        let out = dir.path().join(name);
        fs::create_dir(&out).unwrap();
        ok(&["train", "--data", path(&data), "--out", path(&out), "--workers", workers, "--set", "max_iters=10", "--set", "knn_k=3"]);
        files.push((fs::read(out.join("model.json")).unwrap(), fs::read(out.join("curve.csv")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn standard_run_curve_decreases_from_the_start() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("std.json");
    ok(&["synth", "--seed", "1", "--out", path(&data)]);
    ok(&["train", "--data", path(&data), "--out", path(dir.path()), "--seed", "1"]);
    let curve = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let totals: Vec<f64> = curve.lines().skip(1).take(10).map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert_eq!(totals.len(), 10);
    assert!(totals.windows(2).all(|w| w[1] < w[0]), "{totals:?}");
}
