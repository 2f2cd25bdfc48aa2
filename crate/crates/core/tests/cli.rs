use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_discourse-signal");

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic")
}

/// Copies the synthetic fixture into a scratch directory so tests can edit inputs.
fn scratch() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for name in ["news.jsonl", "annotations.csv", "market.csv", "run.json"] {
        fs::copy(fixture_dir().join(name), dir.path().join(name)).unwrap();
    }
    dir
}

struct Outcome {
    code: i32,
    stderr: String,
}

fn run(dir: &Path, args: &[&str]) -> Outcome {
    let out = Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(dir.join("run.json"))
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    Outcome {
        code: out.status.code().unwrap(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn edit_config(dir: &Path, f: impl FnOnce(&mut serde_json::Value)) {
    let path = dir.join("run.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    f(&mut v);
    fs::write(path, v.to_string()).unwrap();
}

#[test]
fn full_run_succeeds_and_writes_manifest() {
    let dir = scratch();
    let r = run(dir.path(), &["run"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out = dir.path().join("out");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    let files = manifest["files"].as_array().unwrap();
    assert!(files
        .iter()
        .any(|f| f["path"] == "analyze/news/granger_grid.txt"));
    assert!(files.iter().any(|f| f["path"] == "report.txt"));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("Majority vote label distribution"));
    assert!(report.contains("does not Granger Cause"));
}

#[test]
fn stages_run_separately() {
    let dir = scratch();
    for stage in ["aggregate", "train-eval", "classify", "analyze", "report"] {
        let r = run(dir.path(), &[stage]);
        assert_eq!(r.code, 0, "{stage}: {}", r.stderr);
    }
    let labels = fs::read_to_string(dir.path().join("out/aggregate/news/labels.csv")).unwrap();
    assert!(labels.starts_with("doc_id,method,value,mean_score\n"));
    let cmp = fs::read_to_string(dir.path().join("out/train_eval/news/comparison.csv")).unwrap();
    let rows: Vec<&str> = cmp.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("Multinomial NB,"));
    assert!(rows[1].starts_with("Logistic regression,"));
}

#[test]
fn flags_override_config() {
    let dir = scratch();
    let alt = dir.path().join("elsewhere");
    let r = run(
        dir.path(),
        &["aggregate", "--seed", "11", "--out", alt.to_str().unwrap()],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(alt.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 11);
    assert!(!dir.path().join("out").exists());

    let r = run(dir.path(), &["aggregate"]);
    assert_eq!(r.code, 0);
    let base: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap())
            .unwrap();
    assert_ne!(base["config_hash"], m["config_hash"]);
}

#[test]
fn empty_annotations_exit_one() {
    for contents in ["", "doc_id,worker_id,rating\n"] {
        let dir = scratch();
        fs::write(dir.path().join("annotations.csv"), contents).unwrap();
        let r = run(dir.path(), &["aggregate"]);
        assert_eq!(r.code, 1, "{}", r.stderr);
        assert!(r.stderr.contains("no annotations"), "{}", r.stderr);
    }
}

#[test]
fn unresolved_ids_are_listed() {
    let dir = scratch();
    let path = dir.path().join("annotations.csv");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("ghost-1,W001,1\nghost-2,W002,-1\n");
    fs::write(&path, text).unwrap();
    let r = run(dir.path(), &["aggregate"]);
    assert_eq!(r.code, 1);
    assert!(
        r.stderr.contains("ghost-1") && r.stderr.contains("ghost-2"),
        "{}",
        r.stderr
    );
}

#[test]
fn single_class_training_exit_one() {
    let dir = scratch();
    let path = dir.path().join("annotations.csv");
    let text: String = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                format!("{l}\n")
            } else {
                let (head, _) = l.rsplit_once(',').unwrap();
                format!("{head},1\n")
            }
        })
        .collect();
    fs::write(&path, text).unwrap();
    assert_eq!(run(dir.path(), &["aggregate"]).code, 0);
    let r = run(dir.path(), &["train-eval"]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stderr.contains("negative"), "{}", r.stderr);
}

#[test]
fn half_year_market_names_both_ranges() {
    let dir = scratch();
    let path = dir.path().join("market.csv");
    let text: String = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .take(1 + 182)
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&path, text).unwrap();
    let r = run(dir.path(), &["run"]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stderr.contains("2015-07-01"), "{}", r.stderr);
    assert!(r.stderr.contains("2015-12-31"), "{}", r.stderr);
}

#[test]
fn market_gaps_need_opt_in() {
    let dir = scratch();
    let path = dir.path().join("market.csv");
    let text: String = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .enumerate()
        .filter(|(i, _)| *i != 100)
        .map(|(_, l)| format!("{l}\n"))
        .collect();
    fs::write(&path, text).unwrap();
    assert_eq!(run(dir.path(), &["aggregate"]).code, 0);
    assert_eq!(run(dir.path(), &["train-eval"]).code, 0);
    let r = run(dir.path(), &["analyze"]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    let r = run(dir.path(), &["analyze", "--allow-gaps"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn missing_prior_stage_is_runtime_error() {
    let dir = scratch();
    let r = run(dir.path(), &["classify"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("train-eval"), "{}", r.stderr);
}

#[test]
fn invalid_configs_exit_one() {
    let dir = scratch();
    edit_config(dir.path(), |v| v["lags"] = serde_json::json!([1, 6]));
    assert_eq!(run(dir.path(), &["aggregate"]).code, 1);

    let dir = scratch();
    edit_config(dir.path(), |v| v["cv"]["folds"] = serde_json::json!(1));
    assert_eq!(run(dir.path(), &["aggregate"]).code, 1);

    let dir = scratch();
    edit_config(dir.path(), |v| {
        v["market"] = serde_json::json!("absent.csv")
    });
    let r = run(dir.path(), &["aggregate"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("absent.csv"), "{}", r.stderr);

    let dir = scratch();
    fs::write(dir.path().join("run.json"), "{ not json").unwrap();
    assert_eq!(run(dir.path(), &["aggregate"]).code, 1);

    let dir = scratch();
    fs::remove_file(dir.path().join("run.json")).unwrap();
    assert_eq!(run(dir.path(), &["aggregate"]).code, 1);
}

#[test]
fn usage_errors_exit_one() {
    let out = Command::new(BIN)
        .args(["aggregate", "--bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
