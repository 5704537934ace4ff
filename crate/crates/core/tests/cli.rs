//! End-to-end runs of the `dialectkit` binary.

use std::path::Path;
use std::process::{Command, Output};

fn dialectkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dialectkit")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = dialectkit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fixtures(dir: &Path) -> std::path::PathBuf {
    let fx = dir.join("fx");
    ok(&["fixtures", "--out", fx.to_str().unwrap(), "--seed", "5"]);
    fx
}

fn metadata(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap()
}

#[test]
fn robustness_on_fixtures_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = fixtures(tmp.path());
    let out = tmp.path().join("report");
    let stdout = ok(&[
        "robustness",
        "--dataset",
        fx.join("micro_adversarial.jsonl").to_str().unwrap(),
        "--dataset-kind",
        "micro",
        "--metric",
        "native:bleu",
        "--metric",
        &format!("file:{}", fx.join("oracle_scores.tsv").display()),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("oracle [en] dialect vs perturb"), "{stdout}");
    for f in ["report.csv", "report.md", "plot_data.csv", "attrition.csv", "metadata.json", "dropped.jsonl", "scores.tsv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert!(!out.join(".staging").exists());
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("metric,language,comparison,estimate,SE,CI_low,CI_high,"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn sentence_robustness_groups_by_language() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = fixtures(tmp.path());
    let out = tmp.path().join("sent");
    ok(&[
        "robustness",
        "--dataset",
        fx.join("sentence.jsonl").to_str().unwrap(),
        "--dataset-kind",
        "sentence",
        "--metric",
        "native:chrf",
        "--reference-dialect",
        "pt-PT",
        "--reference-dialect",
        "zh-CN",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("chrf,pt,")), "{csv}");
    assert!(csv.lines().any(|l| l.starts_with("chrf,zh,")), "{csv}");
    // K counts every comparison row of the metric across languages
    let k: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(12).unwrap()).collect();
    assert!(k.iter().all(|x| *x == k.len().to_string()), "{csv}");
}

#[test]
fn nano_build_is_byte_stable_for_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = fixtures(tmp.path());
    let docs = fx.join("nano_documents.jsonl");
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        ok(&["nano-build", "--dataset", docs.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap()]);
        std::fs::read(out.join("train.jsonl")).unwrap()
    };
    let a = run("a", "11");
    assert!(!a.is_empty());
    assert_eq!(a, run("b", "11"));
    assert_ne!(a, run("c", "12"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 11);
}

#[test]
fn missing_metric_is_a_config_error_before_any_output() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = fixtures(tmp.path());
    let out = tmp.path().join("none");
    let res = dialectkit(&[
        "robustness",
        "--dataset",
        fx.join("micro_adversarial.jsonl").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("at least one --metric"));
    assert!(!out.exists());
}

#[test]
fn failed_run_is_quarantined() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = fixtures(tmp.path());
    let out = tmp.path().join("qe");
    // chrF needs a reference, which plain qe mode never supplies
    let res = dialectkit(&[
        "qe",
        "--dataset",
        fx.join("sentence.jsonl").to_str().unwrap(),
        "--metric",
        "native:chrf",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    let err = std::fs::read_to_string(out.join("quarantine/error.txt")).unwrap();
    assert!(!err.trim().is_empty());
    assert!(!out.join("report.csv").exists());
    assert!(!out.join(".staging").exists());
}

#[test]
fn command_line_beats_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = fixtures(tmp.path());
    let out = tmp.path().join("cfg");
    let config = tmp.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "dataset = {:?}\ndataset-kind = \"micro\"\nmetric = [\"native:chrf\"]\nalpha = 0.2\nseed = 42\n",
            fx.join("micro_adversarial.jsonl").to_str().unwrap()
        ),
    )
    .unwrap();
    ok(&["robustness", "--config", config.to_str().unwrap(), "--alpha", "0.01", "--out", out.to_str().unwrap()]);
    let meta = metadata(&out);
    assert_eq!(meta["alpha"], 0.01);
    assert_eq!(meta["seed"], 42);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    std::fs::write(&config, "alpah = 0.1\n").unwrap();
    let res = dialectkit(&["robustness", "--config", config.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("alpah"));
}
