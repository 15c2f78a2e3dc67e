//! Black-box checks of the binary: exit codes, the error JSON on standard
//! error, and the seed/out flag overrides.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use textimpact::pipeline::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_textimpact"))
}

fn assets() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/assets"))
}

fn stderr_json(output: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&output.stderr);
    assert_eq!(text.lines().count(), 1, "expected one JSON line: {text}");
    serde_json::from_str(text.trim()).expect("stderr is JSON")
}

/// Synthesize a corpus through the binary and return the manifest path.
fn synth_corpus(dir: &Path, docs: &str, seed: &str) -> PathBuf {
    let corpus = dir.join("corpus");
    let output = bin()
        .args(["synth", "--docs", docs, "--seed", seed, "--out"])
        .arg(&corpus)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    corpus.join("manifest.csv")
}

fn write_demo_config(dir: &Path, manifest: &Path) -> PathBuf {
    let cfg = RunConfig::demo(manifest, &assets(), &dir.join("out"));
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn synth_writes_the_requested_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let output = bin()
        .args(["synth", "--docs", "8,6", "--seed", "3", "--out"])
        .arg(&corpus)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");

    let texts = fs::read_dir(&corpus)
        .unwrap()
        .filter(|e| {
            e.as_ref().unwrap().path().extension().map(|x| x == "txt") == Some(true)
        })
        .count();
    assert_eq!(texts, 14);
    let manifest = fs::read_to_string(corpus.join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 15);
    assert_eq!(manifest.lines().next(), Some("path,label"));

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(corpus.join("synth.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["spec"]["docs_high"], 8);
    assert!(meta["spec_hash"].as_str().unwrap().len() == 64);

    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("manifest.csv"), "{stdout}");
}

#[test]
fn empty_class_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["synth", "--docs", "0,5", "--out"])
        .arg(dir.path().join("corpus"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = stderr_json(&output);
    assert_eq!(err["error"]["kind"], "ConfigInvalid");
    assert_eq!(err["error"]["stage"], "synth");
}

#[test]
fn pipeline_runs_and_flags_override_seed_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), "16,16", "7");
    let config = write_demo_config(dir.path(), &manifest);

    let output = bin()
        .args(["pipeline", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let report = dir.path().join("out/report.json");
    assert!(report.is_file());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("report.json"), "{stdout}");

    let out2 = dir.path().join("out2");
    let output = bin()
        .args(["pipeline", "--config"])
        .arg(&config)
        .args(["--seed", "11", "--out"])
        .arg(&out2)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let selection: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out2.join("selection.json")).unwrap()).unwrap();
    assert_eq!(selection["stamp"]["seeds"]["train"], 11);
    assert_eq!(selection["stamp"]["seeds"]["lsa"], 11);
}

#[test]
fn stage_order_is_enforced_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), "4,4", "7");
    let config = write_demo_config(dir.path(), &manifest);

    let output = bin().args(["select", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
    let err = stderr_json(&output);
    assert_eq!(err["error"]["code"], 3);
    assert_eq!(err["error"]["kind"], "MissingArtifact");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("features.csv"));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, "{ definitely not json").unwrap();
    let output = bin().args(["prepare", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert_eq!(stderr_json(&output)["error"]["kind"], "ConfigInvalid");
}

#[test]
fn usage_errors_are_json_but_help_is_not_an_error() {
    let output = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert_eq!(stderr_json(&output)["error"]["stage"], "cli");

    let output = bin().args(["--help"]).output().unwrap();
    assert!(output.status.success());
    let help = String::from_utf8_lossy(&output.stdout);
    for sub in [
        "prepare", "extract", "select", "train", "evaluate", "report", "pipeline", "synth",
    ] {
        assert!(help.contains(sub), "help lacks {sub}");
    }
}
