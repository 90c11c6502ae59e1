use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn eventstory(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_eventstory"));
    cmd.args(args).env("RUST_LOG", "error");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
        .display()
        .to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path, command: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(format!("manifest.{command}.json"))).expect("manifest");
    serde_json::from_str(&text).unwrap()
}

fn preprocess(out: &Path, extra: &[&str]) -> Output {
    let roc = fixture("roc");
    let out = out.display().to_string();
    let mut args = vec!["preprocess", "--dataset", "roc", "--in", roc.as_str(), "--out", out.as_str()];
    args.extend_from_slice(extra);
    eventstory(&args, &[])
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = eventstory(&["summon"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("usage"));
}

#[test]
fn missing_references_exit_one_and_name_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let generated = tmp.path().join("generated.jsonl");
    std::fs::write(&generated, "").unwrap();
    let missing = tmp.path().join("nowhere/references.jsonl");
    let o = eventstory(
        &[
            "evaluate",
            "--generated",
            &generated.display().to_string(),
            "--references",
            &missing.display().to_string(),
            "--out",
            &tmp.path().join("report.json").display().to_string(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&missing.display().to_string()), "{}", stderr(&o));
}

#[test]
fn preprocess_writes_splits_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("data");
    let o = preprocess(&out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for split in ["train", "dev", "test"] {
        assert!(out.join(format!("roc.{split}.jsonl")).exists());
    }
    let m = manifest(&out, "preprocess");
    assert_eq!(m["command"], "preprocess");
    assert_eq!(m["seed"], 42);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 4);
    assert!(m["inputs"].as_array().unwrap().iter().all(|d| d["sha256"].as_str().unwrap().len() == 64));
    assert!(m["versions"]["core"].is_string());
}

#[test]
fn reruns_overwrite_outputs_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("data");
    let digests = || {
        assert!(preprocess(&out, &[]).status.success());
        manifest(&out, "preprocess")["outputs"].clone()
    };
    let first = digests();
    let second = digests();
    assert_eq!(first, second);
}

#[test]
fn configuration_layers_reach_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("c.toml");
    std::fs::write(&config, "[train]\nlambda = 0.5\nbatch_size = 8\n").unwrap();
    let out = tmp.path().join("data");
    let roc = fixture("roc");
    let o = eventstory(
        &[
            "preprocess",
            "--dataset",
            "roc",
            "--in",
            &roc,
            "--out",
            &out.display().to_string(),
            "--config",
            &config.display().to_string(),
            "--set",
            "train.lambda=0.25",
            "--seed",
            "7",
        ],
        &[("EVENTSTORY__TRAIN__BATCH_SIZE", "16"), ("EVENTSTORY__TRAIN__LAMBDA", "0.4")],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out, "preprocess");
    // file < environment < flags
    assert_eq!(m["config"]["train"]["lambda"], 0.25);
    assert_eq!(m["config"]["train"]["batch_size"], 16);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["generation"]["seed"], 7);
}

#[test]
fn bad_configuration_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("data");
    let o = preprocess(&out, &["--set", "train.lamda=0.1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = preprocess(&out, &["--set", "generation.nucleus_p=1.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_out_flag_is_a_configuration_error() {
    let o = eventstory(&["preprocess", "--dataset", "roc", "--in", &fixture("roc")], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--out"));
}

#[test]
fn event_extraction_and_graph_agree_on_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert!(preprocess(&data, &[]).status.success());
    let events = tmp.path().join("events");
    let o = eventstory(
        &[
            "extract-events",
            "--in",
            &data.join("roc.train.jsonl").display().to_string(),
            "--out",
            &events.display().to_string(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let ev_file = events.join("roc.train.events.jsonl");
    let text = std::fs::read_to_string(&ev_file).unwrap();
    let pairs: usize = text
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            v["events"].as_array().unwrap().len() - 1
        })
        .sum();
    let graph = tmp.path().join("graph.json");
    let o = eventstory(
        &["build-graph", "--in", &ev_file.display().to_string(), "--out", &graph.display().to_string()],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&graph).unwrap()).unwrap();
    assert_eq!(g["total"].as_u64().unwrap() as usize, pairs);
    assert!(tmp.path().join("manifest.build-graph.json").exists());
}
