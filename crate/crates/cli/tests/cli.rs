use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn toy() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/toy")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_essayplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_is_byte_identical_and_extractive() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy().join("config.ini");
    let mut runs = Vec::new();
    for i in 0..2 {
        let essay = dir.path().join(format!("essay{i}.txt"));
        let trace = dir.path().join(format!("trace{i}.json"));
        ok(&[
            "generate",
            "--config",
            config.to_str().unwrap(),
            "youth",
            "--output",
            essay.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ]);
        runs.push((fs::read(&essay).unwrap(), fs::read(&trace).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);

    let corpus = fs::read_to_string(toy().join("corpus.jsonl")).unwrap();
    let mut raws = HashSet::new();
    for line in corpus.lines() {
        let doc: serde_json::Value = serde_json::from_str(line).unwrap();
        for s in doc["sentences"].as_array().unwrap() {
            raws.insert(s["raw"].as_str().unwrap().to_owned());
        }
    }
    let trace: serde_json::Value = serde_json::from_slice(&runs[0].1).unwrap();
    assert_eq!(trace["topic"], "youth");
    let text = String::from_utf8(runs[0].0.clone()).unwrap();
    let mut seen = HashSet::new();
    for paragraph in text.split("\n\n") {
        assert!(!paragraph.trim().is_empty());
        for sentence in raws.iter().filter(|r| paragraph.contains(r.as_str())) {
            assert!(seen.insert(sentence.clone()), "{sentence:?} appears twice");
        }
    }
    assert!(!seen.is_empty());
}

#[test]
fn stdout_essay_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy().join("config.ini");
    let file = dir.path().join("essay.txt");
    let printed = ok(&["generate", "--config", config.to_str().unwrap(), "nature"]);
    ok(&["generate", "--config", config.to_str().unwrap(), "nature", "--output", file.to_str().unwrap()]);
    assert_eq!(printed, fs::read_to_string(file).unwrap());
}

#[test]
fn unknown_topic_names_backend() {
    let config = toy().join("config.ini");
    let out = run(&["expand", "--config", config.to_str().unwrap(), "zebra"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("thes expansion failed"), "{err}");
}

#[test]
fn expand_and_cluster_print_results() {
    let config = toy().join("config.ini");
    let c = config.to_str().unwrap();
    let words = ok(&["expand", "--config", c, "friendship", "--k", "3"]);
    assert_eq!(words.lines().count(), 3);
    assert!(words.lines().all(|l| l.split('\t').count() == 2 && !l.starts_with("friendship\t")));
    let clusters: serde_json::Value = serde_json::from_str(&ok(&["cluster", "--config", c, "friendship"])).unwrap();
    assert!(!clusters["arguments"].as_array().unwrap().is_empty());
}

#[test]
fn select_ranks_by_score() {
    let config = toy().join("config.ini");
    let out = ok(&["select", "--config", config.to_str().unwrap(), "river", "forest"]);
    let scores: Vec<f64> = out.lines().map(|l| l.split('\t').next().unwrap().parse().unwrap()).collect();
    assert!(!scores.is_empty());
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(scores[0], 2.0);
}

#[test]
fn ingest_reports_counts() {
    let out = ok(&["ingest", toy().join("corpus.jsonl").to_str().unwrap()]);
    assert!(out.starts_with("documents\t42\n"), "{out}");
}

#[test]
fn eval_ordering_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    ok(&[
        "eval-ordering",
        "--corpus",
        toy().join("corpus.jsonl").to_str().unwrap(),
        "--holdout-fraction",
        "0.25",
        "--variant",
        "bow_boolean",
        "--decoder",
        "greedy",
        "--output",
        report.to_str().unwrap(),
    ]);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["decoder"], "greedy");
    assert_eq!(r["model"], "bow_boolean");
    let acc = r["mean_accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert_eq!(r["documents"].as_array().unwrap().len() + r["skipped"].as_u64().unwrap() as usize, 11);
}

#[test]
fn training_commands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy().join("corpus.jsonl");
    let c = corpus.to_str().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let emb = dir.path().join(format!("emb{i}.txt"));
        let lda = dir.path().join(format!("lda{i}.txt"));
        let rec = dir.path().join(format!("rec{i}.txt"));
        ok(&["train-embeddings", "--corpus", c, "--output", emb.to_str().unwrap(), "--dim", "8", "--epochs", "2", "--min-count", "2"]);
        ok(&["train-lda", "--corpus", c, "--output", lda.to_str().unwrap(), "--topics", "3", "--iterations", "20"]);
        ok(&[
            "train-coherence",
            "--corpus",
            c,
            "--embeddings",
            emb.to_str().unwrap(),
            "--output",
            rec.to_str().unwrap(),
            "--epochs",
            "2",
            "--hidden",
            "4",
        ]);
        outputs.push([fs::read(emb).unwrap(), fs::read(lda).unwrap(), fs::read(rec).unwrap()]);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.ini");
    fs::write(&config, "[paths]\ncorpus = x.jsonl\nembeddings = e.txt\nnope = 1\n").unwrap();
    let out = run(&["expand", "--config", config.to_str().unwrap(), "a"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key paths.nope"));
}
