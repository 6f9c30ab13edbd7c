use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn revlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("REVLAB_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// A small synthetic workspace with a quick training schedule.
fn workspace(dir: &Path) {
    ok(&revlab(dir, &["synth", "-o", "data", "--users", "120"]));
    let cfg = fs::read_to_string(dir.join("data/experiment.toml")).unwrap();
    let quick = cfg.replace("epochs = 50", "epochs = 2");
    assert_ne!(cfg, quick);
    fs::write(dir.join("data/experiment.toml"), quick).unwrap();
}

#[test]
fn run_then_verify_then_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d);
    let table = ok(&revlab(d, &["run", "-c", "data/experiment.toml"]));
    assert!(table.contains("NCF-Full"));
    assert!(table.contains("trained with full"));
    assert!(d.join("data/runs/scenarios/NCF/report.json").is_file());

    let verified = ok(&revlab(d, &["verify", "-c", "data/experiment.toml"]));
    assert_eq!(
        verified.lines().filter(|l| l.starts_with("PASS")).count(),
        7
    );

    let store = d.join("data/synth_full.revemb");
    let mut bytes = fs::read(&store).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    fs::write(&store, bytes).unwrap();
    let out = revlab(d, &["verify", "-c", "data/experiment.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("store `full` differs"));
}

#[test]
fn seed_override_and_bad_input_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d);
    let split = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_revlab"));
        cmd.args(["split", "-c", "data/experiment.toml"])
            .current_dir(d)
            .env_remove("REVLAB_SEED");
        if let Some(s) = seed {
            cmd.env("REVLAB_SEED", s);
        }
        cmd.output().unwrap()
    };
    let base = ok(&split(None));
    assert!(base.contains("\"master_seed\": 42"));
    let other = ok(&split(Some("9")));
    assert!(other.contains("\"master_seed\": 9"));
    assert_eq!(split(Some("nine")).status.code(), Some(2));

    assert_eq!(
        revlab(d, &["ingest", "missing.jsonl"]).status.code(),
        Some(2)
    );
    fs::write(d.join("bad.jsonl"), "{\"review_id\": 1}\n").unwrap();
    let out = revlab(d, &["ingest", "bad.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn corpus_tools() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d);
    let stats: serde_json::Value =
        serde_json::from_str(&ok(&revlab(d, &["ingest", "data/synth.jsonl"]))).unwrap();
    assert_eq!(stats["records"], 1200);
    assert_eq!(stats["users"], 120);

    let kept = ok(&revlab(
        d,
        &[
            "filter",
            "data/synth.jsonl",
            "-o",
            "kept.jsonl",
            "--min",
            "7",
        ],
    ));
    assert!(
        kept.starts_with("kept ") && kept.trim_end().ends_with("of 1200 reviews"),
        "{kept}"
    );
    let n: usize = kept.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(n < 1200);
    assert_eq!(
        fs::read_to_string(d.join("kept.jsonl"))
            .unwrap()
            .lines()
            .count(),
        n
    );

    ok(&revlab(
        d,
        &[
            "stub-embed",
            "data/synth.jsonl",
            "-o",
            "stub.revemb",
            "--dim",
            "16",
        ],
    ));
    assert_eq!(&fs::read(d.join("stub.revemb")).unwrap()[..8], b"REVEMB01");

    ok(&revlab(
        d,
        &[
            "textstats",
            "--base",
            "data/synth.jsonl",
            "--base-store",
            "data/synth_full.revemb",
            "--other",
            "data/synth.jsonl",
            "--other-store",
            "data/synth_homogenized.revemb",
            "--sample",
            "200",
            "-o",
            "stats",
        ],
    ));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("stats/report.json")).unwrap()).unwrap();
    let sim = &report["internal_similarity"];
    assert!(sim["other"]["mean"].as_f64().unwrap() > sim["base"]["mean"].as_f64().unwrap());
}

#[test]
fn train_evaluate_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d);
    let c = "data/experiment.toml";
    ok(&revlab(
        d,
        &["train", "-c", c, "--scenario", "NCF", "-o", "ids.json"],
    ));
    ok(&revlab(
        d,
        &[
            "train",
            "-c",
            c,
            "--scenario",
            "NCF-Full",
            "-o",
            "full.json",
        ],
    ));
    ok(&revlab(
        d,
        &[
            "evaluate",
            "-c",
            c,
            "--model",
            "ids.json",
            "-o",
            "ids_report.json",
        ],
    ));
    ok(&revlab(
        d,
        &[
            "evaluate",
            "-c",
            c,
            "--model",
            "full.json",
            "--test-history",
            "homogenized",
            "-o",
            "full_report.json",
        ],
    ));
    let missing = revlab(d, &["evaluate", "-c", c, "--model", "full.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let table = ok(&revlab(
        d,
        &[
            "render",
            "--report",
            "NCF=ids_report.json",
            "--report",
            "NCF-Full=full_report.json",
            "--compare",
            "NCF:NCF-Full",
        ],
    ));
    assert!(table.starts_with("model"));
    assert!(table.contains("NCF-Full vs NCF, rmse"));

    let out = revlab(d, &["train", "-c", c, "--scenario", "nope", "-o", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_ranks_by_validation_rmse() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    workspace(d);
    let path = d.join("data/experiment.toml");
    let mut cfg = fs::read_to_string(&path).unwrap();
    cfg.push_str("\n[sweep]\nlatent_dims = [4, 8]\nlearning_rates = [0.001]\nbatch_sizes = [128]\nreductions = [0.5]\n");
    fs::write(&path, cfg).unwrap();
    let csv = ok(&revlab(
        d,
        &["sweep", "-c", "data/experiment.toml", "--scenario", "NCF"],
    ));
    let rows: Vec<f64> = csv
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0] <= rows[1]);
}
