use std::fs;
use std::path::Path;

use revlab_core::experiment::{
    run_experiment, verify_manifest, write_outputs, ExperimentConfig, ExperimentError, RunManifest,
    Workspace,
};
use revlab_core::synth::{generate, homogenize, SynthConfig};

const CONFIG: &str = r#"
master_seed = 11
ranking_ks = [5, 10]
business_ks = [5]

[model]
latent_dim = 8
embedding_dim = 32
learn_layer_sizes = [16, 8]
reduction = 0.5
learning_rate = 0.002
batch_size = 64
epochs = 3

[[corpora]]
label = "human"
path = "human.jsonl"
store = "human.revemb"

[[corpora]]
label = "generated"
path = "generated.jsonl"
store = "generated.revemb"

[[scenarios]]
name = "NCF"
variant = "ids_only"

[[scenarios]]
name = "NCF-Human"
variant = "with_reviews"
train_history = "human"
test_history = "human"

[[scenarios]]
name = "NCF-Generated"
variant = "with_reviews"
train_history = "generated"
test_history = "generated"

[[comparisons]]
baseline = "NCF"
treatment = "NCF-Human"

[[comparisons]]
baseline = "NCF"
treatment = "NCF-Generated"

[cross_matrix]
sources = ["human", "generated"]
"#;

fn write_inputs(dir: &Path) {
    let d = generate(&SynthConfig {
        users: 120,
        ..SynthConfig::default()
    });
    d.corpus.write_jsonl(&dir.join("human.jsonl")).unwrap();
    d.corpus.write_jsonl(&dir.join("generated.jsonl")).unwrap();
    d.store.write(&dir.join("human.revemb")).unwrap();
    homogenize(&d.store, 0.3)
        .write(&dir.join("generated.revemb"))
        .unwrap();
}

fn run(dir: &Path, cfg: &ExperimentConfig) {
    let ws = Workspace::load(cfg, dir).unwrap();
    let out = run_experiment(cfg, &ws).unwrap();
    write_outputs(&out, &dir.join("runs")).unwrap();
}

fn manifest(dir: &Path, scenario: &str) -> RunManifest {
    RunManifest::load(
        &dir.join("runs/scenarios")
            .join(scenario)
            .join("manifest.json"),
    )
    .unwrap()
}

#[test]
fn outputs_and_manifests_verify() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_inputs(root);
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    run(root, &cfg);

    for f in [
        "split.json",
        "results.txt",
        "results.csv",
        "significance.json",
        "cross_matrix.json",
        "timing.json",
        "cross/cross_human_to_generated/manifest.json",
    ] {
        assert!(root.join("runs").join(f).is_file(), "{f} missing");
    }
    let table = fs::read_to_string(root.join("runs/results.txt")).unwrap();
    assert!(table.contains("NCF-Generated vs NCF, rmse"));

    let m = manifest(root, "NCF-Human");
    assert_eq!(m.master_seed, 11);
    assert_ne!(m.model_seed, 11);
    assert!(
        !fs::read_to_string(root.join("runs/scenarios/NCF-Human/manifest.json"))
            .unwrap()
            .contains("elapsed")
    );
    let v = verify_manifest(&m, &cfg, root, true).unwrap();
    assert!(v.passed(), "{:?}", v.divergences);

    // Every cell of the cross matrix carries the shared split.
    let cross =
        RunManifest::load(&root.join("runs/cross/cross_generated_to_human/manifest.json")).unwrap();
    assert_eq!(cross.split_digest, m.split_digest);
    assert!(verify_manifest(&cross, &cfg, root, true).unwrap().passed());
}

#[test]
fn verification_names_the_first_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_inputs(root);
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    run(root, &cfg);
    let m = manifest(root, "NCF-Generated");

    let mut reseeded = cfg.clone();
    reseeded.master_seed = 12;
    let v = verify_manifest(&m, &reseeded, root, false).unwrap();
    assert_eq!(v.first().unwrap().what, "config");

    // One rating changed on one line of the generated corpus.
    let path = root.join("generated.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let first = text.lines().next().unwrap();
    let rating = first
        .split("\"overall_rating\":")
        .nth(1)
        .unwrap()
        .chars()
        .next()
        .unwrap();
    let other = if rating == '1' { '2' } else { '1' };
    let edited = first.replacen(
        &format!("\"overall_rating\":{rating}"),
        &format!("\"overall_rating\":{other}"),
        1,
    );
    fs::write(&path, text.replacen(first, &edited, 1)).unwrap();
    let v = verify_manifest(&m, &cfg, root, true).unwrap();
    assert!(!v.passed());
    assert_eq!(v.first().unwrap().what, "corpus `generated`");
}

#[test]
fn misaligned_corpora_are_rejected_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_inputs(root);
    let text = fs::read_to_string(root.join("generated.jsonl")).unwrap();
    let dropped: Vec<&str> = text.lines().skip(1).collect();
    fs::write(root.join("generated.jsonl"), dropped.join("\n") + "\n").unwrap();
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    let err = Workspace::load(&cfg, root).expect_err("alignment fails");
    assert_eq!(err.exit_code(), 2);
    assert!(!matches!(err, ExperimentError::DigestMismatch { .. }));
}
