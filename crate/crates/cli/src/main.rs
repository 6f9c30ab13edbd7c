use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use revlab_core::corpus::{corpus_stats, filter_min_interactions, load_corpus, FilterMode};
use revlab_core::embeddings::{open_store, stub_store};
use revlab_core::experiment::{
    evaluate_model, prepare, render_results_table, run_cross_matrix, run_experiment, run_scenario,
    run_sweep, verify_manifest, write_outputs, Comparison, EvalOptions, ExperimentConfig,
    ExperimentError, RunManifest, ScenarioSpec, Workspace,
};
use revlab_core::metrics::MetricsReport;
use revlab_core::model::{load_checkpoint, save_checkpoint};
use revlab_core::synth::{generate, homogenize, SynthConfig};
use revlab_core::textstats::{
    corpus_comparison_report, load_emotion_labels, load_sentiment_labels, load_stopwords,
    sample_reviews, write_csv_series, CorpusSide, Lexicon, TextstatsConfig,
};

/// Reproduction failures exit with this code; every other error with 2.
const EXIT_REPRODUCIBILITY: u8 = 3;
const EXIT_VALIDATION: u8 = 2;

#[derive(Parser)]
#[command(
    name = "revlab",
    version,
    about = "Review-augmented recommender experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config (TOML). Relative paths inside it resolve against
    /// its directory. REVLAB_SEED overrides master_seed.
    #[arg(long, short)]
    config: PathBuf,
}

// Parsed once per process, so the size of the textstats variant is harmless.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand)]
enum Command {
    /// Validate a JSONL corpus and print its summary statistics.
    Ingest {
        input: PathBuf,
        #[arg(long, default_value = "corpus")]
        label: String,
    },
    /// Keep reviews whose user and item both reach a minimum count.
    Filter {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 5)]
        min: usize,
        #[arg(long, value_enum, default_value_t = Mode::Fixpoint)]
        mode: Mode,
    },
    /// Write deterministic hash-seeded vectors for every review text.
    StubEmbed {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 384)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the shared split and write it as JSON.
    Split {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Train one scenario and save its checkpoint.
    Train {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        scenario: String,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Evaluate a checkpoint on the shared split with a history source.
    Evaluate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        model: PathBuf,
        /// Corpus whose embeddings supply test histories (review models only).
        #[arg(long)]
        test_history: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare the text of two aligned corpora on one sample.
    Textstats(TextstatsArgs),
    /// Train-with / test-with grid over the configured sources.
    CrossMatrix {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Render saved metric reports as a table with significance stars.
    Render {
        /// NAME=PATH of a report.json; rows keep this order.
        #[arg(long = "report", required = true)]
        reports: Vec<String>,
        /// BASELINE:TREATMENT pairs to test.
        #[arg(long = "compare")]
        comparisons: Vec<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Recompute manifest digests; with --rerun also retrain and compare.
    Verify {
        #[command(flatten)]
        config: ConfigArg,
        /// Manifests to check; defaults to every manifest in the output dir.
        #[arg(long = "manifest")]
        manifests: Vec<PathBuf>,
        #[arg(long)]
        rerun: bool,
    },
    /// Grid search on the validation split for one scenario.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        scenario: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run every scenario, comparison and cross cell in the config.
    Run {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Write the planted-signal corpus, its stores and a sample config.
    Synth {
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        users: usize,
        /// Share of each vector's deviation kept in the homogenized store.
        #[arg(long, default_value_t = 0.3)]
        retain: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fixpoint,
    SinglePass,
}

#[derive(Args)]
struct TextstatsArgs {
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    base_store: PathBuf,
    #[arg(long)]
    other: PathBuf,
    #[arg(long)]
    other_store: PathBuf,
    #[arg(long, default_value = "human")]
    base_label: String,
    #[arg(long, default_value = "generated")]
    other_label: String,
    #[arg(long, default_value_t = 1000)]
    sample: usize,
    #[arg(long, default_value_t = 42, env = "REVLAB_SEED")]
    seed: u64,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long)]
    base_sentiment: Option<PathBuf>,
    #[arg(long)]
    other_sentiment: Option<PathBuf>,
    #[arg(long)]
    base_emotions: Option<PathBuf>,
    #[arg(long)]
    other_emotions: Option<PathBuf>,
    /// Directory for report.json and the CSV series.
    #[arg(long, short)]
    output: PathBuf,
}

struct Loaded {
    cfg: ExperimentConfig,
    root: PathBuf,
}

fn load_config(arg: &ConfigArg) -> Result<Loaded> {
    let mut cfg = ExperimentConfig::load(&arg.config)?;
    if cfg.apply_seed_env()? {
        info!("master seed overridden to {}", cfg.master_seed);
    }
    let root = arg
        .config
        .parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(Loaded { cfg, root })
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(output: &Option<PathBuf>, contents: &str) -> Result<()> {
    match output {
        Some(p) => write_file(p, contents),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn find_scenario(cfg: &ExperimentConfig, split: &str, name: &str) -> Result<ScenarioSpec> {
    ScenarioSpec::from_config(cfg, split)
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            anyhow!(ExperimentError::Config(format!(
                "no scenario named `{name}`"
            )))
        })
}

fn manifests_under(dir: &Path) -> Vec<PathBuf> {
    let mut found = Vec::new();
    for sub in ["scenarios", "cross"] {
        let Ok(entries) = fs::read_dir(dir.join(sub)) else {
            continue;
        };
        for e in entries.flatten() {
            let m = e.path().join("manifest.json");
            if m.is_file() {
                found.push(m);
            }
        }
    }
    found.sort();
    found
}

const SAMPLE_CONFIG: &str = r#"master_seed = 42
ranking_ks = [3, 5, 10, 20]
business_ks = [10]
output_dir = "runs"

[model]
latent_dim = 20
history_len = 3
embedding_dim = 32
learn_layer_sizes = [40, 20]
reduction = 0.5
learning_rate = 0.001
batch_size = 128
epochs = 50

[[corpora]]
label = "full"
path = "synth.jsonl"
store = "synth_full.revemb"

[[corpora]]
label = "homogenized"
path = "synth.jsonl"
store = "synth_homogenized.revemb"

[[scenarios]]
name = "NCF"
variant = "ids_only"

[[scenarios]]
name = "NCF-Full"
variant = "with_reviews"
train_history = "full"
test_history = "full"

[[scenarios]]
name = "NCF-Homogenized"
variant = "with_reviews"
train_history = "homogenized"
test_history = "homogenized"

[[comparisons]]
baseline = "NCF"
treatment = "NCF-Full"

[[comparisons]]
baseline = "NCF"
treatment = "NCF-Homogenized"

[cross_matrix]
sources = ["full", "homogenized"]
"#;

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ingest { input, label } => {
            let c = load_corpus(&input, &label)?;
            let stats = corpus_stats(&c)?;
            println!(
                "{}",
                serde_json::json!({
                    "label": label,
                    "records": stats.records,
                    "users": c.user_ids().len(),
                    "items": c.item_ids().len(),
                    "avg_word_count": stats.avg_word_count,
                    "avg_char_count": stats.avg_char_count,
                    "vocab_size": stats.vocab_size,
                })
            );
        }
        Command::Filter {
            input,
            output,
            min,
            mode,
        } => {
            let c = load_corpus(&input, "input")?;
            let mode = match mode {
                Mode::Fixpoint => FilterMode::Fixpoint,
                Mode::SinglePass => FilterMode::SinglePass,
            };
            let kept = filter_min_interactions(&c, min, mode);
            kept.write_jsonl(&output)?;
            println!("kept {} of {} reviews", kept.len(), c.len());
        }
        Command::StubEmbed {
            input,
            output,
            dim,
            seed,
        } => {
            let c = load_corpus(&input, "input")?;
            let store = stub_store(&c, seed, dim)?;
            store.write(&output)?;
            println!(
                "{} vectors of dim {dim}, sha256 {}",
                store.len(),
                store.digest()
            );
        }
        Command::Split { config, output } => {
            let l = load_config(&config)?;
            let ws = Workspace::load(&l.cfg, &l.root)?;
            let prepared = prepare(&ws, &l.cfg)?;
            emit(&output, &prepared.plan.to_json())?;
            eprintln!("split digest {}", prepared.split_digest);
        }
        Command::Train {
            config,
            scenario,
            output,
        } => {
            let l = load_config(&config)?;
            let ws = Workspace::load(&l.cfg, &l.root)?;
            let prepared = prepare(&ws, &l.cfg)?;
            let spec = find_scenario(&l.cfg, &prepared.split_digest, &scenario)?;
            let out = run_scenario(&ws, &prepared, &spec, &EvalOptions::from_config(&l.cfg))?;
            save_checkpoint(&out.model, &output)?;
            println!("{}", out.report.to_json());
        }
        Command::Evaluate {
            config,
            model,
            test_history,
            output,
        } => {
            let l = load_config(&config)?;
            let ws = Workspace::load(&l.cfg, &l.root)?;
            let prepared = prepare(&ws, &l.cfg)?;
            let model = load_checkpoint(&model)?;
            let store = test_history.as_deref().map(|s| ws.store(s)).transpose()?;
            let report = evaluate_model(
                &model,
                store,
                &prepared.instances,
                &prepared.catalog,
                &prepared.split_digest,
                &EvalOptions::from_config(&l.cfg),
            )?;
            emit(&output, &report.to_json())?;
        }
        Command::Textstats(a) => textstats(a)?,
        Command::CrossMatrix { config, output } => {
            let l = load_config(&config)?;
            let sources = l
                .cfg
                .cross_matrix
                .as_ref()
                .map(|x| x.sources.clone())
                .ok_or_else(|| {
                    anyhow!(ExperimentError::Config(
                        "config has no [cross_matrix]".into()
                    ))
                })?;
            let ws = Workspace::load(&l.cfg, &l.root)?;
            let prepared = prepare(&ws, &l.cfg)?;
            let grid = run_cross_matrix(
                &ws,
                &prepared,
                &l.cfg,
                &sources,
                &EvalOptions::from_config(&l.cfg),
            )?;
            for c in &grid.cells {
                eprintln!(
                    "{} -> {}: rmse {:.4}",
                    c.train_source,
                    c.test_source,
                    c.report.value("rmse")?
                );
            }
            emit(&output, &serde_json::to_string_pretty(&grid)?)?;
        }
        Command::Render {
            reports,
            comparisons,
            output,
        } => {
            let mut loaded = Vec::new();
            for r in &reports {
                let (name, path) = r
                    .split_once('=')
                    .ok_or_else(|| anyhow!("--report wants NAME=PATH, got `{r}`"))?;
                let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
                let report: MetricsReport =
                    serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
                loaded.push((name.to_string(), report));
            }
            let pairs = comparisons
                .iter()
                .map(|c| {
                    let (b, t) = c
                        .split_once(':')
                        .ok_or_else(|| anyhow!("--compare wants BASELINE:TREATMENT, got `{c}`"))?;
                    Ok(Comparison {
                        baseline: b.into(),
                        treatment: t.into(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let table = render_results_table(&loaded, &pairs)?;
            match output {
                Some(dir) => {
                    write_file(&dir.join("results.txt"), &table.text)?;
                    write_file(&dir.join("results.csv"), &table.csv)?;
                    write_file(&dir.join("significance.json"), table.significance_json())?;
                }
                None => print!("{}", table.text),
            }
        }
        Command::Verify {
            config,
            manifests,
            rerun,
        } => {
            let l = load_config(&config)?;
            let paths = if manifests.is_empty() {
                manifests_under(&l.root.join(&l.cfg.output_dir))
            } else {
                manifests
            };
            if paths.is_empty() {
                bail!(ExperimentError::Io(
                    "no manifests found; run the experiment first".into()
                ));
            }
            let mut failed = false;
            for p in &paths {
                let m = RunManifest::load(p)?;
                let v = verify_manifest(&m, &l.cfg, &l.root, rerun)?;
                match v.first() {
                    None => println!("PASS {}", p.display()),
                    Some(d) => {
                        failed = true;
                        println!(
                            "FAIL {}: {} differs (recorded {}, now {})",
                            p.display(),
                            d.what,
                            d.expected,
                            d.actual
                        );
                    }
                }
            }
            if failed {
                return Ok(ExitCode::from(EXIT_REPRODUCIBILITY));
            }
        }
        Command::Sweep {
            config,
            scenario,
            output,
        } => {
            let l = load_config(&config)?;
            let ws = Workspace::load(&l.cfg, &l.root)?;
            let prepared = prepare(&ws, &l.cfg)?;
            let spec = find_scenario(&l.cfg, &prepared.split_digest, &scenario)?;
            let grid = l.cfg.sweep.clone().unwrap_or_default();
            let points = run_sweep(&ws, &prepared, &spec, &grid)?;
            let mut csv =
                String::from("latent_dim,learning_rate,batch_size,reduction,validation_rmse\n");
            for p in &points {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p.latent_dim, p.learning_rate, p.batch_size, p.reduction, p.validation_rmse
                ));
            }
            emit(&output, &csv)?;
        }
        Command::Run { config } => {
            let l = load_config(&config)?;
            let ws = Workspace::load(&l.cfg, &l.root)?;
            let outcome = run_experiment(&l.cfg, &ws)?;
            let dir = l.root.join(&l.cfg.output_dir);
            write_outputs(&outcome, &dir)?;
            if let Some(t) = &outcome.table {
                print!("{}", t.text);
            }
            if let Some(x) = &outcome.cross {
                println!();
                for c in &x.cells {
                    println!(
                        "trained with {:<12} tested with {:<12} rmse {:.4}",
                        c.train_source,
                        c.test_source,
                        c.report.value("rmse")?
                    );
                }
            }
            eprintln!("outputs in {}", dir.display());
        }
        Command::Synth {
            output,
            seed,
            users,
            retain,
        } => {
            fs::create_dir_all(&output)
                .with_context(|| format!("creating {}", output.display()))?;
            let data = generate(&SynthConfig {
                seed,
                users,
                ..SynthConfig::default()
            });
            data.corpus.write_jsonl(&output.join("synth.jsonl"))?;
            data.store.write(&output.join("synth_full.revemb"))?;
            homogenize(&data.store, retain).write(&output.join("synth_homogenized.revemb"))?;
            write_file(&output.join("experiment.toml"), SAMPLE_CONFIG)?;
            println!(
                "{} reviews written to {}",
                data.corpus.len(),
                output.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn textstats(a: TextstatsArgs) -> Result<()> {
    let base = load_corpus(&a.base, &a.base_label)?;
    let other = load_corpus(&a.other, &a.other_label)?;
    let (bs, os) = (open_store(&a.base_store)?, open_store(&a.other_store)?);
    let cfg = TextstatsConfig {
        stopwords: match &a.stopwords {
            Some(p) => load_stopwords(p)?,
            None => TextstatsConfig::default().stopwords,
        },
        lexicon: match &a.lexicon {
            Some(p) => Lexicon::load(p)?,
            None => Lexicon::bundled(),
        },
        theta: a.theta,
    };
    let load_sent = |p: &Option<PathBuf>| p.as_deref().map(load_sentiment_labels).transpose();
    let load_emo = |p: &Option<PathBuf>| p.as_deref().map(load_emotion_labels).transpose();
    let (b_sent, o_sent) = (
        load_sent(&a.base_sentiment)?,
        load_sent(&a.other_sentiment)?,
    );
    let (b_emo, o_emo) = (load_emo(&a.base_emotions)?, load_emo(&a.other_emotions)?);
    let base_side = CorpusSide {
        sentiment_labels: b_sent.as_ref(),
        emotion_labels: b_emo.as_ref(),
        ..CorpusSide::new(&base, &bs)
    };
    let other_side = CorpusSide {
        sentiment_labels: o_sent.as_ref(),
        emotion_labels: o_emo.as_ref(),
        ..CorpusSide::new(&other, &os)
    };
    let ids = sample_reviews(&base, a.sample.min(base.len()), a.seed)?;
    let report = corpus_comparison_report(base_side, other_side, &ids, &cfg)?;
    write_file(&a.output.join("report.json"), report.to_json())?;
    write_csv_series(&report, &a.output)?;
    println!(
        "similarity {:.4} vs {:.4}; written to {}",
        report.internal_similarity.base.mean,
        report.internal_similarity.other.mean,
        a.output.display()
    );
    Ok(())
}

/// The error chain, skipping causes whose text the outer message already
/// includes.
fn describe(e: &anyhow::Error) -> String {
    let mut out = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !out.contains(&c) {
            out.push_str(": ");
            out.push_str(&c);
        }
    }
    out
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<ExperimentError>() {
        Some(x) if x.exit_code() == 3 => EXIT_REPRODUCIBILITY,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code_for(&e))
        }
    }
}
