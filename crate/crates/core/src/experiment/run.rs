use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use super::{
    experiment_model_config, io_err, prepare, render_results_table, run_cross_matrix, run_scenario,
    CrossMatrix, EvalOptions, ExperimentConfig, ExperimentError, Prepared, RenderedTable,
    RunManifest, ScenarioOutcome, ScenarioSpec, Workspace, SOFTWARE_VERSION,
};
use crate::model::checkpoint_bytes;
use crate::protocol::SplitPlan;

const SHARED_HYPERPARAMETERS: &str =
    "every scenario, including tone variants and cross cells, reuses one model configuration";
const SEED_NOTE: &str = "model seed is derived from the master seed";

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub plan: SplitPlan,
    pub scenarios: Vec<ScenarioOutcome>,
    pub manifests: Vec<RunManifest>,
    pub table: Option<RenderedTable>,
    pub cross: Option<CrossMatrix>,
    pub cross_manifests: Vec<RunManifest>,
    /// Seconds per step; written apart from the manifests.
    pub timing: BTreeMap<String, f64>,
}

impl EvalOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        EvalOptions {
            ranking_ks: cfg.ranking_ks.clone(),
            business_ks: cfg.business_ks.clone(),
            emit_popularity_rank: cfg.emit_popularity_rank,
        }
    }
}

fn manifest(
    cfg: &ExperimentConfig,
    ws: &Workspace,
    prepared: &Prepared,
    spec: &ScenarioSpec,
    params_digest: &str,
    report_digest: &str,
) -> RunManifest {
    RunManifest {
        scenario: spec.clone(),
        master_seed: cfg.master_seed,
        model_seed: spec.model_config.seed,
        config_digest: cfg.digest(),
        split_digest: prepared.split_digest.clone(),
        selection_digest: prepared.selection_digest.clone(),
        inputs: ws.inputs().to_vec(),
        software_version: SOFTWARE_VERSION.to_string(),
        params_digest: params_digest.to_string(),
        report_digest: report_digest.to_string(),
        notes: vec![SHARED_HYPERPARAMETERS.to_string(), SEED_NOTE.to_string()],
    }
}

/// Name of the cross-matrix cell trained on `train` and tested on `test`.
pub fn cross_cell_name(train: &str, test: &str) -> String {
    format!("cross_{train}_to_{test}")
}

/// Every configured scenario, the rendered comparison table and, if
/// configured, the cross matrix.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    ws: &Workspace,
) -> Result<ExperimentOutcome, ExperimentError> {
    cfg.validate()?;
    let mut timing = BTreeMap::new();
    let t0 = Instant::now();
    let prepared = prepare(ws, cfg)?;
    timing.insert("prepare".to_string(), t0.elapsed().as_secs_f64());
    let opts = EvalOptions::from_config(cfg);

    let mut scenarios = Vec::new();
    let mut manifests = Vec::new();
    for spec in ScenarioSpec::from_config(cfg, &prepared.split_digest) {
        let t = Instant::now();
        let out = run_scenario(ws, &prepared, &spec, &opts)?;
        timing.insert(format!("scenario:{}", spec.name), t.elapsed().as_secs_f64());
        manifests.push(manifest(
            cfg,
            ws,
            &prepared,
            &spec,
            &out.params_digest,
            &out.report.digest(),
        ));
        scenarios.push(out);
    }
    let table = if scenarios.is_empty() {
        None
    } else {
        let reports: Vec<(String, _)> = scenarios
            .iter()
            .map(|s| (s.spec.name.clone(), s.report.clone()))
            .collect();
        Some(render_results_table(&reports, &cfg.comparisons)?)
    };

    let (cross, cross_manifests) = match &cfg.cross_matrix {
        None => (None, Vec::new()),
        Some(x) => {
            let t = Instant::now();
            let grid = run_cross_matrix(ws, &prepared, cfg, &x.sources, &opts)?;
            timing.insert("cross_matrix".to_string(), t.elapsed().as_secs_f64());
            let model_cfg = experiment_model_config(cfg);
            let ms = grid
                .cells
                .iter()
                .map(|c| {
                    let spec = ScenarioSpec::with_reviews(
                        &cross_cell_name(&c.train_source, &c.test_source),
                        &c.train_source,
                        &c.test_source,
                        &model_cfg,
                        &prepared.split_digest,
                    );
                    manifest(
                        cfg,
                        ws,
                        &prepared,
                        &spec,
                        &c.params_digest,
                        &c.report.digest(),
                    )
                })
                .collect();
            (Some(grid), ms)
        }
    };
    timing.insert("total".to_string(), t0.elapsed().as_secs_f64());
    Ok(ExperimentOutcome {
        plan: prepared.plan,
        scenarios,
        manifests,
        table,
        cross,
        cross_manifests,
        timing,
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

/// Lay the outcome out under `dir`. Everything except `timing.json` is a
/// pure function of the inputs and the master seed.
pub fn write_outputs(outcome: &ExperimentOutcome, dir: &Path) -> Result<(), ExperimentError> {
    write(&dir.join("split.json"), outcome.plan.to_json())?;
    for (s, m) in outcome.scenarios.iter().zip(&outcome.manifests) {
        let d = dir.join("scenarios").join(&s.spec.name);
        write(&d.join("report.json"), s.report.to_json())?;
        write(&d.join("manifest.json"), m.to_json())?;
        write(&d.join("losses.json"), pretty(&s.losses))?;
        write(&d.join("model.json"), checkpoint_bytes(&s.model))?;
    }
    if let Some(t) = &outcome.table {
        write(&dir.join("results.txt"), &t.text)?;
        write(&dir.join("results.csv"), &t.csv)?;
        write(&dir.join("significance.json"), t.significance_json())?;
    }
    if let Some(x) = &outcome.cross {
        write(&dir.join("cross_matrix.json"), pretty(x))?;
        for m in &outcome.cross_manifests {
            write(
                &dir.join("cross")
                    .join(&m.scenario.name)
                    .join("manifest.json"),
                m.to_json(),
            )?;
        }
    }
    write(&dir.join("timing.json"), pretty(&outcome.timing))?;
    Ok(())
}
