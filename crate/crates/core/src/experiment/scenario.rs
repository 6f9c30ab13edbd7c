use serde::{Deserialize, Serialize};

use super::{
    build_instances, evaluate_model, EvalOptions, ExperimentConfig, ExperimentError, InstanceSet,
    Workspace,
};
use crate::digest::{derive_seed, json_digest};
use crate::metrics::{ItemCatalog, MetricsReport};
use crate::model::{train, LossHistory, ModelConfig, ModelVariant, TrainedModel};
use crate::protocol::{build_plan, SplitPlan};

/// Everything that is shared by every scenario of one experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub plan: SplitPlan,
    pub split_digest: String,
    pub instances: InstanceSet,
    pub selection_digest: String,
    pub catalog: ItemCatalog,
    pub history_len: usize,
}

fn check(what: &str, expected: &str, actual: &str) -> Result<(), ExperimentError> {
    if expected == actual {
        Ok(())
    } else {
        Err(ExperimentError::DigestMismatch {
            what: what.to_string(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        })
    }
}

/// Build the split, negatives, history selections and item catalog from the
/// base corpus, and confirm every other corpus yields the same split.
pub fn prepare(ws: &Workspace, cfg: &ExperimentConfig) -> Result<Prepared, ExperimentError> {
    let base = ws.base();
    let plan = build_plan(
        base,
        cfg.master_seed,
        cfg.validation_fraction,
        cfg.negatives,
    )?;
    let split_digest = plan.digest();
    for label in ws.labels() {
        let other = build_plan(
            ws.corpus(label)?,
            cfg.master_seed,
            cfg.validation_fraction,
            cfg.negatives,
        )?;
        check(
            &format!("split plan of corpus `{label}`"),
            &split_digest,
            &other.digest(),
        )?;
    }
    let history_len = cfg.model.history_len;
    let instances = build_instances(base, &plan, history_len, cfg.drop_short_histories)?;
    let selection_digest = instances.selection_digest();
    let catalog = ItemCatalog::build(base, &plan.train_ids());
    log::info!(
        "split {}: {} users, {} train, {} validation, {} test, {} ranking queries",
        &split_digest[..12],
        plan.users.len(),
        instances.train.len(),
        instances.validation.len(),
        instances.test.len(),
        instances.ranking.len()
    );
    Ok(Prepared {
        plan,
        split_digest,
        instances,
        selection_digest,
        catalog,
        history_len,
    })
}

/// One trained-and-evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub train_history_source: Option<String>,
    pub test_history_source: Option<String>,
    pub model_variant: ModelVariant,
    pub model_config: ModelConfig,
    pub split_hash: String,
}

impl ScenarioSpec {
    pub fn ids_only(name: &str, model_config: &ModelConfig, split_hash: &str) -> Self {
        ScenarioSpec {
            name: name.to_string(),
            train_history_source: None,
            test_history_source: None,
            model_variant: ModelVariant::IdsOnly,
            model_config: model_config.clone(),
            split_hash: split_hash.to_string(),
        }
    }

    pub fn with_reviews(
        name: &str,
        train: &str,
        test: &str,
        model_config: &ModelConfig,
        split_hash: &str,
    ) -> Self {
        ScenarioSpec {
            name: name.to_string(),
            train_history_source: Some(train.to_string()),
            test_history_source: Some(test.to_string()),
            model_variant: ModelVariant::WithReviews,
            model_config: model_config.clone(),
            split_hash: split_hash.to_string(),
        }
    }

    /// Specs for every scenario in `cfg`. The model seed is derived from
    /// the master seed, so `REVLAB_SEED` moves every random stream at once.
    pub fn from_config(cfg: &ExperimentConfig, split_hash: &str) -> Vec<ScenarioSpec> {
        let model = experiment_model_config(cfg);
        cfg.scenarios
            .iter()
            .map(|s| ScenarioSpec {
                name: s.name.clone(),
                train_history_source: s.train_history.clone(),
                test_history_source: s.test_history.clone(),
                model_variant: s.variant,
                model_config: model.clone(),
                split_hash: split_hash.to_string(),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let sources = (
            self.train_history_source.is_some(),
            self.test_history_source.is_some(),
        );
        let ok = match self.model_variant {
            ModelVariant::IdsOnly => sources == (false, false),
            ModelVariant::WithReviews => sources == (true, true),
        };
        if !ok {
            return Err(ExperimentError::Config(format!(
                "scenario `{}`: history sources do not fit the {:?} variant",
                self.name, self.model_variant
            )));
        }
        self.model_config
            .validate()
            .map_err(|e| ExperimentError::Config(format!("scenario `{}`: {e}", self.name)))
    }
}

/// The experiment's model config with its seed derived from the master seed.
pub fn experiment_model_config(cfg: &ExperimentConfig) -> ModelConfig {
    ModelConfig {
        seed: derive_seed(cfg.master_seed, "model"),
        ..cfg.model.clone()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub spec: ScenarioSpec,
    pub model: TrainedModel,
    pub losses: LossHistory,
    pub report: MetricsReport,
    pub params_digest: String,
}

fn store_for<'a>(
    ws: &'a Workspace,
    source: &Option<String>,
) -> Result<Option<&'a crate::embeddings::EmbeddingStore>, ExperimentError> {
    source.as_deref().map(|s| ws.store(s)).transpose()
}

fn fit(
    ws: &Workspace,
    prepared: &Prepared,
    cfg: &ModelConfig,
    variant: ModelVariant,
    train_source: &Option<String>,
) -> Result<(TrainedModel, LossHistory), ExperimentError> {
    if cfg.history_len != prepared.history_len {
        return Err(ExperimentError::Config(format!(
            "model history_len {} differs from the prepared selections ({})",
            cfg.history_len, prepared.history_len
        )));
    }
    let set = &prepared.instances;
    Ok(train(
        cfg,
        variant,
        set.users.clone(),
        set.items.clone(),
        &set.train,
        &set.validation,
        store_for(ws, train_source)?,
    )?)
}

/// Train on the training source's histories and evaluate with the test
/// source's histories, on the shared split.
pub fn run_scenario(
    ws: &Workspace,
    prepared: &Prepared,
    spec: &ScenarioSpec,
    opts: &EvalOptions,
) -> Result<ScenarioOutcome, ExperimentError> {
    spec.validate()?;
    check(
        &format!("split hash of scenario `{}`", spec.name),
        &spec.split_hash,
        &prepared.split_digest,
    )?;
    log::info!("training scenario `{}`", spec.name);
    let (model, losses) = fit(
        ws,
        prepared,
        &spec.model_config,
        spec.model_variant,
        &spec.train_history_source,
    )?;
    let report = evaluate_model(
        &model,
        store_for(ws, &spec.test_history_source)?,
        &prepared.instances,
        &prepared.catalog,
        &prepared.split_digest,
        opts,
    )?;
    Ok(ScenarioOutcome {
        spec: spec.clone(),
        params_digest: json_digest(&model.params),
        model,
        losses,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCell {
    pub train_source: String,
    pub test_source: String,
    pub params_digest: String,
    pub report: MetricsReport,
}

/// Every (train source, test source) pair; one model per train source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub sources: Vec<String>,
    pub split_digest: String,
    pub selection_digest: String,
    pub models_trained: usize,
    pub cells: Vec<CrossCell>,
}

impl CrossMatrix {
    pub fn cell(&self, train: &str, test: &str) -> Option<&CrossCell> {
        self.cells
            .iter()
            .find(|c| c.train_source == train && c.test_source == test)
    }
}

/// Run the train-with/test-with grid over `sources`. Before any training,
/// the split and history selections are rebuilt from each source corpus and
/// must match the shared ones byte for byte; only the vectors differ.
pub fn run_cross_matrix(
    ws: &Workspace,
    prepared: &Prepared,
    cfg: &ExperimentConfig,
    sources: &[String],
    opts: &EvalOptions,
) -> Result<CrossMatrix, ExperimentError> {
    for src in sources {
        let c = ws.corpus(src)?;
        let plan = build_plan(c, cfg.master_seed, cfg.validation_fraction, cfg.negatives)?;
        check(
            &format!("split plan of `{src}`"),
            &prepared.split_digest,
            &plan.digest(),
        )?;
        let sel = build_instances(c, &plan, prepared.history_len, cfg.drop_short_histories)?;
        check(
            &format!("history selection of `{src}`"),
            &prepared.selection_digest,
            &sel.selection_digest(),
        )?;
        ws.store(src)?;
    }
    let model_cfg = experiment_model_config(cfg);
    let mut cells = Vec::new();
    for train_src in sources {
        log::info!("cross matrix: training on `{train_src}`");
        let (model, _) = fit(
            ws,
            prepared,
            &model_cfg,
            ModelVariant::WithReviews,
            &Some(train_src.clone()),
        )?;
        let params_digest = json_digest(&model.params);
        for test_src in sources {
            let report = evaluate_model(
                &model,
                Some(ws.store(test_src)?),
                &prepared.instances,
                &prepared.catalog,
                &prepared.split_digest,
                opts,
            )?;
            cells.push(CrossCell {
                train_source: train_src.clone(),
                test_source: test_src.clone(),
                params_digest: params_digest.clone(),
                report,
            });
        }
    }
    Ok(CrossMatrix {
        sources: sources.to_vec(),
        split_digest: prepared.split_digest.clone(),
        selection_digest: prepared.selection_digest.clone(),
        models_trained: sources.len(),
        cells,
    })
}
