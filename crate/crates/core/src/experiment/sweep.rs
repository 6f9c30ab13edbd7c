use serde::{Deserialize, Serialize};

use super::{ExperimentError, Prepared, ScenarioSpec, SweepConfig, Workspace};
use crate::model::{train, ModelConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub latent_dim: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub reduction: f64,
    /// Root of the final epoch's validation MSE.
    pub validation_rmse: f64,
}

/// Grid search on the validation split for the training side of `spec`.
/// Points come back best first.
pub fn run_sweep(
    ws: &Workspace,
    prepared: &Prepared,
    spec: &ScenarioSpec,
    grid: &SweepConfig,
) -> Result<Vec<SweepPoint>, ExperimentError> {
    let set = &prepared.instances;
    if set.validation.is_empty() {
        return Err(ExperimentError::Config(
            "sweep needs a nonempty validation split".into(),
        ));
    }
    let store = spec
        .train_history_source
        .as_deref()
        .map(|s| ws.store(s))
        .transpose()?;
    let mut points = Vec::new();
    for &latent_dim in &grid.latent_dims {
        for &learning_rate in &grid.learning_rates {
            for &batch_size in &grid.batch_sizes {
                for &reduction in &grid.reductions {
                    let mut learn = spec.model_config.learn_layer_sizes.clone();
                    *learn
                        .last_mut()
                        .expect("validated config has learning layers") = latent_dim;
                    let cfg = ModelConfig {
                        latent_dim,
                        learning_rate,
                        batch_size,
                        reduction,
                        learn_layer_sizes: learn,
                        ..spec.model_config.clone()
                    };
                    let (_, losses) = train(
                        &cfg,
                        spec.model_variant,
                        set.users.clone(),
                        set.items.clone(),
                        &set.train,
                        &set.validation,
                        store,
                    )?;
                    let mse = losses
                        .epochs
                        .last()
                        .and_then(|e| e.validation_loss)
                        .expect("validation set is nonempty");
                    log::info!("sweep p={latent_dim} lr={learning_rate} batch={batch_size} rho={reduction}: {mse:.5}");
                    points.push(SweepPoint {
                        latent_dim,
                        learning_rate,
                        batch_size,
                        reduction,
                        validation_rmse: mse.sqrt(),
                    });
                }
            }
        }
    }
    points.sort_by(|a, b| a.validation_rmse.total_cmp(&b.validation_rmse));
    Ok(points)
}
