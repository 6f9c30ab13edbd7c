use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Whether the network sees review histories or only identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    WithReviews,
    IdsOnly,
}

/// Hyperparameters of the review-augmented network and its training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Size of the user and item identifier embeddings.
    pub latent_dim: usize,
    /// Number of past reviews per side.
    pub history_len: usize,
    /// Review embedding dimension.
    pub embedding_dim: usize,
    /// Widths of each learning layer; the last must equal `latent_dim`.
    pub learn_layer_sizes: Vec<usize>,
    /// Number of hidden layers in the prediction network.
    pub pred_depth: usize,
    /// Width ratio between successive prediction layers.
    pub reduction: f64,
    /// Lower bound on any prediction-layer width.
    pub min_pred_width: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            latent_dim: 100,
            history_len: 3,
            embedding_dim: 384,
            learn_layer_sizes: vec![256, 100],
            pred_depth: 2,
            reduction: 0.25,
            min_pred_width: 4,
            learning_rate: 0.0005,
            batch_size: 256,
            epochs: 50,
            seed: 42,
            adam: AdamConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.latent_dim == 0 || self.history_len == 0 || self.embedding_dim == 0 {
            return bad("latent_dim, history_len and embedding_dim must be positive".into());
        }
        match self.learn_layer_sizes.last() {
            None => return bad("learn_layer_sizes must not be empty".into()),
            Some(&last) if last != self.latent_dim => {
                return bad(format!(
                    "last learning layer width {last} must equal latent_dim {}",
                    self.latent_dim
                ))
            }
            _ => {}
        }
        if self.learn_layer_sizes.contains(&0) {
            return bad("learning layer widths must be positive".into());
        }
        if self.pred_depth == 0 {
            return bad("pred_depth must be at least 1".into());
        }
        if !(self.reduction > 0.0 && self.reduction <= 1.0) {
            return bad(format!("reduction {} outside (0, 1]", self.reduction));
        }
        if self.min_pred_width == 0 {
            return bad("min_pred_width must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive".into());
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be positive".into());
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || a.epsilon <= 0.0 {
            return bad("adam betas must be in [0, 1) and epsilon positive".into());
        }
        Ok(())
    }

    /// Length of the fused feature vector fed to the prediction network.
    pub fn fused_width(&self, variant: ModelVariant) -> usize {
        match variant {
            ModelVariant::WithReviews => 4 * self.latent_dim,
            ModelVariant::IdsOnly => 2 * self.latent_dim,
        }
    }

    /// Hidden widths of the prediction network: each is the previous width
    /// times `reduction`, rounded, and never below `min_pred_width`.
    pub fn pred_widths(&self, variant: ModelVariant) -> Vec<usize> {
        let mut prev = self.fused_width(variant);
        (0..self.pred_depth)
            .map(|_| {
                let w = ((prev as f64 * self.reduction).round() as usize).max(self.min_pred_width);
                prev = w;
                w
            })
            .collect()
    }
}
