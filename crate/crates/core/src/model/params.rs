use std::ops::Range;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, ModelVariant};

/// Standard deviation of the Gaussian used for every initial weight and bias.
pub const INIT_STD: f64 = 0.01;

/// Offsets of one fully connected layer inside the flat parameter vector.
/// Weights are row-major, `outputs x inputs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weight: usize,
    pub bias: usize,
}

impl DenseLayer {
    pub fn weight_range(&self) -> Range<usize> {
        self.weight..self.weight + self.inputs * self.outputs
    }

    pub fn bias_range(&self) -> Range<usize> {
        self.bias..self.bias + self.outputs
    }
}

/// Where each tensor lives in the flat parameter vector.
///
/// The identifier tables carry one extra trailing row reserved for ids not
/// seen during training; it starts at zero and never receives gradient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub variant: ModelVariant,
    pub latent_dim: usize,
    pub history_width: usize,
    pub user_rows: usize,
    pub item_rows: usize,
    pub user_embedding: usize,
    pub item_embedding: usize,
    pub learn_user: Vec<DenseLayer>,
    pub learn_item: Vec<DenseLayer>,
    pub hidden: Vec<DenseLayer>,
    pub output: DenseLayer,
    pub total: usize,
}

struct Allocator(usize);

impl Allocator {
    fn take(&mut self, n: usize) -> usize {
        let at = self.0;
        self.0 += n;
        at
    }

    fn dense(&mut self, inputs: usize, outputs: usize) -> DenseLayer {
        let weight = self.take(inputs * outputs);
        let bias = self.take(outputs);
        DenseLayer {
            inputs,
            outputs,
            weight,
            bias,
        }
    }

    fn stack(&mut self, input: usize, widths: &[usize]) -> Vec<DenseLayer> {
        let mut prev = input;
        widths
            .iter()
            .map(|&w| {
                let l = self.dense(prev, w);
                prev = w;
                l
            })
            .collect()
    }
}

impl Layout {
    /// `n_users`/`n_items` count the training vocabularies; the reserved
    /// unseen-id row is added on top.
    pub fn new(cfg: &ModelConfig, variant: ModelVariant, n_users: usize, n_items: usize) -> Layout {
        let p = cfg.latent_dim;
        let history_width = cfg.history_len * cfg.embedding_dim;
        let (user_rows, item_rows) = (n_users + 1, n_items + 1);
        let mut alloc = Allocator(0);
        let user_embedding = alloc.take(user_rows * p);
        let item_embedding = alloc.take(item_rows * p);
        let (learn_user, learn_item) = match variant {
            ModelVariant::WithReviews => (
                alloc.stack(history_width, &cfg.learn_layer_sizes),
                alloc.stack(history_width, &cfg.learn_layer_sizes),
            ),
            ModelVariant::IdsOnly => (Vec::new(), Vec::new()),
        };
        let hidden = alloc.stack(cfg.fused_width(variant), &cfg.pred_widths(variant));
        let output = alloc.dense(
            hidden
                .last()
                .map_or(cfg.fused_width(variant), |l| l.outputs),
            1,
        );
        Layout {
            variant,
            latent_dim: p,
            history_width,
            user_rows,
            item_rows,
            user_embedding,
            item_embedding,
            learn_user,
            learn_item,
            hidden,
            output,
            total: alloc.0,
        }
    }

    pub fn user_row(&self, row: usize) -> Range<usize> {
        let start = self.user_embedding + row * self.latent_dim;
        start..start + self.latent_dim
    }

    pub fn item_row(&self, row: usize) -> Range<usize> {
        let start = self.item_embedding + row * self.latent_dim;
        start..start + self.latent_dim
    }

    pub fn unseen_user(&self) -> usize {
        self.user_rows - 1
    }

    pub fn unseen_item(&self) -> usize {
        self.item_rows - 1
    }

    /// Width of `x_ui`.
    pub fn fused_width(&self) -> usize {
        self.hidden.first().map_or(self.output.inputs, |l| l.inputs)
    }
}

/// All trainable values of one network in a single flat vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub layout: Layout,
    pub values: Vec<f64>,
}

impl ModelParameters {
    pub fn zeros(layout: Layout) -> Self {
        let values = vec![0.0; layout.total];
        ModelParameters { layout, values }
    }

    pub fn user_embeddings(&self) -> &[f64] {
        let l = &self.layout;
        &self.values[l.user_embedding..l.user_embedding + l.user_rows * l.latent_dim]
    }

    pub fn item_embeddings(&self) -> &[f64] {
        let l = &self.layout;
        &self.values[l.item_embedding..l.item_embedding + l.item_rows * l.latent_dim]
    }

    pub fn weights(&self, layer: &DenseLayer) -> &[f64] {
        &self.values[layer.weight_range()]
    }

    pub fn bias(&self, layer: &DenseLayer) -> &[f64] {
        &self.values[layer.bias_range()]
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Draw every parameter i.i.d. from Normal(0, 0.01^2), except the reserved
/// unseen-id rows which stay zero.
pub fn init_params<R: Rng + ?Sized>(layout: Layout, rng: &mut R) -> ModelParameters {
    let normal = Normal::new(0.0, INIT_STD).expect("valid normal");
    let mut params = ModelParameters::zeros(layout);
    let reserved = [
        params.layout.user_row(params.layout.unseen_user()),
        params.layout.item_row(params.layout.unseen_item()),
    ];
    for (i, v) in params.values.iter_mut().enumerate() {
        if !reserved.iter().any(|r| r.contains(&i)) {
            *v = normal.sample(rng);
        }
    }
    params
}
