//! Forward and backward passes of the fused identifier/review network.
//!
//! ```text
//! e_u, e_i         rows of the identifier tables
//! h~_u = relu-MLP_u(h-_u)     h-_u = user history slots, most recent first
//! z~_i = relu-MLP_i(z-_i)
//! x    = [e_u | e_i | h~_u | z~_i]      (ids-only: [e_u | e_i])
//! h_l  = relu(W_l h_{l-1} + b_l),  h_0 = x
//! r^   = w_out . h_t + b_out            (affine, unclamped)
//! ```
//!
//! Gradients are derived by hand for this fixed graph. The ReLU derivative
//! at exactly zero is taken as zero.

use super::params::{DenseLayer, ModelParameters};
use super::ModelError;
use crate::embeddings::HistoryWindow;

/// Every intermediate needed to backpropagate one prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub user_row: usize,
    pub item_row: usize,
    /// Concatenated user history (h-_u); empty for ids-only.
    pub user_input: Vec<f64>,
    pub item_input: Vec<f64>,
    /// Post-ReLU output of each user learning layer; the last is h~_u.
    pub user_layers: Vec<Vec<f64>>,
    pub item_layers: Vec<Vec<f64>>,
    /// The fused feature vector x_ui.
    pub fused: Vec<f64>,
    /// Post-ReLU output of each prediction hidden layer.
    pub hidden: Vec<Vec<f64>>,
    pub output: f64,
}

/// Gradient with the same flat layout as [`ModelParameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParameters) -> Self {
        Gradients {
            values: vec![0.0; params.values.len()],
        }
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|g| *g = 0.0);
    }
}

fn dense_forward(values: &[f64], layer: &DenseLayer, input: &[f64], relu: bool) -> Vec<f64> {
    let w = &values[layer.weight_range()];
    let b = &values[layer.bias_range()];
    (0..layer.outputs)
        .map(|o| {
            let row = &w[o * layer.inputs..(o + 1) * layer.inputs];
            let z = b[o] + row.iter().zip(input).map(|(a, x)| a * x).sum::<f64>();
            if relu {
                z.max(0.0)
            } else {
                z
            }
        })
        .collect()
}

/// Accumulate weight/bias gradients for `layer` given the gradient at its
/// (pre-activation) output, and return the gradient w.r.t. its input.
fn dense_backward(
    values: &[f64],
    grads: &mut [f64],
    layer: &DenseLayer,
    input: &[f64],
    delta: &[f64],
) -> Vec<f64> {
    let mut d_input = vec![0.0; layer.inputs];
    for (o, &d) in delta.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let w_off = layer.weight + o * layer.inputs;
        let w = &values[w_off..w_off + layer.inputs];
        let gw = &mut grads[w_off..w_off + layer.inputs];
        for ((g, di), (&wi, &xi)) in gw
            .iter_mut()
            .zip(d_input.iter_mut())
            .zip(w.iter().zip(input))
        {
            *g += d * xi;
            *di += d * wi;
        }
        grads[layer.bias + o] += d;
    }
    d_input
}

fn relu_mask(delta: &mut [f64], activation: &[f64]) {
    for (d, &a) in delta.iter_mut().zip(activation) {
        if a <= 0.0 {
            *d = 0.0;
        }
    }
}

fn run_stack(values: &[f64], stack: &[DenseLayer], input: &[f64]) -> Vec<Vec<f64>> {
    let mut outs: Vec<Vec<f64>> = Vec::with_capacity(stack.len());
    for layer in stack {
        let x = outs.last().map_or(input, Vec::as_slice);
        let y = dense_forward(values, layer, x, true);
        outs.push(y);
    }
    outs
}

fn backprop_stack(
    values: &[f64],
    grads: &mut [f64],
    stack: &[DenseLayer],
    input: &[f64],
    outputs: &[Vec<f64>],
    mut delta: Vec<f64>,
) {
    for l in (0..stack.len()).rev() {
        relu_mask(&mut delta, &outputs[l]);
        let x = if l == 0 { input } else { &outputs[l - 1] };
        delta = dense_backward(values, grads, &stack[l], x, &delta);
    }
}

impl ModelParameters {
    /// Forward pass on flat history inputs (length `k*d` each; ignored for
    /// the ids-only variant).
    pub fn forward_flat(
        &self,
        user_row: usize,
        item_row: usize,
        user_history: &[f64],
        item_history: &[f64],
    ) -> Result<ForwardCache, ModelError> {
        let l = &self.layout;
        if user_row >= l.user_rows || item_row >= l.item_rows {
            return Err(ModelError::IndexOutOfRange { user_row, item_row });
        }
        let with_reviews = !l.learn_user.is_empty();
        if with_reviews
            && (user_history.len() != l.history_width || item_history.len() != l.history_width)
        {
            return Err(ModelError::DimensionMismatch {
                expected: l.history_width,
                got: if user_history.len() != l.history_width {
                    user_history.len()
                } else {
                    item_history.len()
                },
            });
        }
        let v = &self.values;
        let mut fused = Vec::with_capacity(l.fused_width());
        fused.extend_from_slice(&v[l.user_row(user_row)]);
        fused.extend_from_slice(&v[l.item_row(item_row)]);
        let (user_input, item_input, user_layers, item_layers) = if with_reviews {
            let ul = run_stack(v, &l.learn_user, user_history);
            let il = run_stack(v, &l.learn_item, item_history);
            fused.extend_from_slice(ul.last().unwrap());
            fused.extend_from_slice(il.last().unwrap());
            (user_history.to_vec(), item_history.to_vec(), ul, il)
        } else {
            (Vec::new(), Vec::new(), Vec::new(), Vec::new())
        };
        let hidden = run_stack(v, &l.hidden, &fused);
        let last = hidden.last().map_or(fused.as_slice(), Vec::as_slice);
        let output = dense_forward(v, &l.output, last, false)[0];
        Ok(ForwardCache {
            user_row,
            item_row,
            user_input,
            item_input,
            user_layers,
            item_layers,
            fused,
            hidden,
            output,
        })
    }

    pub fn forward(
        &self,
        user_row: usize,
        item_row: usize,
        user_history: &HistoryWindow,
        item_history: &HistoryWindow,
    ) -> Result<ForwardCache, ModelError> {
        self.forward_flat(
            user_row,
            item_row,
            user_history.as_flat(),
            item_history.as_flat(),
        )
    }

    /// Add `scale * d(r^ - target)^2 / d(theta)` into `grads`.
    pub fn accumulate_gradients(
        &self,
        cache: &ForwardCache,
        target: f64,
        scale: f64,
        grads: &mut Gradients,
    ) {
        let l = &self.layout;
        let v = &self.values;
        let g = &mut grads.values;
        let d_out = scale * 2.0 * (cache.output - target);
        if d_out == 0.0 {
            return;
        }

        let last = cache
            .hidden
            .last()
            .map_or(cache.fused.as_slice(), Vec::as_slice);
        let mut delta = dense_backward(v, g, &l.output, last, &[d_out]);
        for i in (0..l.hidden.len()).rev() {
            relu_mask(&mut delta, &cache.hidden[i]);
            let x = if i == 0 {
                &cache.fused
            } else {
                &cache.hidden[i - 1]
            };
            delta = dense_backward(v, g, &l.hidden[i], x, &delta);
        }
        // delta is now d/dx for x = [e_u | e_i | h~_u | z~_i]
        let p = l.latent_dim;
        for (gi, d) in g[l.user_row(cache.user_row)].iter_mut().zip(&delta[..p]) {
            *gi += d;
        }
        for (gi, d) in g[l.item_row(cache.item_row)]
            .iter_mut()
            .zip(&delta[p..2 * p])
        {
            *gi += d;
        }
        if !l.learn_user.is_empty() {
            let uw = l.learn_user.last().unwrap().outputs;
            let iw = l.learn_item.last().unwrap().outputs;
            let du = delta[2 * p..2 * p + uw].to_vec();
            let di = delta[2 * p + uw..2 * p + uw + iw].to_vec();
            backprop_stack(
                v,
                g,
                &l.learn_user,
                &cache.user_input,
                &cache.user_layers,
                du,
            );
            backprop_stack(
                v,
                g,
                &l.learn_item,
                &cache.item_input,
                &cache.item_layers,
                di,
            );
        }
    }

    /// Exact gradient of the per-instance squared error `(r^ - target)^2`.
    pub fn backward(&self, cache: &ForwardCache, target: f64) -> Gradients {
        let mut grads = Gradients::zeros_like(self);
        self.accumulate_gradients(cache, target, 1.0, &mut grads);
        grads
    }
}

/// Mean squared error over a batch.
pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<f64, ModelError> {
    if predictions.len() != targets.len() {
        return Err(ModelError::LengthMismatch(predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).powi(2))
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Map a raw network output onto the 1..5 star scale. Only used at evaluation.
pub fn clamp_rating(raw: f64) -> f64 {
    raw.clamp(1.0, 5.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digest::rng_for;
    use crate::model::config::{ModelConfig, ModelVariant};
    use crate::model::params::{init_params, Layout};
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn tiny() -> ModelConfig {
        ModelConfig {
            latent_dim: 4,
            history_len: 2,
            embedding_dim: 8,
            learn_layer_sizes: vec![6, 4],
            pred_depth: 2,
            reduction: 0.5,
            ..ModelConfig::default()
        }
    }

    fn random_params(variant: ModelVariant, seed: u64) -> ModelParameters {
        let layout = Layout::new(&tiny(), variant, 3, 4);
        let mut rng = rng_for(seed, &["test-params"]);
        let mut p = init_params(layout, &mut rng);
        let n = Normal::new(0.0, 0.5).unwrap();
        p.values.iter_mut().for_each(|v| *v = n.sample(&mut rng));
        p
    }

    fn random_history(seed: u64) -> Vec<f64> {
        let mut rng = rng_for(seed, &["hist"]);
        (0..16).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn widths_follow_config() {
        let cfg = ModelConfig {
            latent_dim: 100,
            history_len: 3,
            embedding_dim: 384,
            learn_layer_sizes: vec![256, 100],
            pred_depth: 2,
            reduction: 0.25,
            ..ModelConfig::default()
        };
        let layout = Layout::new(&cfg, ModelVariant::WithReviews, 2, 2);
        let p = ModelParameters::zeros(layout);
        let h = vec![0.0; 3 * 384];
        let c = p.forward_flat(0, 0, &h, &h).unwrap();
        assert_eq!(c.fused.len(), 400);
        assert_eq!(c.hidden[0].len(), 100);
        assert_eq!(c.hidden[1].len(), 25);
    }

    #[test]
    fn zero_network_outputs_output_bias() {
        let layout = Layout::new(&tiny(), ModelVariant::WithReviews, 3, 4);
        let mut p = ModelParameters::zeros(layout);
        let h = random_history(1);
        assert_eq!(p.forward_flat(1, 2, &h, &h).unwrap().output, 0.0);
        let b = p.layout.output.bias;
        p.values[b] = 3.25;
        assert_eq!(p.forward_flat(0, 3, &h, &h).unwrap().output, 3.25);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = random_params(ModelVariant::WithReviews, 1);
        assert!(matches!(
            p.forward_flat(0, 0, &[0.0; 3], &[0.0; 16]),
            Err(ModelError::DimensionMismatch {
                expected: 16,
                got: 3
            })
        ));
        assert!(p.forward_flat(9, 0, &[0.0; 16], &[0.0; 16]).is_err());
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let p = random_params(ModelVariant::WithReviews, 2);
        let h = random_history(2);
        let c = p.forward_flat(1, 1, &h, &h).unwrap();
        let g = p.backward(&c, c.output);
        assert!(g.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn untouched_rows_get_no_gradient() {
        let p = random_params(ModelVariant::WithReviews, 3);
        let h = random_history(3);
        let c = p.forward_flat(1, 2, &h, &h).unwrap();
        let g = p.backward(&c, 5.0);
        let l = &p.layout;
        for row in 0..l.user_rows {
            let nonzero = g.values[l.user_row(row)].iter().any(|&x| x != 0.0);
            assert_eq!(nonzero, row == 1, "user row {row}");
        }
        for row in 0..l.item_rows {
            let nonzero = g.values[l.item_row(row)].iter().any(|&x| x != 0.0);
            assert_eq!(nonzero, row == 2, "item row {row}");
        }
    }

    fn check_gradients(variant: ModelVariant, seed: u64) {
        let mut p = random_params(variant, seed);
        let (hu, hi) = (random_history(seed), random_history(seed + 100));
        let target = 4.0;
        let c = p.forward_flat(0, 3, &hu, &hi).unwrap();
        let analytic = p.backward(&c, target);
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        for j in 0..p.values.len() {
            let orig = p.values[j];
            p.values[j] = orig + h;
            let up = (p.forward_flat(0, 3, &hu, &hi).unwrap().output - target).powi(2);
            p.values[j] = orig - h;
            let down = (p.forward_flat(0, 3, &hu, &hi).unwrap().output - target).powi(2);
            p.values[j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic.values[j];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        assert!(worst <= 1e-4, "seed {seed}: worst relative error {worst}");
    }

    #[test]
    fn gradient_check_with_reviews() {
        check_gradients(ModelVariant::WithReviews, 11);
    }

    #[test]
    fn gradient_check_ids_only() {
        check_gradients(ModelVariant::IdsOnly, 12);
    }

    #[test]
    fn ids_only_fuses_identifiers_only() {
        let p = random_params(ModelVariant::IdsOnly, 4);
        let c = p.forward_flat(2, 1, &[], &[]).unwrap();
        assert_eq!(c.fused.len(), 8);
        assert_eq!(&c.fused[..4], &p.values[p.layout.user_row(2)]);
        assert_eq!(&c.fused[4..], &p.values[p.layout.item_row(1)]);
    }

    #[test]
    fn empty_histories_depend_only_on_ids() {
        let p = random_params(ModelVariant::WithReviews, 5);
        let z = vec![0.0; 16];
        let a = p.forward_flat(1, 2, &z, &z).unwrap().output;
        let b = p.forward_flat(1, 2, &z, &z).unwrap().output;
        assert_eq!(a, b);
    }

    #[test]
    fn history_order_matters() {
        let p = random_params(ModelVariant::WithReviews, 6);
        let h = random_history(6);
        let mut swapped = h[8..].to_vec();
        swapped.extend_from_slice(&h[..8]);
        let a = p.forward_flat(0, 0, &h, &h).unwrap().output;
        let b = p.forward_flat(0, 0, &swapped, &h).unwrap().output;
        assert_ne!(a, b);
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[1.0], &[3.0]).unwrap(), 4.0);
        assert_eq!(mse_loss(&[3.0, 5.0], &[4.0, 3.0]).unwrap(), 2.5);
        assert!(matches!(mse_loss(&[], &[]), Err(ModelError::EmptyBatch)));
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_rating(5.7), 5.0);
        assert_eq!(clamp_rating(3.2), 3.2);
        assert_eq!(clamp_rating(-0.4), 1.0);
    }
}
