use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::adam::{adam_step, AdamState};
use super::config::{ModelConfig, ModelVariant};
use super::network::{clamp_rating, Gradients};
use super::params::{init_params, Layout, ModelParameters};
use super::ModelError;
use crate::digest::rng_for;
use crate::embeddings::{EmbeddingStore, HistoryWindow};

/// Identifier-to-row mapping frozen at training time. Ids outside the
/// vocabulary map to the reserved row `len()`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        ids.sort();
        ids.dedup();
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Vocabulary { ids, index }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, id: &str) -> usize {
        self.index.get(id).copied().unwrap_or(self.ids.len())
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.ids.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Vocabulary::new(Vec::<String>::deserialize(d)?))
    }
}

/// One rating event with the review ids of its user and item histories
/// (most recent first). Vectors are looked up at use time, so the same
/// instance can be scored against different embedding stores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub review_id: u64,
    pub user_row: usize,
    pub item_row: usize,
    pub rating: f64,
    pub user_history: Vec<u64>,
    pub item_history: Vec<u64>,
}

/// Turns history ids into network inputs.
#[derive(Debug, Clone, Copy)]
pub struct FeatureSource<'a> {
    store: Option<&'a EmbeddingStore>,
    history_len: usize,
}

impl<'a> FeatureSource<'a> {
    /// `store` must be present for the review variant and is ignored otherwise.
    pub fn new(
        cfg: &ModelConfig,
        variant: ModelVariant,
        store: Option<&'a EmbeddingStore>,
    ) -> Result<Self, ModelError> {
        let store = match variant {
            ModelVariant::IdsOnly => None,
            ModelVariant::WithReviews => {
                let s = store.ok_or(ModelError::MissingStore)?;
                if s.dim() != cfg.embedding_dim {
                    return Err(ModelError::DimensionMismatch {
                        expected: cfg.embedding_dim,
                        got: s.dim(),
                    });
                }
                Some(s)
            }
        };
        Ok(FeatureSource {
            store,
            history_len: cfg.history_len,
        })
    }

    pub fn windows(
        &self,
        inst: &Instance,
    ) -> Result<Option<(HistoryWindow, HistoryWindow)>, ModelError> {
        match self.store {
            None => Ok(None),
            Some(s) => Ok(Some((
                HistoryWindow::from_ids(s, &inst.user_history, self.history_len)?,
                HistoryWindow::from_ids(s, &inst.item_history, self.history_len)?,
            ))),
        }
    }
}

pub(crate) fn raw_prediction(
    params: &ModelParameters,
    features: &FeatureSource<'_>,
    inst: &Instance,
) -> Result<super::network::ForwardCache, ModelError> {
    match features.windows(inst)? {
        Some((u, i)) => params.forward(inst.user_row, inst.item_row, &u, &i),
        None => params.forward_flat(inst.user_row, inst.item_row, &[], &[]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Mean squared error over the epoch's instances, each measured just
    /// before the update that used it.
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossHistory {
    /// Training MSE of the freshly initialized network.
    pub initial_train_loss: f64,
    pub epochs: Vec<EpochLoss>,
    pub optimizer_steps: u64,
}

/// A trained network together with everything needed to score new events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub variant: ModelVariant,
    pub users: Vocabulary,
    pub items: Vocabulary,
    pub params: ModelParameters,
}

impl TrainedModel {
    /// Unclamped network output.
    pub fn predict_raw(
        &self,
        inst: &Instance,
        store: Option<&EmbeddingStore>,
    ) -> Result<f64, ModelError> {
        let features = FeatureSource::new(&self.config, self.variant, store)?;
        Ok(raw_prediction(&self.params, &features, inst)?.output)
    }

    /// Network output clamped to the 1..5 rating scale.
    pub fn predict_clamped(
        &self,
        inst: &Instance,
        store: Option<&EmbeddingStore>,
    ) -> Result<f64, ModelError> {
        self.predict_raw(inst, store).map(clamp_rating)
    }

    /// Score many instances with one feature source; order is preserved.
    pub fn predict_many(
        &self,
        instances: &[Instance],
        store: Option<&EmbeddingStore>,
    ) -> Result<Vec<f64>, ModelError> {
        let features = FeatureSource::new(&self.config, self.variant, store)?;
        instances
            .iter()
            .map(|inst| raw_prediction(&self.params, &features, inst).map(|c| c.output))
            .collect()
    }
}

fn mean_loss(
    params: &ModelParameters,
    features: &FeatureSource<'_>,
    instances: &[Instance],
) -> Result<f64, ModelError> {
    let mut sum = 0.0;
    for inst in instances {
        let out = raw_prediction(params, features, inst)?.output;
        sum += (out - inst.rating).powi(2);
    }
    Ok(sum / instances.len() as f64)
}

/// Mini-batch Adam on MSE for a fixed number of epochs; returns the final
/// epoch's network. Single-threaded and fully determined by `cfg.seed`.
pub fn train(
    cfg: &ModelConfig,
    variant: ModelVariant,
    users: Vocabulary,
    items: Vocabulary,
    train_set: &[Instance],
    valid_set: &[Instance],
    store: Option<&EmbeddingStore>,
) -> Result<(TrainedModel, LossHistory), ModelError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let features = FeatureSource::new(cfg, variant, store)?;
    let layout = Layout::new(cfg, variant, users.len(), items.len());
    let mut params = init_params(layout, &mut rng_for(cfg.seed, &["init"]));
    let mut shuffle_rng = rng_for(cfg.seed, &["shuffle"]);
    let mut adam = AdamState::new(params.values.len());
    let mut grads = Gradients::zeros_like(&params);

    let initial_train_loss = mean_loss(&params, &features, train_set)?;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_sq = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let inst = &train_set[i];
                let cache = raw_prediction(&params, &features, inst)?;
                epoch_sq += (cache.output - inst.rating).powi(2);
                params.accumulate_gradients(&cache, inst.rating, scale, &mut grads);
            }
            adam_step(&mut params, &grads, &mut adam, cfg.learning_rate, &cfg.adam)?;
        }
        let validation_loss = if valid_set.is_empty() {
            None
        } else {
            Some(mean_loss(&params, &features, valid_set)?)
        };
        let train_loss = epoch_sq / train_set.len() as f64;
        log::debug!("epoch {epoch}: train {train_loss:.5} valid {validation_loss:?}");
        epochs.push(EpochLoss {
            epoch,
            train_loss,
            validation_loss,
        });
    }
    let model = TrainedModel {
        config: cfg.clone(),
        variant,
        users,
        items,
        params,
    };
    let history = LossHistory {
        initial_train_loss,
        epochs,
        optimizer_steps: adam.step,
    };
    Ok((model, history))
}
