//! The review-augmented neural collaborative filtering network: identifier
//! embeddings, per-side learning layers over review histories, a shrinking
//! ReLU prediction stack, and its training loop.

mod adam;
mod checkpoint;
mod config;
mod network;
mod params;
mod train;

use thiserror::Error;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{checkpoint_bytes, checkpoint_from_bytes, load_checkpoint, save_checkpoint};
pub use config::{AdamConfig, ModelConfig, ModelVariant};
pub use network::{clamp_rating, mse_loss, ForwardCache, Gradients};
pub use params::{init_params, DenseLayer, Layout, ModelParameters, INIT_STD};
pub use train::{train, EpochLoss, FeatureSource, Instance, LossHistory, TrainedModel, Vocabulary};

use crate::embeddings::StoreError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("row index out of range (user {user_row}, item {item_row})")]
    IndexOutOfRange { user_row: usize, item_row: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("length mismatch: {0} predictions vs {1} targets")]
    LengthMismatch(usize, usize),
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("non-finite gradient {value} at parameter {index} (step {step})")]
    NonFiniteGradient { index: usize, value: f64, step: u64 },
    #[error("review variant needs an embedding store")]
    MissingStore,
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
