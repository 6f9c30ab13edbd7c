//! Runs the scenario matrix: one shared split, one model per scenario,
//! cross train/test cells, rendered tables and reproducibility manifests.

mod config;
mod evaluate;
mod instances;
mod manifest;
mod render;
mod run;
mod scenario;
mod sweep;
mod workspace;

use thiserror::Error;

pub use config::{
    Comparison, CorpusEntry, CrossMatrixConfig, ExperimentConfig, ScenarioEntry, SweepConfig,
    SEED_ENV,
};
pub use evaluate::{evaluate_model, EvalOptions};
pub use instances::{build_instances, InstanceSet, RankingQuery};
pub use manifest::{verify_manifest, Divergence, RunManifest, Verification, SOFTWARE_VERSION};
pub use render::{render_results_table, ComparisonResult, RenderedTable};
pub use run::{run_experiment, write_outputs, ExperimentOutcome};
pub use scenario::{
    experiment_model_config, prepare, run_cross_matrix, run_scenario, CrossCell, CrossMatrix,
    Prepared, ScenarioOutcome, ScenarioSpec,
};
pub use sweep::{run_sweep, SweepPoint};
pub use workspace::{InputDigest, InputKind, Workspace};

use crate::corpus::CorpusError;
use crate::embeddings::StoreError;
use crate::metrics::MetricsError;
use crate::model::ModelError;
use crate::protocol::ProtocolError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    /// Two things that must share a digest do not.
    #[error("{what}: digest {expected} vs {actual}")]
    DigestMismatch {
        what: String,
        expected: String,
        actual: String,
    },
}

impl ExperimentError {
    /// Process exit code: 3 for reproducibility failures, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::DigestMismatch { .. } => 3,
            _ => 2,
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io(format!("{}: {e}", path.display()))
}
