use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::Layout;
use super::train::TrainedModel;
use super::ModelError;

pub const CHECKPOINT_FORMAT: &str = "revlab-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: TrainedModel,
}

/// Serialize a model as a versioned JSON document. Floats are written in
/// shortest round-trip form, so loading reproduces every bit.
pub fn checkpoint_bytes(model: &TrainedModel) -> Vec<u8> {
    let env = Envelope {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        model: model.clone(),
    };
    serde_json::to_vec(&env).expect("model serializes")
}

pub fn save_checkpoint(model: &TrainedModel, path: &Path) -> Result<(), ModelError> {
    fs::write(path, checkpoint_bytes(model))
        .map_err(|e| ModelError::Checkpoint(format!("{}: {e}", path.display())))
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<TrainedModel, ModelError> {
    let env: Envelope =
        serde_json::from_slice(bytes).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    if env.format != CHECKPOINT_FORMAT || env.version != CHECKPOINT_VERSION {
        return Err(ModelError::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            env.format, env.version
        )));
    }
    let m = env.model;
    m.config.validate()?;
    let expected = Layout::new(&m.config, m.variant, m.users.len(), m.items.len());
    if m.params.layout != expected || m.params.values.len() != expected.total {
        return Err(ModelError::Checkpoint(
            "parameter layout does not match config".into(),
        ));
    }
    if !m.params.all_finite() {
        return Err(ModelError::Checkpoint("non-finite parameter".into()));
    }
    Ok(m)
}

pub fn load_checkpoint(path: &Path) -> Result<TrainedModel, ModelError> {
    let bytes =
        fs::read(path).map_err(|e| ModelError::Checkpoint(format!("{}: {e}", path.display())))?;
    checkpoint_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digest::rng_for;
    use crate::model::config::{ModelConfig, ModelVariant};
    use crate::model::params::init_params;
    use crate::model::train::Vocabulary;

    fn model() -> TrainedModel {
        let cfg = ModelConfig {
            latent_dim: 3,
            history_len: 2,
            embedding_dim: 4,
            learn_layer_sizes: vec![5, 3],
            ..ModelConfig::default()
        };
        let users = Vocabulary::new(["a", "b"]);
        let items = Vocabulary::new(["x"]);
        let layout = Layout::new(&cfg, ModelVariant::WithReviews, 2, 1);
        let params = init_params(layout, &mut rng_for(1, &["init"]));
        TrainedModel {
            config: cfg,
            variant: ModelVariant::WithReviews,
            users,
            items,
            params,
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = model();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(&m, f.path()).unwrap();
        let back = load_checkpoint(f.path()).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.params.values.iter().zip(&m.params.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(checkpoint_bytes(&back), checkpoint_bytes(&m));
    }

    #[test]
    fn layout_mismatch_rejected() {
        let mut m = model();
        m.params.values.pop();
        assert!(checkpoint_from_bytes(&checkpoint_bytes(&m)).is_err());
        let mut m = model();
        m.users = Vocabulary::new(["a", "b", "c"]);
        assert!(checkpoint_from_bytes(&checkpoint_bytes(&m)).is_err());
    }
}
