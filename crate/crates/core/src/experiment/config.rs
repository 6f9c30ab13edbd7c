use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::corpus::FilterMode;
use crate::model::{ModelConfig, ModelVariant};
use crate::protocol::{DEFAULT_NEGATIVES, DEFAULT_VALIDATION_FRACTION};

/// Environment variable that replaces `master_seed` when set.
pub const SEED_ENV: &str = "REVLAB_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub label: String,
    /// JSONL corpus, relative to the config file.
    pub path: PathBuf,
    /// REVEMB01 store for this corpus's texts.
    #[serde(default)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub name: String,
    pub variant: ModelVariant,
    #[serde(default)]
    pub train_history: Option<String>,
    #[serde(default)]
    pub test_history: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub baseline: String,
    pub treatment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossMatrixConfig {
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub latent_dims: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub reductions: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            latent_dims: vec![20, 50, 100],
            learning_rates: vec![0.0001, 0.0005, 0.001],
            batch_sizes: vec![128, 256, 512],
            reductions: vec![0.25, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_fraction")]
    pub validation_fraction: f64,
    #[serde(default = "default_negatives")]
    pub negatives: usize,
    #[serde(default = "default_ks")]
    pub ranking_ks: Vec<usize>,
    #[serde(default = "default_business_ks")]
    pub business_ks: Vec<usize>,
    /// Also report the mean popularity rank next to the mean review count.
    #[serde(default)]
    pub emit_popularity_rank: bool,
    /// Drop instances whose user or item history is shorter than k instead
    /// of zero-padding.
    #[serde(default)]
    pub drop_short_histories: bool,
    #[serde(default)]
    pub min_interactions: Option<usize>,
    #[serde(default)]
    pub filter_mode: FilterMode,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub corpora: Vec<CorpusEntry>,
    #[serde(default)]
    pub scenarios: Vec<ScenarioEntry>,
    #[serde(default)]
    pub comparisons: Vec<Comparison>,
    #[serde(default)]
    pub cross_matrix: Option<CrossMatrixConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_seed() -> u64 {
    42
}
fn default_fraction() -> f64 {
    DEFAULT_VALIDATION_FRACTION
}
fn default_negatives() -> usize {
    DEFAULT_NEGATIVES
}
fn default_ks() -> Vec<usize> {
    vec![3, 5, 10, 20]
}
fn default_business_ks() -> Vec<usize> {
    vec![10]
}
fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig =
            toml::from_str(s).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Apply `REVLAB_SEED` if it is set. Returns whether it was.
    pub fn apply_seed_env(&mut self) -> Result<bool, ExperimentError> {
        match std::env::var(SEED_ENV) {
            Ok(v) => {
                self.master_seed = v.trim().parse().map_err(|_| {
                    ExperimentError::Config(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))
                })?;
                Ok(true)
            }
            Err(_) => Ok(false),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        self.model
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!(
                "validation_fraction {} outside [0, 1)",
                self.validation_fraction
            ));
        }
        if self
            .ranking_ks
            .iter()
            .chain(&self.business_ks)
            .any(|&k| k == 0 || k > self.negatives + 1)
        {
            return bad(format!("cutoffs must lie in 1..={}", self.negatives + 1));
        }
        let labels: BTreeSet<&str> = self.corpora.iter().map(|c| c.label.as_str()).collect();
        if labels.len() != self.corpora.len() {
            return bad("corpus labels must be unique".into());
        }
        let mut names = BTreeSet::new();
        for s in &self.scenarios {
            if !names.insert(s.name.as_str()) {
                return bad(format!("duplicate scenario `{}`", s.name));
            }
            match s.variant {
                ModelVariant::IdsOnly if s.train_history.is_some() || s.test_history.is_some() => {
                    return bad(format!(
                        "scenario `{}`: ids_only takes no history sources",
                        s.name
                    ));
                }
                ModelVariant::WithReviews
                    if s.train_history.is_none() || s.test_history.is_none() =>
                {
                    return bad(format!(
                        "scenario `{}`: with_reviews needs train and test history",
                        s.name
                    ));
                }
                _ => {}
            }
            for src in s.train_history.iter().chain(&s.test_history) {
                if !labels.contains(src.as_str()) {
                    return bad(format!(
                        "scenario `{}` names unknown corpus `{src}`",
                        s.name
                    ));
                }
            }
        }
        for c in &self.comparisons {
            for n in [&c.baseline, &c.treatment] {
                if !names.contains(n.as_str()) {
                    return bad(format!("comparison names unknown scenario `{n}`"));
                }
            }
        }
        if let Some(x) = &self.cross_matrix {
            if x.sources.is_empty() {
                return bad("cross_matrix.sources is empty".into());
            }
            for src in &x.sources {
                if !labels.contains(src.as_str()) {
                    return bad(format!("cross_matrix names unknown corpus `{src}`"));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the effective configuration.
    pub fn digest(&self) -> String {
        crate::digest::json_digest(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
master_seed = 7
ranking_ks = [3, 10]

[model]
latent_dim = 16
learn_layer_sizes = [64, 16]
embedding_dim = 32

[[corpora]]
label = "human"
path = "human.jsonl"
store = "human.revemb"

[[scenarios]]
name = "NCF"
variant = "ids_only"

[[scenarios]]
name = "NCF-Human"
variant = "with_reviews"
train_history = "human"
test_history = "human"

[[comparisons]]
baseline = "NCF"
treatment = "NCF-Human"
"#;

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.master_seed, 7);
        assert_eq!(c.model.latent_dim, 16);
        assert_eq!(c.model.history_len, 3);
        assert_eq!(c.negatives, 99);
        assert_eq!(c.scenarios[1].train_history.as_deref(), Some("human"));
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!(c.master_seed, 42);
        assert_eq!(c.ranking_ks, vec![3, 5, 10, 20]);
        assert_eq!(c.model, ModelConfig::default());
    }

    #[test]
    fn rejects_inconsistent_scenarios() {
        let ids_with_history = SAMPLE.replace(
            "name = \"NCF\"\nvariant = \"ids_only\"",
            "name = \"NCF\"\nvariant = \"ids_only\"\ntrain_history = \"human\"",
        );
        assert!(ExperimentConfig::from_toml(&ids_with_history).is_err());
        let unknown = SAMPLE.replace("test_history = \"human\"", "test_history = \"genai\"");
        assert!(ExperimentConfig::from_toml(&unknown).is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("ranking_ks = [101]").is_err());
    }

    #[test]
    fn digest_tracks_seed() {
        let a = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let b = ExperimentConfig {
            master_seed: 8,
            ..a.clone()
        };
        assert_ne!(a.digest(), b.digest());
    }
}
