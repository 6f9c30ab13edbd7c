use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentError};
use crate::corpus::{align_corpora, filter_min_interactions, load_corpus, Corpus};
use crate::digest::{json_digest, sha256_hex};
use crate::embeddings::{open_store, EmbeddingStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Config,
    Corpus,
    Store,
}

/// Digest of one experiment input. `path` is relative to the workspace
/// root and absent for inputs that were built in memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub kind: InputKind,
    pub label: String,
    pub path: Option<PathBuf>,
    pub sha256: String,
}

/// Aligned corpora and their embedding stores, keyed by label. The first
/// corpus supplies the metadata every split and catalog is built from.
#[derive(Debug, Clone)]
pub struct Workspace {
    base_label: String,
    corpora: BTreeMap<String, Corpus>,
    stores: BTreeMap<String, EmbeddingStore>,
    inputs: Vec<InputDigest>,
}

fn file_digest(path: &Path) -> Result<String, ExperimentError> {
    let bytes =
        fs::read(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

impl Workspace {
    /// Build from in-memory corpora; `stores` pairs a corpus label with the
    /// vectors of its texts.
    pub fn from_memory(
        corpora: Vec<Corpus>,
        stores: Vec<(String, EmbeddingStore)>,
    ) -> Result<Self, ExperimentError> {
        let mut inputs = Vec::new();
        for c in &corpora {
            inputs.push(InputDigest {
                kind: InputKind::Corpus,
                label: c.label().to_string(),
                path: None,
                sha256: json_digest(c.records()),
            });
        }
        for (label, s) in &stores {
            inputs.push(InputDigest {
                kind: InputKind::Store,
                label: label.clone(),
                path: None,
                sha256: s.digest(),
            });
        }
        Self::assemble(corpora, stores, inputs)
    }

    fn assemble(
        corpora: Vec<Corpus>,
        stores: Vec<(String, EmbeddingStore)>,
        inputs: Vec<InputDigest>,
    ) -> Result<Self, ExperimentError> {
        let base_label = corpora
            .first()
            .ok_or_else(|| ExperimentError::Config("no corpora".into()))?
            .label()
            .to_string();
        let base = &corpora[0];
        for other in &corpora[1..] {
            align_corpora(base, other)?;
        }
        let corpora: BTreeMap<String, Corpus> = corpora
            .into_iter()
            .map(|c| (c.label().to_string(), c))
            .collect();
        let mut store_map = BTreeMap::new();
        for (label, s) in stores {
            if !corpora.contains_key(&label) {
                return Err(ExperimentError::Config(format!(
                    "store for unknown corpus `{label}`"
                )));
            }
            store_map.insert(label, s);
        }
        Ok(Workspace {
            base_label,
            corpora,
            stores: store_map,
            inputs,
        })
    }

    /// Load every corpus and store named in `cfg`, resolving paths against
    /// `root`. The interaction filter, if configured, runs on the first
    /// corpus and the others are cut to the same review ids.
    pub fn load(cfg: &ExperimentConfig, root: &Path) -> Result<Self, ExperimentError> {
        let mut corpora = Vec::new();
        let mut stores = Vec::new();
        let mut inputs = Vec::new();
        for entry in &cfg.corpora {
            let path = root.join(&entry.path);
            inputs.push(InputDigest {
                kind: InputKind::Corpus,
                label: entry.label.clone(),
                path: Some(entry.path.clone()),
                sha256: file_digest(&path)?,
            });
            corpora.push(load_corpus(&path, &entry.label)?);
            if let Some(sp) = &entry.store {
                let path = root.join(sp);
                inputs.push(InputDigest {
                    kind: InputKind::Store,
                    label: entry.label.clone(),
                    path: Some(sp.clone()),
                    sha256: file_digest(&path)?,
                });
                stores.push((entry.label.clone(), open_store(&path)?));
            }
        }
        if let (Some(min), Some(first)) = (cfg.min_interactions, corpora.first()) {
            let kept = filter_min_interactions(first, min, cfg.filter_mode).review_ids();
            log::info!(
                "interaction filter keeps {} of {} reviews",
                kept.len(),
                first.len()
            );
            corpora = corpora.iter().map(|c| c.retain_ids(&kept)).collect();
        }
        Self::assemble(corpora, stores, inputs)
    }

    pub fn base(&self) -> &Corpus {
        &self.corpora[&self.base_label]
    }

    pub fn corpus(&self, label: &str) -> Result<&Corpus, ExperimentError> {
        self.corpora
            .get(label)
            .ok_or_else(|| ExperimentError::Config(format!("unknown corpus `{label}`")))
    }

    pub fn store(&self, label: &str) -> Result<&EmbeddingStore, ExperimentError> {
        self.stores.get(label).ok_or_else(|| {
            ExperimentError::Config(format!("corpus `{label}` has no embedding store"))
        })
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.corpora.keys().map(String::as_str)
    }

    pub fn inputs(&self) -> &[InputDigest] {
        &self.inputs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::record;

    fn corpus(label: &str) -> Corpus {
        Corpus::new(
            label,
            vec![
                record(1, "u", "a", 4, "2010-01-01"),
                record(2, "u", "b", 5, "2010-02-01"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn memory_workspace_checks_alignment() {
        let ws = Workspace::from_memory(vec![corpus("human"), corpus("ai")], vec![]).unwrap();
        assert_eq!(ws.base().label(), "human");
        assert_eq!(ws.labels().collect::<Vec<_>>(), vec!["ai", "human"]);
        assert!(ws.store("human").is_err());

        let mut bad = corpus("ai").records().to_vec();
        bad[1].overall_rating = 3;
        let bad = Corpus::new("ai", bad).unwrap();
        assert!(Workspace::from_memory(vec![corpus("human"), bad], vec![]).is_err());
    }

    #[test]
    fn loads_from_files() {
        let dir = tempfile::tempdir().unwrap();
        corpus("x")
            .write_jsonl(&dir.path().join("h.jsonl"))
            .unwrap();
        let cfg =
            ExperimentConfig::from_toml("[[corpora]]\nlabel = \"human\"\npath = \"h.jsonl\"\n")
                .unwrap();
        let ws = Workspace::load(&cfg, dir.path()).unwrap();
        assert_eq!(ws.base().len(), 2);
        assert_eq!(ws.inputs()[0].path.as_deref(), Some(Path::new("h.jsonl")));
        assert_eq!(ws.inputs()[0].sha256.len(), 64);
    }
}
