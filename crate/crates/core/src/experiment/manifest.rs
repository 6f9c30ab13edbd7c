use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    io_err, prepare, run_scenario, EvalOptions, ExperimentConfig, ExperimentError, ScenarioSpec,
    Workspace,
};
use crate::digest::sha256_hex;

pub const SOFTWARE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Everything needed to rerun one scenario and check the result bit for
/// bit. Wall-clock time is kept out of it so reruns produce identical
/// manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: ScenarioSpec,
    pub master_seed: u64,
    pub model_seed: u64,
    pub config_digest: String,
    pub split_digest: String,
    pub selection_digest: String,
    pub inputs: Vec<super::InputDigest>,
    pub software_version: String,
    pub params_digest: String,
    pub report_digest: String,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text).map_err(|e| io_err(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub what: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub divergences: Vec<Divergence>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.divergences.is_empty()
    }

    pub fn first(&self) -> Option<&Divergence> {
        self.divergences.first()
    }

    fn compare(&mut self, what: String, expected: &str, actual: &str) {
        if expected != actual {
            self.divergences.push(Divergence {
                what,
                expected: expected.to_string(),
                actual: actual.to_string(),
            });
        }
    }
}

/// Recompute the config and input digests in manifest order. With `rerun`,
/// also retrain the scenario and compare split, selection, parameter and
/// report digests. A missing input file is an error, not a divergence.
pub fn verify_manifest(
    manifest: &RunManifest,
    cfg: &ExperimentConfig,
    root: &Path,
    rerun: bool,
) -> Result<Verification, ExperimentError> {
    let mut v = Verification::default();
    v.compare("config".into(), &manifest.config_digest, &cfg.digest());
    for input in &manifest.inputs {
        let Some(rel) = &input.path else { continue };
        let path = root.join(rel);
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        let kind = serde_json::to_value(input.kind).expect("kind serializes");
        let kind = kind.as_str().unwrap_or("input");
        v.compare(
            format!("{kind} `{}`", input.label),
            &input.sha256,
            &sha256_hex(&bytes),
        );
    }
    if rerun && v.passed() {
        let ws = Workspace::load(cfg, root)?;
        let prepared = prepare(&ws, cfg)?;
        v.compare(
            "split".into(),
            &manifest.split_digest,
            &prepared.split_digest,
        );
        v.compare(
            "history selection".into(),
            &manifest.selection_digest,
            &prepared.selection_digest,
        );
        if v.passed() {
            let opts = EvalOptions {
                ranking_ks: cfg.ranking_ks.clone(),
                business_ks: cfg.business_ks.clone(),
                emit_popularity_rank: cfg.emit_popularity_rank,
            };
            let out = run_scenario(&ws, &prepared, &manifest.scenario, &opts)?;
            v.compare(
                "parameters".into(),
                &manifest.params_digest,
                &out.params_digest,
            );
            v.compare(
                "metric report".into(),
                &manifest.report_digest,
                &out.report.digest(),
            );
        }
    }
    Ok(v)
}
