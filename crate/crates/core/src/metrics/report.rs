use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{paired_t_test, MetricsError, SignificanceResult};
use crate::digest::json_digest;

/// Per-instance values keyed by the unit they were measured on (a review
/// id for rating errors, a user for ranking lists).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerInstance {
    pub keys: Vec<String>,
    pub values: Vec<f64>,
}

impl PerInstance {
    pub fn digest(&self) -> String {
        json_digest(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub value: f64,
    pub n: usize,
    pub per_instance_digest: Option<String>,
}

/// Metric name to aggregate, plus the per-instance vectors behind each
/// aggregate so any two reports can be tested against each other later.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub split_digest: String,
    pub metrics: BTreeMap<String, MetricEntry>,
    pub per_instance: BTreeMap<String, PerInstance>,
}

impl MetricsReport {
    pub fn new(split_digest: &str) -> Self {
        MetricsReport {
            split_digest: split_digest.to_string(),
            ..Default::default()
        }
    }

    pub fn insert(&mut self, name: &str, value: f64, per_instance: Option<PerInstance>) {
        let (n, digest) = match &per_instance {
            Some(p) => (p.values.len(), Some(p.digest())),
            None => (0, None),
        };
        self.metrics.insert(
            name.to_string(),
            MetricEntry {
                value,
                n,
                per_instance_digest: digest,
            },
        );
        if let Some(p) = per_instance {
            self.per_instance.insert(name.to_string(), p);
        }
    }

    pub fn value(&self, name: &str) -> Result<f64, MetricsError> {
        self.metrics
            .get(name)
            .map(|e| e.value)
            .ok_or_else(|| MetricsError::MissingMetric(name.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn digest(&self) -> String {
        json_digest(self)
    }
}

/// Paired t-test of one metric between two reports, matched by instance key.
pub fn compare_entries(
    a: &MetricsReport,
    b: &MetricsReport,
    metric: &str,
) -> Result<SignificanceResult, MetricsError> {
    let pa = a
        .per_instance
        .get(metric)
        .ok_or_else(|| MetricsError::MissingMetric(metric.to_string()))?;
    let pb = b
        .per_instance
        .get(metric)
        .ok_or_else(|| MetricsError::MissingMetric(metric.to_string()))?;
    if pa.keys != pb.keys {
        return Err(MetricsError::KeyMismatch(metric.to_string()));
    }
    paired_t_test(&pa.values, &pb.values)
}
