use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Comparison, ExperimentError};
use crate::metrics::{
    compare_entries, percent_change, MetricDirection, MetricsReport, PercentChange,
    SignificanceResult,
};

/// One metric of one declared baseline/treatment pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub baseline: String,
    pub treatment: String,
    pub metric: String,
    /// Absent when the baseline value is zero.
    pub change: Option<PercentChange>,
    pub test: SignificanceResult,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedTable {
    pub columns: Vec<String>,
    pub text: String,
    pub csv: String,
    pub comparisons: Vec<ComparisonResult>,
}

impl RenderedTable {
    pub fn significance_json(&self) -> String {
        serde_json::to_string_pretty(&self.comparisons).expect("comparisons serialize")
    }
}

/// Rating errors first, then ranking metrics by cutoff, then the rest.
fn column_order(name: &str) -> (u8, usize, String) {
    let (stem, k) = match name.split_once('@') {
        Some((s, k)) => (s, k.parse().unwrap_or(0)),
        None => (name, 0),
    };
    let group = match stem {
        "rmse" => 0,
        "mae" => 1,
        "mrr" | "ndcg" => 2,
        _ => 3,
    };
    (group, k, stem.to_string())
}

fn phrase(change: &Option<PercentChange>) -> String {
    match change {
        None => "no percent change (zero baseline)".into(),
        Some(c) => {
            let s = c.to_string();
            if s == "0.0%" {
                "no change (0.0%)".into()
            } else {
                format!("a {s}")
            }
        }
    }
}

/// Rows are scenarios in input order, columns are metrics. A treatment
/// cell carries the stars of the first declared comparison naming it;
/// every comparison also gets a percent-change line.
pub fn render_results_table(
    reports: &[(String, MetricsReport)],
    comparisons: &[Comparison],
) -> Result<RenderedTable, ExperimentError> {
    let first = reports
        .first()
        .ok_or_else(|| ExperimentError::Config("no reports to render".into()))?;
    for (name, r) in reports {
        if r.split_digest != first.1.split_digest {
            return Err(ExperimentError::DigestMismatch {
                what: format!("split hash of report `{name}`"),
                expected: first.1.split_digest.clone(),
                actual: r.split_digest.clone(),
            });
        }
    }
    let by_name: BTreeMap<&str, &MetricsReport> =
        reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
    let mut columns: Vec<String> = reports
        .iter()
        .flat_map(|(_, r)| r.metrics.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    columns.sort_by_key(|c| column_order(c));

    let mut results = Vec::new();
    let mut cell_stars: BTreeMap<(String, String), String> = BTreeMap::new();
    for cmp in comparisons {
        let get = |n: &str| {
            by_name.get(n).copied().ok_or_else(|| {
                ExperimentError::Config(format!("comparison names unknown report `{n}`"))
            })
        };
        let (base, treat) = (get(&cmp.baseline)?, get(&cmp.treatment)?);
        for metric in &columns {
            if !base.metrics.contains_key(metric) || !treat.metrics.contains_key(metric) {
                continue;
            }
            let (b, t) = (base.value(metric)?, treat.value(metric)?);
            let change = percent_change(b, t, MetricDirection::for_metric(metric)).ok();
            let test = compare_entries(base, treat, metric)?;
            let summary = format!(
                "{} vs {}, {metric}: {b:.4} -> {t:.4}, {} (p = {:.4}){}",
                cmp.treatment,
                cmp.baseline,
                phrase(&change),
                test.p_value,
                if test.stars.is_empty() {
                    String::new()
                } else {
                    format!(" {}", test.stars)
                }
            );
            cell_stars
                .entry((cmp.treatment.clone(), metric.clone()))
                .or_insert_with(|| test.stars.clone());
            results.push(ComparisonResult {
                baseline: cmp.baseline.clone(),
                treatment: cmp.treatment.clone(),
                metric: metric.clone(),
                change,
                test,
                summary,
            });
        }
    }

    let cell = |name: &str, r: &MetricsReport, metric: &str| -> String {
        match r.metrics.get(metric) {
            None => "-".into(),
            Some(e) => {
                let stars = cell_stars
                    .get(&(name.to_string(), metric.to_string()))
                    .map(String::as_str)
                    .unwrap_or("");
                format!("{:.4}{stars}", e.value)
            }
        }
    };
    let name_width = reports
        .iter()
        .map(|(n, _)| n.len())
        .max()
        .unwrap_or(0)
        .max(5);
    let col_width = columns.iter().map(String::len).max().unwrap_or(0).max(9);
    let mut text = format!("{:<name_width$}", "model");
    let mut csv = String::from("model");
    for c in &columns {
        write!(text, "  {c:>col_width$}").unwrap();
        write!(csv, ",{c}").unwrap();
    }
    text.push('\n');
    csv.push('\n');
    for (name, r) in reports {
        write!(text, "{name:<name_width$}").unwrap();
        csv.push_str(name);
        for c in &columns {
            let v = cell(name, r, c);
            write!(text, "  {v:>col_width$}").unwrap();
            write!(csv, ",{v}").unwrap();
        }
        text.push('\n');
        csv.push('\n');
    }
    text.push_str(
        "* p <= 0.1, ** p <= 0.05, *** p <= 0.001 (paired t-test against the declared baseline)\n",
    );
    if !results.is_empty() {
        text.push('\n');
        for r in &results {
            text.push_str(&r.summary);
            text.push('\n');
        }
    }
    Ok(RenderedTable {
        columns,
        text,
        csv,
        comparisons: results,
    })
}
