use std::fmt;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Whether a smaller or a larger value is the better outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricDirection {
    /// Error metrics (RMSE, MAE): a drop reads as a "reduction".
    LowerIsBetter,
    /// Ranking and business metrics: a rise reads as an "improvement".
    HigherIsBetter,
}

impl MetricDirection {
    pub fn for_metric(name: &str) -> Self {
        if name.starts_with("rmse") || name.starts_with("mae") || name.contains("popularity_rank") {
            MetricDirection::LowerIsBetter
        } else {
            MetricDirection::HigherIsBetter
        }
    }
}

/// Relative change of a treatment against a baseline, oriented so that a
/// positive `percent` is always the better outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentChange {
    pub baseline: f64,
    pub treatment: f64,
    pub direction: MetricDirection,
    pub percent: f64,
}

/// For lower-is-better metrics `percent = 100 (baseline - treatment) / baseline`;
/// for higher-is-better metrics the sign is flipped.
pub fn percent_change(
    baseline: f64,
    treatment: f64,
    direction: MetricDirection,
) -> Result<PercentChange, MetricsError> {
    if baseline == 0.0 {
        return Err(MetricsError::ZeroBaseline);
    }
    let reduction = 100.0 * (baseline - treatment) / baseline;
    let percent = match direction {
        MetricDirection::LowerIsBetter => reduction,
        MetricDirection::HigherIsBetter => -reduction,
    };
    Ok(PercentChange {
        baseline,
        treatment,
        direction,
        percent,
    })
}

impl fmt::Display for PercentChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = format!("{:.1}", self.percent.abs());
        if shown == "0.0" {
            return f.write_str("0.0%");
        }
        let word = match (self.direction, self.percent > 0.0) {
            (MetricDirection::LowerIsBetter, true) => "reduction",
            (MetricDirection::LowerIsBetter, false) => "increase",
            (MetricDirection::HigherIsBetter, true) => "improvement",
            (MetricDirection::HigherIsBetter, false) => "decline",
        };
        write!(f, "{shown}% {word}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_phrasings() {
        let rmse = percent_change(1.154, 1.014, MetricDirection::LowerIsBetter).unwrap();
        assert_eq!(rmse.to_string(), "12.1% reduction");
        let mrr = percent_change(0.061, 0.078, MetricDirection::HigherIsBetter).unwrap();
        assert_eq!(mrr.to_string(), "27.9% improvement");
    }

    #[test]
    fn identity_and_reverse() {
        let same = percent_change(0.7, 0.7, MetricDirection::HigherIsBetter).unwrap();
        assert_eq!(same.to_string(), "0.0%");
        let worse = percent_change(1.0, 1.1, MetricDirection::LowerIsBetter).unwrap();
        assert_eq!(worse.to_string(), "10.0% increase");
        let drop = percent_change(0.5, 0.4, MetricDirection::HigherIsBetter).unwrap();
        assert_eq!(drop.to_string(), "20.0% decline");
        assert_eq!(
            percent_change(0.0, 1.0, MetricDirection::LowerIsBetter),
            Err(MetricsError::ZeroBaseline)
        );
    }

    #[test]
    fn directions_by_name() {
        assert_eq!(
            MetricDirection::for_metric("rmse"),
            MetricDirection::LowerIsBetter
        );
        assert_eq!(
            MetricDirection::for_metric("ndcg@10"),
            MetricDirection::HigherIsBetter
        );
    }
}
