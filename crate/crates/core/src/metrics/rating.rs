use serde::{Deserialize, Serialize};

use super::{mean, MetricsError};

/// Per-instance errors plus their aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingEval {
    pub squared_errors: Vec<f64>,
    pub abs_errors: Vec<f64>,
    pub rmse: f64,
    pub mae: f64,
}

/// RMSE and MAE of clamped predictions against targets.
pub fn rating_metrics(predictions: &[f64], targets: &[f64]) -> Result<RatingEval, MetricsError> {
    if predictions.len() != targets.len() {
        return Err(MetricsError::LengthMismatch(
            predictions.len(),
            targets.len(),
        ));
    }
    if predictions.is_empty() {
        return Err(MetricsError::Empty);
    }
    for (index, &p) in predictions.iter().enumerate() {
        if !p.is_finite() {
            return Err(MetricsError::NonFinite(index));
        }
        if !(1.0..=5.0).contains(&p) {
            return Err(MetricsError::OutOfRange { index, value: p });
        }
    }
    if let Some(i) = targets.iter().position(|t| !t.is_finite()) {
        return Err(MetricsError::NonFinite(i));
    }
    let abs_errors: Vec<f64> = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).abs())
        .collect();
    let squared_errors: Vec<f64> = abs_errors.iter().map(|e| e * e).collect();
    Ok(RatingEval {
        rmse: mean(&squared_errors).sqrt(),
        mae: mean(&abs_errors),
        squared_errors,
        abs_errors,
    })
}
