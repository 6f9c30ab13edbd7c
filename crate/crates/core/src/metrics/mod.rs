//! Rating error, top-k ranking quality, business-facing aggregates over
//! recommended hotels, percent-change phrasing, and significance tests.

mod business;
mod change;
mod ranking;
mod rating;
mod report;
mod significance;

use thiserror::Error;

pub use business::{business_metrics, BusinessEval, ItemCatalog, ItemStats, PerUserBusiness};
pub use change::{percent_change, MetricDirection, PercentChange};
pub use ranking::{ranking_metrics, RankedList, RankingEval};
pub use rating::{rating_metrics, RatingEval};
pub use report::{compare_entries, MetricEntry, MetricsReport, PerInstance};
pub use significance::{paired_t_test, stars, welch_t_test, SignificanceResult};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no instances to evaluate")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("prediction {value} at index {index} outside [1, 5]")]
    OutOfRange { index: usize, value: f64 },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("k must be positive")]
    ZeroK,
    #[error("positive item `{item}` appears {count} times in the candidates for `{user}`")]
    BadPositive {
        user: String,
        item: String,
        count: usize,
    },
    #[error("item `{0}` has no catalog metadata")]
    UnknownItem(String),
    #[error("percent change from a zero baseline")]
    ZeroBaseline,
    #[error("metric `{0}` missing from report")]
    MissingMetric(String),
    #[error("per-instance keys differ between reports for `{0}`")]
    KeyMismatch(String),
}

/// Correctly rounded sum of finite values (Shewchuk's exact partials, as in
/// Python's `math.fsum`). The result is independent of input order, so
/// every aggregate is the exact mean rounded once by the final division.
pub(crate) fn exact_sum(xs: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &x in xs {
        let mut x = x;
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut hi) = partials.pop() else {
        return 0.0;
    };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // Round half to even across the remaining partials.
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    exact_sum(xs) / xs.len() as f64
}

/// Sample variance (n - 1 denominator), two-pass.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    exact_sum(&sq) / (xs.len() as f64 - 1.0)
}
