use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{mean, MetricsError};

/// Candidates ordered best first, with the 1-based rank of the positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedList {
    pub user: String,
    pub candidates: Vec<String>,
    pub positive_rank: usize,
}

impl RankedList {
    /// Sort by descending score; equal scores fall back to ascending item id.
    pub fn from_scores(
        user: &str,
        positive: &str,
        scored: &[(String, f64)],
    ) -> Result<Self, MetricsError> {
        let count = scored.iter().filter(|(item, _)| item == positive).count();
        if count != 1 {
            return Err(MetricsError::BadPositive {
                user: user.to_string(),
                item: positive.to_string(),
                count,
            });
        }
        if let Some(i) = scored.iter().position(|(_, s)| !s.is_finite()) {
            return Err(MetricsError::NonFinite(i));
        }
        let mut order: Vec<&(String, f64)> = scored.iter().collect();
        order.sort_by(
            |a, b| match b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal) {
                Ordering::Equal => a.0.cmp(&b.0),
                o => o,
            },
        );
        let candidates: Vec<String> = order.into_iter().map(|(item, _)| item.clone()).collect();
        let positive_rank = candidates.iter().position(|c| c == positive).unwrap() + 1;
        Ok(RankedList {
            user: user.to_string(),
            candidates,
            positive_rank,
        })
    }

    pub fn reciprocal_rank(&self, k: usize) -> f64 {
        if self.positive_rank <= k {
            1.0 / self.positive_rank as f64
        } else {
            0.0
        }
    }

    /// One relevant item, so the ideal DCG is 1.
    pub fn ndcg(&self, k: usize) -> f64 {
        if self.positive_rank <= k {
            1.0 / ((self.positive_rank + 1) as f64).log2()
        } else {
            0.0
        }
    }

    pub fn top(&self, k: usize) -> &[String] {
        &self.candidates[..k.min(self.candidates.len())]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEval {
    pub k: usize,
    pub mrr: f64,
    pub ndcg: f64,
    pub per_list_rr: Vec<f64>,
    pub per_list_ndcg: Vec<f64>,
}

pub fn ranking_metrics(lists: &[RankedList], k: usize) -> Result<RankingEval, MetricsError> {
    if k == 0 {
        return Err(MetricsError::ZeroK);
    }
    if lists.is_empty() {
        return Err(MetricsError::Empty);
    }
    let per_list_rr: Vec<f64> = lists.iter().map(|l| l.reciprocal_rank(k)).collect();
    let per_list_ndcg: Vec<f64> = lists.iter().map(|l| l.ndcg(k)).collect();
    Ok(RankingEval {
        k,
        mrr: mean(&per_list_rr),
        ndcg: mean(&per_list_ndcg),
        per_list_rr,
        per_list_ndcg,
    })
}
