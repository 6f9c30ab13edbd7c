use serde::{Deserialize, Serialize};

use super::{ExperimentError, InstanceSet};
use crate::embeddings::EmbeddingStore;
use crate::metrics::{
    business_metrics, ranking_metrics, rating_metrics, ItemCatalog, MetricsReport, PerInstance,
    RankedList,
};
use crate::model::{clamp_rating, TrainedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub ranking_ks: Vec<usize>,
    pub business_ks: Vec<usize>,
    pub emit_popularity_rank: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            ranking_ks: vec![3, 5, 10, 20],
            business_ks: vec![10],
            emit_popularity_rank: false,
        }
    }
}

/// Score the test and ranking sets with `model`, looking history vectors
/// up in `store`, and collect every metric family into one report.
///
/// Rating metrics use clamped predictions; ranking uses raw scores so that
/// clamping cannot create ties.
pub fn evaluate_model(
    model: &TrainedModel,
    store: Option<&EmbeddingStore>,
    set: &InstanceSet,
    catalog: &ItemCatalog,
    split_digest: &str,
    opts: &EvalOptions,
) -> Result<MetricsReport, ExperimentError> {
    let mut report = MetricsReport::new(split_digest);

    let preds: Vec<f64> = model
        .predict_many(&set.test, store)?
        .into_iter()
        .map(clamp_rating)
        .collect();
    let targets: Vec<f64> = set.test.iter().map(|i| i.rating).collect();
    let keys: Vec<String> = set.test.iter().map(|i| i.review_id.to_string()).collect();
    let rating = rating_metrics(&preds, &targets)?;
    let per = |values: Vec<f64>| PerInstance {
        keys: keys.clone(),
        values,
    };
    report.insert("rmse", rating.rmse, Some(per(rating.squared_errors)));
    report.insert("mae", rating.mae, Some(per(rating.abs_errors)));

    if set.ranking.is_empty() {
        log::warn!("no five-star test reviews; ranking and business metrics skipped");
        return Ok(report);
    }
    let mut lists = Vec::with_capacity(set.ranking.len());
    for q in &set.ranking {
        let instances: Vec<_> = q.candidates.iter().map(|(_, inst)| inst.clone()).collect();
        let scores = model.predict_many(&instances, store)?;
        let scored: Vec<(String, f64)> = q
            .candidates
            .iter()
            .map(|(item, _)| item.clone())
            .zip(scores)
            .collect();
        lists.push(RankedList::from_scores(&q.user, &q.positive, &scored)?);
    }
    let users: Vec<String> = lists.iter().map(|l| l.user.clone()).collect();
    let by_user = |values: Vec<f64>| PerInstance {
        keys: users.clone(),
        values,
    };
    for &k in &opts.ranking_ks {
        let e = ranking_metrics(&lists, k)?;
        report.insert(&format!("mrr@{k}"), e.mrr, Some(by_user(e.per_list_rr)));
        report.insert(&format!("ndcg@{k}"), e.ndcg, Some(by_user(e.per_list_ndcg)));
    }
    for &k in &opts.business_ks {
        let tops: Vec<(String, Vec<String>)> = lists
            .iter()
            .map(|l| (l.user.clone(), l.top(k).to_vec()))
            .collect();
        let e = business_metrics(&tops, catalog, k)?;
        let p = e.per_user;
        let keyed = |values: Vec<f64>| PerInstance {
            keys: p.users.clone(),
            values,
        };
        report.insert(
            &format!("stars@{k}"),
            e.avg_stars,
            Some(keyed(p.stars.clone())),
        );
        report.insert(
            &format!("popularity@{k}"),
            e.avg_popularity,
            Some(keyed(p.popularity.clone())),
        );
        report.insert(
            &format!("helpfulness@{k}"),
            e.avg_helpfulness,
            Some(keyed(p.helpfulness.clone())),
        );
        report.insert(
            &format!("regional_spread@{k}"),
            e.avg_regional_spread,
            Some(keyed(p.regional_spread.clone())),
        );
        if opts.emit_popularity_rank {
            report.insert(
                &format!("popularity_rank@{k}"),
                e.avg_popularity_rank,
                Some(keyed(p.popularity_rank.clone())),
            );
        }
    }
    Ok(report)
}
