use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{mean, MetricsError};
use crate::corpus::Corpus;

/// What the business metrics need to know about one hotel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemStats {
    pub class: f64,
    pub region: String,
    /// Number of training-period reviews.
    pub review_count: usize,
    /// 1 = most reviewed in the training period; ties by item id.
    pub popularity_rank: usize,
    /// Mean helpful votes over training-period reviews, 0 when there are none.
    pub avg_helpful: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemCatalog {
    items: BTreeMap<String, ItemStats>,
}

impl ItemCatalog {
    /// Hotel metadata comes from any review of the item; counts and votes
    /// only from reviews in `training_ids`.
    pub fn build(c: &Corpus, training_ids: &BTreeSet<u64>) -> Self {
        let mut meta: BTreeMap<&str, (f64, &str)> = BTreeMap::new();
        let mut votes: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for r in c.records() {
            meta.entry(&r.item_id)
                .or_insert((r.hotel.class, &r.hotel.region));
            let v = votes.entry(&r.item_id).or_default();
            if training_ids.contains(&r.review_id) {
                v.push(f64::from(r.helpful_votes));
            }
        }
        let mut by_count: Vec<(&str, usize)> = votes.iter().map(|(i, v)| (*i, v.len())).collect();
        by_count.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let ranks: BTreeMap<&str, usize> = by_count
            .iter()
            .enumerate()
            .map(|(r, (i, _))| (*i, r + 1))
            .collect();
        let items = meta
            .into_iter()
            .map(|(id, (class, region))| {
                let v = &votes[id];
                let stats = ItemStats {
                    class,
                    region: region.to_string(),
                    review_count: v.len(),
                    popularity_rank: ranks[id],
                    avg_helpful: if v.is_empty() { 0.0 } else { mean(v) },
                };
                (id.to_string(), stats)
            })
            .collect();
        ItemCatalog { items }
    }

    pub fn get(&self, item: &str) -> Option<&ItemStats> {
        self.items.get(item)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusinessEval {
    pub k: usize,
    pub users: usize,
    pub avg_stars: f64,
    /// Mean training review count of recommended hotels.
    pub avg_popularity: f64,
    /// Mean popularity rank of recommended hotels (lower is more popular).
    pub avg_popularity_rank: f64,
    pub avg_helpfulness: f64,
    pub avg_regional_spread: f64,
    pub per_user: PerUserBusiness,
}

/// The per-user values behind each average, in input order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerUserBusiness {
    pub users: Vec<String>,
    pub stars: Vec<f64>,
    pub popularity: Vec<f64>,
    pub popularity_rank: Vec<f64>,
    pub helpfulness: Vec<f64>,
    pub regional_spread: Vec<f64>,
}

/// Aggregates over each user's top-k list, averaged per user and then
/// across users. Lists longer than `k` are truncated.
pub fn business_metrics(
    topk_lists: &[(String, Vec<String>)],
    catalog: &ItemCatalog,
    k: usize,
) -> Result<BusinessEval, MetricsError> {
    if k == 0 {
        return Err(MetricsError::ZeroK);
    }
    let lists: Vec<(&String, &[String])> = topk_lists
        .iter()
        .map(|(user, items)| (user, &items[..k.min(items.len())]))
        .filter(|(_, items)| !items.is_empty())
        .collect();
    if lists.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut stars = Vec::with_capacity(lists.len());
    let mut popularity = Vec::with_capacity(lists.len());
    let mut rank = Vec::with_capacity(lists.len());
    let mut helpful = Vec::with_capacity(lists.len());
    let mut spread = Vec::with_capacity(lists.len());
    let mut users = Vec::with_capacity(lists.len());
    for (user, items) in lists {
        users.push(user.clone());
        let stats = items
            .iter()
            .map(|i| {
                catalog
                    .get(i)
                    .ok_or_else(|| MetricsError::UnknownItem(i.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let per =
            |f: &dyn Fn(&ItemStats) -> f64| mean(&stats.iter().map(|s| f(s)).collect::<Vec<_>>());
        stars.push(per(&|s| s.class));
        popularity.push(per(&|s| s.review_count as f64));
        rank.push(per(&|s| s.popularity_rank as f64));
        helpful.push(per(&|s| s.avg_helpful));
        let regions: BTreeSet<&str> = stats.iter().map(|s| s.region.as_str()).collect();
        spread.push(regions.len() as f64);
    }
    Ok(BusinessEval {
        k,
        users: stars.len(),
        avg_stars: mean(&stars),
        avg_popularity: mean(&popularity),
        avg_popularity_rank: mean(&rank),
        avg_helpfulness: mean(&helpful),
        avg_regional_spread: mean(&spread),
        per_user: PerUserBusiness {
            users,
            stars,
            popularity,
            popularity_rank: rank,
            helpfulness: helpful,
            regional_spread: spread,
        },
    })
}
