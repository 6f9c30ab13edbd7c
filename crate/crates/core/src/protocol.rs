//! Per-user leave-one-out splitting, temporal validation carve-out,
//! negative sampling for ranking, and the positive-only ranking test set.
//!
//! Everything here depends only on review metadata (ids, users, items,
//! dates, ratings), so aligned corpora that differ only in text produce
//! byte-identical plans.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, EventKey, ReviewRecord};
use crate::digest::{json_digest, rng_for};

pub const DEFAULT_NEGATIVES: usize = 99;
pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(
        "user `{user}` has only {eligible} never-interacted items, cannot draw {wanted} negatives"
    )]
    NotEnoughNegatives {
        user: String,
        eligible: usize,
        wanted: usize,
    },
    #[error("validation fraction {0} outside [0, 1)")]
    BadFraction(f64),
    #[error("review {0} referenced by the plan is not in the corpus")]
    UnknownReview(u64),
    #[error("plan has no negatives; run sample_negatives first")]
    NoNegatives,
    #[error("split plan: {0}")]
    Serde(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSplit {
    pub test: u64,
    /// Oldest first.
    pub validation: Vec<u64>,
    /// Oldest first.
    pub train: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negatives: Option<Vec<String>>,
}

/// Train/validation/test assignment for every user plus frozen negatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub master_seed: u64,
    pub users: BTreeMap<String, UserSplit>,
    /// Users left out because they had a single review.
    pub excluded_users: Vec<String>,
}

impl SplitPlan {
    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        json_digest(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ProtocolError> {
        serde_json::from_str(s).map_err(|e| ProtocolError::Serde(e.to_string()))
    }

    pub fn train_ids(&self) -> BTreeSet<u64> {
        self.users
            .values()
            .flat_map(|u| u.train.iter().copied())
            .collect()
    }

    pub fn validation_ids(&self) -> BTreeSet<u64> {
        self.users
            .values()
            .flat_map(|u| u.validation.iter().copied())
            .collect()
    }

    pub fn test_ids(&self) -> BTreeSet<u64> {
        self.users.values().map(|u| u.test).collect()
    }
}

fn reviews_by_user(c: &Corpus) -> BTreeMap<&str, Vec<&ReviewRecord>> {
    let mut by_user: BTreeMap<&str, Vec<&ReviewRecord>> = BTreeMap::new();
    for r in c.records() {
        by_user.entry(r.user_id.as_str()).or_default().push(r);
    }
    for reviews in by_user.values_mut() {
        reviews.sort_by_key(|r| r.event_key());
    }
    by_user
}

/// Hold out each user's latest review (by date, then review id) as test;
/// everything earlier starts out as training.
pub fn leave_one_out_split(c: &Corpus, master_seed: u64) -> SplitPlan {
    let mut users = BTreeMap::new();
    let mut excluded_users = Vec::new();
    for (user, reviews) in reviews_by_user(c) {
        if reviews.len() < 2 {
            log::warn!("user `{user}` has a single review and is excluded from the split");
            excluded_users.push(user.to_string());
            continue;
        }
        let (test, rest) = reviews.split_last().unwrap();
        users.insert(
            user.to_string(),
            UserSplit {
                test: test.review_id,
                validation: Vec::new(),
                train: rest.iter().map(|r| r.review_id).collect(),
                negatives: None,
            },
        );
    }
    SplitPlan {
        master_seed,
        users,
        excluded_users,
    }
}

/// Number of validation reviews for a user with `n` non-test reviews.
pub fn validation_count(n: usize, fraction: f64) -> usize {
    if n < 2 || fraction <= 0.0 {
        return 0;
    }
    // Guard against 0.1 * 30 = 3.0000000000000004 rounding up to 4.
    let raw = (fraction * n as f64 - 1e-9).ceil() as usize;
    raw.clamp(1, n - 1)
}

/// Move the latest `ceil(fraction * n)` non-test reviews of each user into
/// validation (at least one when `n >= 2`, always leaving one for training).
pub fn carve_validation(
    plan: &SplitPlan,
    c: &Corpus,
    fraction: f64,
) -> Result<SplitPlan, ProtocolError> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(ProtocolError::BadFraction(fraction));
    }
    let mut out = plan.clone();
    for split in out.users.values_mut() {
        let mut pool: Vec<u64> = split
            .train
            .iter()
            .chain(&split.validation)
            .copied()
            .collect();
        let mut keys = Vec::with_capacity(pool.len());
        for id in &pool {
            keys.push(
                c.get(*id)
                    .ok_or(ProtocolError::UnknownReview(*id))?
                    .event_key(),
            );
        }
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by_key(|&i| keys[i]);
        pool = order.into_iter().map(|i| pool[i]).collect();
        let v = validation_count(pool.len(), fraction);
        let cut = pool.len() - v;
        split.validation = pool[cut..].to_vec();
        split.train = pool[..cut].to_vec();
    }
    Ok(out)
}

/// Draw `n` distinct never-interacted items per user, uniformly without
/// replacement from the corpus catalog. Each user's stream is keyed by the
/// master seed and the user id alone.
pub fn sample_negatives(
    plan: &SplitPlan,
    c: &Corpus,
    n: usize,
) -> Result<SplitPlan, ProtocolError> {
    let catalog: Vec<&str> = c.item_ids().into_iter().collect();
    let mut touched: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for r in c.records() {
        touched
            .entry(r.user_id.as_str())
            .or_default()
            .insert(r.item_id.as_str());
    }
    let mut out = plan.clone();
    for (user, split) in out.users.iter_mut() {
        let seen = touched.get(user.as_str());
        let eligible: Vec<&str> = catalog
            .iter()
            .copied()
            .filter(|i| !seen.is_some_and(|s| s.contains(i)))
            .collect();
        if eligible.len() < n {
            return Err(ProtocolError::NotEnoughNegatives {
                user: user.clone(),
                eligible: eligible.len(),
                wanted: n,
            });
        }
        let mut rng = rng_for(plan.master_seed, &["negatives", user]);
        let picks = index::sample(&mut rng, eligible.len(), n);
        split.negatives = Some(picks.iter().map(|i| eligible[i].to_string()).collect());
    }
    Ok(out)
}

/// One ranking query: the held-out positive and its sampled negatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingCase {
    pub user: String,
    pub test_review: u64,
    pub positive: String,
    pub negatives: Vec<String>,
    /// Time of the held-out event; candidate histories are cut here.
    pub at: EventKey,
}

impl RankingCase {
    /// Positive followed by the negatives.
    pub fn candidates(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.positive.as_str()).chain(self.negatives.iter().map(String::as_str))
    }
}

/// Ranking queries for users whose held-out review is five stars.
/// Rating metrics use every test review; this set is for ranking only.
pub fn build_ranking_testset(
    plan: &SplitPlan,
    c: &Corpus,
) -> Result<Vec<RankingCase>, ProtocolError> {
    let mut cases = Vec::new();
    for (user, split) in &plan.users {
        let r = c
            .get(split.test)
            .ok_or(ProtocolError::UnknownReview(split.test))?;
        if r.overall_rating != 5 {
            continue;
        }
        let negatives = split.negatives.clone().ok_or(ProtocolError::NoNegatives)?;
        cases.push(RankingCase {
            user: user.clone(),
            test_review: split.test,
            positive: r.item_id.clone(),
            negatives,
            at: r.event_key(),
        });
    }
    Ok(cases)
}

/// The complete protocol: leave-one-out, validation carve-out, negatives.
pub fn build_plan(
    c: &Corpus,
    master_seed: u64,
    validation_fraction: f64,
    negatives: usize,
) -> Result<SplitPlan, ProtocolError> {
    let plan = leave_one_out_split(c, master_seed);
    let plan = carve_validation(&plan, c, validation_fraction)?;
    sample_negatives(&plan, c, negatives)
}
