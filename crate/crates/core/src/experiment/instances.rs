use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::corpus::{Corpus, ReviewRecord};
use crate::digest::json_digest;
use crate::embeddings::{HistoryIndex, HistoryKey};
use crate::model::{Instance, Vocabulary};
use crate::protocol::{build_ranking_testset, SplitPlan};

/// The held-out positive and its negatives, each as a scoreable instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingQuery {
    pub user: String,
    pub positive: String,
    pub candidates: Vec<(String, Instance)>,
}

/// Everything a scenario trains and evaluates on. Only review ids are
/// stored, so one set serves every aligned corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSet {
    pub users: Vocabulary,
    pub items: Vocabulary,
    pub train: Vec<Instance>,
    pub validation: Vec<Instance>,
    pub test: Vec<Instance>,
    pub ranking: Vec<RankingQuery>,
}

impl InstanceSet {
    /// SHA-256 over every selected history; equal digests mean identical
    /// inputs apart from the vectors looked up at run time.
    pub fn selection_digest(&self) -> String {
        json_digest(self)
    }
}

struct Builder<'a> {
    users: &'a Vocabulary,
    items: &'a Vocabulary,
    k: usize,
}

impl Builder<'_> {
    fn instance(
        &self,
        index: &HistoryIndex,
        r: &ReviewRecord,
        item: &str,
        rating: f64,
    ) -> Instance {
        let at = r.event_key();
        Instance {
            review_id: r.review_id,
            user_row: self.users.row(&r.user_id),
            item_row: self.items.row(item),
            rating,
            user_history: index.select(HistoryKey::User(&r.user_id), at, self.k),
            item_history: index.select(HistoryKey::Item(item), at, self.k),
        }
    }

    fn full(&self, inst: &Instance) -> bool {
        inst.user_history.len() == self.k && inst.item_history.len() == self.k
    }
}

/// Materialize train, validation, test and ranking instances.
///
/// Training and validation histories draw on training reviews only. Test
/// and ranking histories may also use validation reviews, since those
/// precede the test event. Test reviews never appear in any history.
pub fn build_instances(
    c: &Corpus,
    plan: &SplitPlan,
    history_len: usize,
    drop_short_histories: bool,
) -> Result<InstanceSet, ExperimentError> {
    let lookup = |id: u64| {
        c.get(id)
            .ok_or_else(|| ExperimentError::Config(format!("split names missing review {id}")))
    };
    let train_ids = plan.train_ids();
    let valid_ids = plan.validation_ids();
    let mut train_records = Vec::with_capacity(train_ids.len());
    for &id in &train_ids {
        train_records.push(lookup(id)?);
    }
    let users = Vocabulary::new(train_records.iter().map(|r| r.user_id.as_str()));
    let items = Vocabulary::new(train_records.iter().map(|r| r.item_id.as_str()));
    let b = Builder {
        users: &users,
        items: &items,
        k: history_len,
    };

    let train_index = HistoryIndex::from_records(train_records.iter().copied());
    let mut known: Vec<&ReviewRecord> = train_records.clone();
    for &id in &valid_ids {
        known.push(lookup(id)?);
    }
    let known_index = HistoryIndex::from_records(known);

    let sorted = |ids: &BTreeSet<u64>| -> Result<Vec<&ReviewRecord>, ExperimentError> {
        let mut v = ids
            .iter()
            .map(|&id| lookup(id))
            .collect::<Result<Vec<_>, _>>()?;
        v.sort_by_key(|r| r.event_key());
        Ok(v)
    };
    let to_instances = |records: Vec<&ReviewRecord>| -> Vec<Instance> {
        let all: Vec<Instance> = records
            .into_iter()
            .map(|r| b.instance(&train_index, r, &r.item_id, f64::from(r.overall_rating)))
            .collect();
        if drop_short_histories {
            all.into_iter().filter(|i| b.full(i)).collect()
        } else {
            all
        }
    };
    let train = to_instances(sorted(&train_ids)?);
    let validation = to_instances(sorted(&valid_ids)?);
    let test = sorted(&plan.test_ids())?
        .into_iter()
        .map(|r| b.instance(&known_index, r, &r.item_id, f64::from(r.overall_rating)))
        .collect();

    let mut ranking = Vec::new();
    for case in build_ranking_testset(plan, c)? {
        let r = lookup(case.test_review)?;
        let candidates = case
            .candidates()
            .map(|item| {
                let rating = if item == case.positive {
                    f64::from(r.overall_rating)
                } else {
                    0.0
                };
                (item.to_string(), b.instance(&known_index, r, item, rating))
            })
            .collect();
        ranking.push(RankingQuery {
            user: case.user,
            positive: case.positive,
            candidates,
        });
    }

    Ok(InstanceSet {
        users,
        items,
        train,
        validation,
        test,
        ranking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::record;
    use crate::protocol::build_plan;

    fn corpus() -> Corpus {
        let mut records = Vec::new();
        let mut id = 0;
        for u in 0..4 {
            for (j, item) in ["a", "b", "c", "d", "e"].iter().enumerate() {
                id += 1;
                let rating = if j == 4 { 5 } else { 3 + (u % 2) as u8 };
                let date = format!("2010-{:02}-{:02}", j + 1, u + 1);
                records.push(record(id, &format!("u{u}"), item, rating, &date));
            }
        }
        for j in 0..6 {
            records.push(record(
                100 + j,
                &format!("solo{j}"),
                &format!("x{j}"),
                2,
                "2009-01-01",
            ));
        }
        Corpus::new("h", records).unwrap()
    }

    #[test]
    fn histories_respect_split_and_time() {
        let c = corpus();
        let plan = build_plan(&c, 1, 0.1, 5).unwrap();
        let set = build_instances(&c, &plan, 3, false).unwrap();
        let test_ids = plan.test_ids();
        let valid_ids = plan.validation_ids();
        for inst in set.train.iter().chain(&set.validation) {
            let at = c.get(inst.review_id).unwrap().event_key();
            for h in inst.user_history.iter().chain(&inst.item_history) {
                assert!(!test_ids.contains(h) && !valid_ids.contains(h));
                assert!(c.get(*h).unwrap().event_key() < at);
            }
        }
        for inst in &set.test {
            let at = c.get(inst.review_id).unwrap().event_key();
            assert_eq!(inst.user_history.len(), 3);
            for h in inst.user_history.iter().chain(&inst.item_history) {
                assert!(!test_ids.contains(h));
                assert!(c.get(*h).unwrap().event_key() < at);
            }
        }
        assert_eq!(set.test.len(), 4);
        assert_eq!(set.ranking.len(), 4);
        assert!(set.ranking.iter().all(|q| q.candidates.len() == 6));
    }

    #[test]
    fn unseen_items_map_to_reserved_row() {
        let c = corpus();
        let plan = build_plan(&c, 1, 0.1, 5).unwrap();
        let set = build_instances(&c, &plan, 3, false).unwrap();
        let unseen = set.items.len();
        let q = &set.ranking[0];
        let xs: Vec<_> = q
            .candidates
            .iter()
            .filter(|(i, _)| i.starts_with('x'))
            .collect();
        assert!(!xs.is_empty());
        for (_, inst) in xs {
            assert_eq!(inst.item_row, unseen);
        }
    }

    #[test]
    fn dropping_short_histories() {
        let c = corpus();
        let plan = build_plan(&c, 1, 0.1, 5).unwrap();
        let all = build_instances(&c, &plan, 2, false).unwrap();
        let kept = build_instances(&c, &plan, 2, true).unwrap();
        assert!(kept.train.len() < all.train.len());
        assert!(kept
            .train
            .iter()
            .all(|i| i.user_history.len() == 2 && i.item_history.len() == 2));
        assert_eq!(kept.test, all.test);
    }
}
