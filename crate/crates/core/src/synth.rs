//! Planted-signal review data for end-to-end checks.
//!
//! Every user and hotel gets a latent topic vector. Ratings follow the
//! standardized topic affinity plus noise; each review embedding is a fixed random
//! projection of its author's and hotel's topics plus noise. Review
//! histories therefore carry information the identifiers alone only
//! reveal slowly, which is what the review-augmented model should exploit.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, HotelInfo, ReviewRecord, YearMonth};
use crate::digest::rng_for;
use crate::embeddings::EmbeddingStore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub users: usize,
    pub items: usize,
    pub reviews_per_user: usize,
    pub topic_dim: usize,
    /// Mean of every topic coordinate. A nonzero mean gives the affinity
    /// per-user and per-hotel main effects alongside the interaction.
    pub topic_mean: f64,
    pub embedding_dim: usize,
    /// Variance of the rating noise.
    pub rating_noise_var: f64,
    /// Variance of the per-review embedding noise.
    pub embedding_noise_var: f64,
    pub rating_center: f64,
    /// Std of a direction shared by every review vector, so the store has
    /// a nonzero mean the way sentence encoders do.
    pub offset_std: f64,
    pub regions: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 500,
            items: 200,
            reviews_per_user: 10,
            topic_dim: 8,
            topic_mean: 1.0,
            embedding_dim: 32,
            rating_noise_var: 0.25,
            embedding_noise_var: 0.1,
            rating_center: 3.5,
            offset_std: 1.0,
            regions: 12,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub corpus: Corpus,
    pub store: EmbeddingStore,
    pub user_topics: BTreeMap<String, Vec<f64>>,
    pub item_topics: BTreeMap<String, Vec<f64>>,
}

const POSITIVE: [&str; 8] = [
    "lovely",
    "spotless",
    "friendly",
    "comfortable",
    "excellent",
    "charming",
    "relaxing",
    "spacious",
];
const NEGATIVE: [&str; 8] = [
    "dirty",
    "noisy",
    "rude",
    "cramped",
    "overpriced",
    "smelly",
    "broken",
    "disappointing",
];
const NOUNS: [&str; 10] = [
    "room",
    "staff",
    "breakfast",
    "lobby",
    "pool",
    "bed",
    "view",
    "bathroom",
    "location",
    "service",
];

fn topic<R: Rng>(rng: &mut R, cfg: &SynthConfig) -> Vec<f64> {
    (0..cfg.topic_dim)
        .map(|_| cfg.topic_mean + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean and standard deviation of the raw affinity over every user-hotel pair.
fn affinity_moments(users: &[Vec<f64>], items: &[Vec<f64>]) -> (f64, f64) {
    let all: Vec<f64> = users
        .iter()
        .flat_map(|u| items.iter().map(|i| dot(u, i)))
        .collect();
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn sentence<R: Rng>(rng: &mut R, rating: u8, hotel: &str) -> String {
    let mut words = vec![format!("Stayed at {hotel}.")];
    for _ in 0..4 {
        let noun = NOUNS[rng.random_range(0..NOUNS.len())];
        let adj = match rating {
            4..=5 => POSITIVE[rng.random_range(0..POSITIVE.len())],
            1..=2 => NEGATIVE[rng.random_range(0..NEGATIVE.len())],
            _ if rng.random_bool(0.5) => POSITIVE[rng.random_range(0..POSITIVE.len())],
            _ => NEGATIVE[rng.random_range(0..NEGATIVE.len())],
        };
        words.push(format!("The {noun} was {adj}."));
    }
    words.join(" ")
}

pub fn user_id(u: usize) -> String {
    format!("user{u:04}")
}

pub fn item_id(i: usize) -> String {
    format!("hotel{i:03}")
}

/// Generate the corpus and its full-variance embedding store.
pub fn generate(cfg: &SynthConfig) -> SynthData {
    assert!(
        cfg.reviews_per_user <= cfg.items,
        "users cannot review a hotel twice"
    );
    let mut topics_rng = rng_for(cfg.seed, &["synth", "topics"]);
    let user_topics: Vec<Vec<f64>> = (0..cfg.users)
        .map(|_| topic(&mut topics_rng, cfg))
        .collect();
    let item_topics: Vec<Vec<f64>> = (0..cfg.items)
        .map(|_| topic(&mut topics_rng, cfg))
        .collect();

    let (aff_mean, aff_std) = affinity_moments(&user_topics, &item_topics);

    let mut proj_rng = rng_for(cfg.seed, &["synth", "projection"]);
    let width = 2 * cfg.topic_dim;
    let scale = 1.0 / (width as f64).sqrt();
    let projection: Vec<f64> = (0..cfg.embedding_dim * width)
        .map(|_| proj_rng.sample::<f64, _>(StandardNormal) * scale)
        .collect();
    let offset: Vec<f64> = (0..cfg.embedding_dim)
        .map(|_| proj_rng.sample::<f64, _>(StandardNormal) * cfg.offset_std)
        .collect();

    let mut meta_rng = rng_for(cfg.seed, &["synth", "hotels"]);
    let hotels: Vec<HotelInfo> = (0..cfg.items)
        .map(|i| HotelInfo {
            name: format!("Hotel {i:03}"),
            region: format!("Region {:02}", meta_rng.random_range(0..cfg.regions)),
            locality: format!("Town {:02}", meta_rng.random_range(0..40)),
            class: f64::from(meta_rng.random_range(1u8..=5)),
            link: None,
        })
        .collect();

    let rating_noise = Normal::new(0.0, cfg.rating_noise_var.sqrt()).expect("valid noise");
    let emb_noise = Normal::new(0.0, cfg.embedding_noise_var.sqrt()).expect("valid noise");
    let start = NaiveDate::from_ymd_opt(2008, 1, 1).unwrap();

    let mut records = Vec::with_capacity(cfg.users * cfg.reviews_per_user);
    let mut store = EmbeddingStore::new(cfg.embedding_dim, "synth-full").expect("positive dim");
    let mut review_rng = rng_for(cfg.seed, &["synth", "reviews"]);
    let mut next_id = 1u64;
    for (u, ut) in user_topics.iter().enumerate() {
        let picks = index::sample(&mut review_rng, cfg.items, cfg.reviews_per_user);
        for i in picks.iter() {
            let it = &item_topics[i];
            let raw = cfg.rating_center
                + (dot(ut, it) - aff_mean) / aff_std
                + rating_noise.sample(&mut review_rng);
            let rating = raw.round().clamp(1.0, 5.0) as u8;
            let date = start + Duration::days(review_rng.random_range(0..1800));
            let stay = date - Duration::days(review_rng.random_range(0..60));
            let mut aspects = BTreeMap::new();
            for name in ["service", "cleanliness", "value"] {
                let a = (f64::from(rating) + review_rng.random_range(-1.0..1.0))
                    .round()
                    .clamp(1.0, 5.0);
                aspects.insert(name.to_string(), a as u8);
            }
            let hotel = hotels[i].clone();
            let text = sentence(&mut review_rng, rating, &hotel.name);
            records.push(ReviewRecord {
                review_id: next_id,
                user_id: user_id(u),
                item_id: item_id(i),
                overall_rating: rating,
                aspect_ratings: aspects,
                review_date: date,
                stay_date: Some(YearMonth::from_date(stay)),
                helpful_votes: review_rng.random_range(0..6),
                text: Some(text),
                hotel,
            });

            let joint: Vec<f64> = ut.iter().chain(it).copied().collect();
            let vector: Vec<f32> = (0..cfg.embedding_dim)
                .map(|r| {
                    let row = &projection[r * width..(r + 1) * width];
                    let clean: f64 = row.iter().zip(&joint).map(|(a, b)| a * b).sum();
                    (offset[r] + clean + emb_noise.sample(&mut review_rng)) as f32
                })
                .collect();
            store.insert(next_id, vector).expect("finite vector");
            next_id += 1;
        }
    }
    let corpus = Corpus::new("synth", records).expect("synthetic records are valid");
    SynthData {
        corpus,
        store,
        user_topics: user_topics
            .into_iter()
            .enumerate()
            .map(|(u, t)| (user_id(u), t))
            .collect(),
        item_topics: item_topics
            .into_iter()
            .enumerate()
            .map(|(i, t)| (item_id(i), t))
            .collect(),
    }
}

/// The same reviews with every embedding pulled toward the store mean,
/// keeping `retain` of each vector's deviation.
pub fn homogenize(store: &EmbeddingStore, retain: f64) -> EmbeddingStore {
    store.shrink_toward_mean(retain, format!("{}-homogenized", store.source_tag()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            users: 40,
            items: 30,
            reviews_per_user: 6,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn shape_and_determinism() {
        let d = generate(&small());
        assert_eq!(d.corpus.len(), 240);
        assert_eq!(d.store.len(), 240);
        assert_eq!(d.store.dim(), 32);
        assert_eq!(d.corpus.user_ids().len(), 40);
        let again = generate(&small());
        assert_eq!(again.corpus.records(), d.corpus.records());
        assert_eq!(again.store.digest(), d.store.digest());
        let other = generate(&SynthConfig { seed: 7, ..small() });
        assert_ne!(other.store.digest(), d.store.digest());
    }

    #[test]
    fn ratings_track_affinity() {
        let d = generate(&SynthConfig {
            users: 200,
            ..small()
        });
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for r in d.corpus.records() {
            let (u, i) = (&d.user_topics[&r.user_id], &d.item_topics[&r.item_id]);
            xs.push(u.iter().zip(i).map(|(a, b)| a * b).sum::<f64>());
            ys.push(f64::from(r.overall_rating));
        }
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        assert!(cov / (vx * vy).sqrt() > 0.6);
    }

    #[test]
    fn homogenized_store_keeps_mean() {
        let d = generate(&small());
        let h = homogenize(&d.store, 0.3);
        for (a, b) in d.store.mean().iter().zip(h.mean()) {
            assert!((a - b).abs() < 1e-5);
        }
        assert_eq!(h.len(), d.store.len());
    }
}
