//! Descriptive comparison of review corpora: how alike the reviews in one
//! corpus are to each other, how varied their vocabulary is, how their
//! sentiment splits, and which emotions dominate.

mod labels;
mod lexicon;
mod report;

use std::collections::BTreeSet;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::digest::rng_for;
use crate::embeddings::{EmbeddingStore, StoreError};
use crate::metrics::MetricsError;

pub use labels::{
    emotion_distribution, load_emotion_labels, load_sentiment_labels, parse_emotion_labels,
    parse_sentiment_labels, EmotionDistribution, EMOTION_LABELS,
};
pub use lexicon::{
    lexical_diversity, load_stopwords, sentiment_polarity, Lexicon, Polarity, Stopwords,
    DEFAULT_THETA,
};
pub use report::{
    corpus_comparison_report, write_csv_series, ComparisonReport, CorpusSide, PairedComparison,
    SentimentSource, SimilarityComparison, SimilaritySummary, TextFeatureRow, TextstatsConfig,
};

#[derive(Debug, Error)]
pub enum TextstatsError {
    #[error("sample of {wanted} from a corpus of {available}")]
    SampleTooLarge { wanted: usize, available: usize },
    #[error("need at least 2 vectors for pairwise similarity, got {0}")]
    TooFewVectors(usize),
    #[error("review {0} has a zero embedding")]
    ZeroVector(u64),
    #[error("review {0} has no text")]
    MissingText(u64),
    #[error("text is empty")]
    EmptyText,
    #[error("no tokens left after stopword removal")]
    AllStopwords,
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("unknown emotion label `{label}` for review {review_id}")]
    UnknownEmotion { review_id: u64, label: String },
    #[error("review {0} missing from label file")]
    MissingLabel(u64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

/// Seeded uniform sample of review ids without replacement. Aligned
/// corpora share ids, so the same call picks the same reviews on both.
pub fn sample_reviews(c: &Corpus, n: usize, seed: u64) -> Result<BTreeSet<u64>, TextstatsError> {
    let ids: Vec<u64> = c.review_ids().into_iter().collect();
    if n > ids.len() {
        return Err(TextstatsError::SampleTooLarge {
            wanted: n,
            available: ids.len(),
        });
    }
    let mut rng = rng_for(seed, &["textstats-sample"]);
    Ok(index::sample(&mut rng, ids.len(), n)
        .iter()
        .map(|i| ids[i])
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySample {
    pub review_ids: Vec<u64>,
    /// Pairs (i, j) with i < j in ascending id order, row by row.
    pub pairwise_cosines: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Cosine similarity over every unique pair of the given reviews.
pub fn internal_similarity(
    store: &EmbeddingStore,
    ids: &BTreeSet<u64>,
) -> Result<SimilaritySample, TextstatsError> {
    if ids.len() < 2 {
        return Err(TextstatsError::TooFewVectors(ids.len()));
    }
    let mut unit: Vec<Vec<f64>> = Vec::with_capacity(ids.len());
    for &id in ids {
        let v: Vec<f64> = store.require(id)?.iter().map(|&x| f64::from(x)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(TextstatsError::ZeroVector(id));
        }
        unit.push(v.into_iter().map(|x| x / norm).collect());
    }
    let n = unit.len();
    let mut cos = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let c: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
            cos.push(c.clamp(-1.0, 1.0));
        }
    }
    let mean = crate::metrics::mean(&cos);
    let var = cos.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / cos.len() as f64;
    Ok(SimilaritySample {
        review_ids: ids.iter().copied().collect(),
        pairwise_cosines: cos,
        mean,
        std: var.sqrt(),
    })
}
