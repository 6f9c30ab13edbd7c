use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    emotion_distribution, internal_similarity, lexical_diversity, sentiment_polarity,
    EmotionDistribution, Lexicon, Polarity, Stopwords, TextstatsError, DEFAULT_THETA,
};
use crate::corpus::{align_corpora, Corpus};
use crate::digest::json_digest;
use crate::embeddings::EmbeddingStore;
use crate::metrics::{mean, paired_t_test, welch_t_test, SignificanceResult};

#[derive(Debug, Clone)]
pub struct TextstatsConfig {
    pub stopwords: Stopwords,
    pub lexicon: Lexicon,
    pub theta: f64,
}

impl Default for TextstatsConfig {
    fn default() -> Self {
        TextstatsConfig {
            stopwords: Stopwords::bundled(),
            lexicon: Lexicon::bundled(),
            theta: DEFAULT_THETA,
        }
    }
}

/// One corpus with its embeddings and any precomputed labels.
#[derive(Debug, Clone, Copy)]
pub struct CorpusSide<'a> {
    pub corpus: &'a Corpus,
    pub store: &'a EmbeddingStore,
    /// When present, replaces the lexicon scorer for this side.
    pub sentiment_labels: Option<&'a BTreeMap<u64, Polarity>>,
    pub emotion_labels: Option<&'a BTreeMap<u64, String>>,
}

impl<'a> CorpusSide<'a> {
    pub fn new(corpus: &'a Corpus, store: &'a EmbeddingStore) -> Self {
        CorpusSide {
            corpus,
            store,
            sentiment_labels: None,
            emotion_labels: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentSource {
    Lexicon,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextFeatureRow {
    pub review_id: u64,
    /// None when every token was a stopword.
    pub lexical_diversity: Option<f64>,
    pub pos: f64,
    pub neu: f64,
    pub neg: f64,
    pub dominant_emotion: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySummary {
    pub mean: f64,
    pub std: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub base_mean: f64,
    pub other_mean: f64,
    pub n: usize,
    /// Paired test of base minus other.
    pub test: SignificanceResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityComparison {
    pub base: SimilaritySummary,
    pub other: SimilaritySummary,
    /// Welch test of base against other; the pairs are not matched.
    pub test: SignificanceResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub base_label: String,
    pub other_label: String,
    pub sample_size: usize,
    pub sample_digest: String,
    pub sentiment_source: BTreeMap<String, SentimentSource>,
    pub internal_similarity: SimilarityComparison,
    pub lexical_diversity: PairedComparison,
    /// Review ids left out of the diversity test.
    pub diversity_skipped: Vec<u64>,
    pub sentiment: BTreeMap<String, PairedComparison>,
    pub emotions: Option<BTreeMap<String, EmotionDistribution>>,
    pub rows: BTreeMap<String, Vec<TextFeatureRow>>,
    #[serde(skip)]
    pub similarity_values: BTreeMap<String, Vec<f64>>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn feature_rows(
    side: &CorpusSide<'_>,
    ids: &BTreeSet<u64>,
    cfg: &TextstatsConfig,
) -> Result<Vec<TextFeatureRow>, TextstatsError> {
    let mut rows = Vec::with_capacity(ids.len());
    for &id in ids {
        let text = side
            .corpus
            .get(id)
            .and_then(|r| r.text.as_deref())
            .ok_or(TextstatsError::MissingText(id))?;
        let lexical_diversity = match lexical_diversity(text, &cfg.stopwords) {
            Ok(v) => Some(v),
            Err(TextstatsError::AllStopwords) => {
                log::warn!(
                    "{}: review {id} has only stopwords, diversity skipped",
                    side.corpus.label()
                );
                None
            }
            Err(e) => return Err(e),
        };
        let p = match side.sentiment_labels {
            Some(labels) => *labels.get(&id).ok_or(TextstatsError::MissingLabel(id))?,
            None => sentiment_polarity(text, &cfg.lexicon, cfg.theta)?,
        };
        let dominant_emotion = match side.emotion_labels {
            Some(labels) => Some(
                labels
                    .get(&id)
                    .ok_or(TextstatsError::MissingLabel(id))?
                    .clone(),
            ),
            None => None,
        };
        rows.push(TextFeatureRow {
            review_id: id,
            lexical_diversity,
            pos: p.pos,
            neu: p.neu,
            neg: p.neg,
            dominant_emotion,
        });
    }
    Ok(rows)
}

fn paired(a: &[f64], b: &[f64]) -> Result<PairedComparison, TextstatsError> {
    Ok(PairedComparison {
        base_mean: mean(a),
        other_mean: mean(b),
        n: a.len(),
        test: paired_t_test(a, b)?,
    })
}

/// Compare two aligned corpora on the same sampled review ids.
pub fn corpus_comparison_report(
    base: CorpusSide<'_>,
    other: CorpusSide<'_>,
    ids: &BTreeSet<u64>,
    cfg: &TextstatsConfig,
) -> Result<ComparisonReport, TextstatsError> {
    align_corpora(base.corpus, other.corpus)?;
    let (bl, ol) = (
        base.corpus.label().to_string(),
        other.corpus.label().to_string(),
    );

    let sim_b = internal_similarity(base.store, ids)?;
    let sim_o = internal_similarity(other.store, ids)?;
    let summary = |s: &super::SimilaritySample| SimilaritySummary {
        mean: s.mean,
        std: s.std,
        pairs: s.pairwise_cosines.len(),
    };
    let internal_similarity = SimilarityComparison {
        base: summary(&sim_b),
        other: summary(&sim_o),
        test: welch_t_test(&sim_b.pairwise_cosines, &sim_o.pairwise_cosines)?,
    };

    let rows_b = feature_rows(&base, ids, cfg)?;
    let rows_o = feature_rows(&other, ids, cfg)?;

    let mut div_b = Vec::new();
    let mut div_o = Vec::new();
    let mut diversity_skipped = Vec::new();
    for (b, o) in rows_b.iter().zip(&rows_o) {
        match (b.lexical_diversity, o.lexical_diversity) {
            (Some(x), Some(y)) => {
                div_b.push(x);
                div_o.push(y);
            }
            _ => diversity_skipped.push(b.review_id),
        }
    }

    let mut sentiment = BTreeMap::new();
    type Pick = fn(&TextFeatureRow) -> f64;
    let dims: [(&str, Pick); 3] = [("pos", |r| r.pos), ("neu", |r| r.neu), ("neg", |r| r.neg)];
    for (name, pick) in dims {
        let a: Vec<f64> = rows_b.iter().map(pick).collect();
        let b: Vec<f64> = rows_o.iter().map(pick).collect();
        sentiment.insert(name.to_string(), paired(&a, &b)?);
    }

    let emotions = match (base.emotion_labels, other.emotion_labels) {
        (Some(eb), Some(eo)) => {
            let mut m = BTreeMap::new();
            m.insert(bl.clone(), emotion_distribution(eb, ids)?);
            m.insert(ol.clone(), emotion_distribution(eo, ids)?);
            Some(m)
        }
        _ => None,
    };

    let source = |s: &CorpusSide<'_>| {
        if s.sentiment_labels.is_some() {
            SentimentSource::External
        } else {
            SentimentSource::Lexicon
        }
    };

    Ok(ComparisonReport {
        sample_size: ids.len(),
        sample_digest: json_digest(ids),
        sentiment_source: [(bl.clone(), source(&base)), (ol.clone(), source(&other))].into(),
        internal_similarity,
        lexical_diversity: paired(&div_b, &div_o)?,
        diversity_skipped,
        sentiment,
        emotions,
        rows: [(bl.clone(), rows_b), (ol.clone(), rows_o)].into(),
        similarity_values: [
            (bl.clone(), sim_b.pairwise_cosines),
            (ol.clone(), sim_o.pairwise_cosines),
        ]
        .into(),
        base_label: bl,
        other_label: ol,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `features.csv` (one row per review per corpus) and `similarity.csv`
/// (one row per pairwise cosine) for external plotting.
pub fn write_csv_series(report: &ComparisonReport, dir: &Path) -> Result<(), TextstatsError> {
    fs::create_dir_all(dir)?;
    let mut features =
        String::from("corpus,review_id,lexical_diversity,pos,neu,neg,dominant_emotion\n");
    for (label, rows) in &report.rows {
        for r in rows {
            let div = r
                .lexical_diversity
                .map(|d| d.to_string())
                .unwrap_or_default();
            let emo = r.dominant_emotion.as_deref().unwrap_or("");
            let _ = writeln!(
                features,
                "{},{},{div},{},{},{},{emo}",
                csv_field(label),
                r.review_id,
                r.pos,
                r.neu,
                r.neg
            );
        }
    }
    fs::write(dir.join("features.csv"), features)?;
    let mut sim = String::from("corpus,cosine\n");
    for (label, values) in &report.similarity_values {
        for v in values {
            let _ = writeln!(sim, "{},{v}", csv_field(label));
        }
    }
    fs::write(dir.join("similarity.csv"), sim)?;
    Ok(())
}
