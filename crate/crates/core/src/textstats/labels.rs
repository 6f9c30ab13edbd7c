use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Polarity, TextstatsError};

/// The 28 categories a dominant-emotion label may take.
pub const EMOTION_LABELS: [&str; 28] = [
    "admiration",
    "amusement",
    "anger",
    "annoyance",
    "approval",
    "caring",
    "confusion",
    "curiosity",
    "desire",
    "disappointment",
    "disapproval",
    "disgust",
    "embarrassment",
    "excitement",
    "fear",
    "gratitude",
    "grief",
    "joy",
    "love",
    "nervousness",
    "optimism",
    "pride",
    "realization",
    "relief",
    "remorse",
    "sadness",
    "surprise",
    "neutral",
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmotionRow {
    review_id: u64,
    dominant_emotion: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SentimentRow {
    review_id: u64,
    pos: f64,
    neu: f64,
    neg: f64,
}

fn rows<T: for<'de> Deserialize<'de>>(
    s: &str,
    origin: &str,
) -> Result<Vec<(usize, T)>, TextstatsError> {
    let mut out = Vec::new();
    for (i, line) in s.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(line).map_err(|e| TextstatsError::Parse {
            path: origin.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, row));
    }
    Ok(out)
}

fn duplicate(origin: &str, line: usize, id: u64) -> TextstatsError {
    TextstatsError::Parse {
        path: origin.to_string(),
        line,
        message: format!("duplicate review_id {id}"),
    }
}

/// JSONL rows `{"review_id": .., "dominant_emotion": ..}`.
pub fn parse_emotion_labels(
    s: &str,
    origin: &str,
) -> Result<BTreeMap<u64, String>, TextstatsError> {
    let known: BTreeSet<&str> = EMOTION_LABELS.into_iter().collect();
    let mut out = BTreeMap::new();
    for (line, row) in rows::<EmotionRow>(s, origin)? {
        if !known.contains(row.dominant_emotion.as_str()) {
            return Err(TextstatsError::UnknownEmotion {
                review_id: row.review_id,
                label: row.dominant_emotion,
            });
        }
        if out.insert(row.review_id, row.dominant_emotion).is_some() {
            return Err(duplicate(origin, line, row.review_id));
        }
    }
    Ok(out)
}

/// JSONL rows `{"review_id": .., "pos": .., "neu": .., "neg": ..}`, each
/// triple non-negative and summing to 1 within 1e-6.
pub fn parse_sentiment_labels(
    s: &str,
    origin: &str,
) -> Result<BTreeMap<u64, Polarity>, TextstatsError> {
    let mut out = BTreeMap::new();
    for (line, row) in rows::<SentimentRow>(s, origin)? {
        let parts = [row.pos, row.neu, row.neg];
        let sum: f64 = parts.iter().sum();
        if parts.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-6 {
            return Err(TextstatsError::Parse {
                path: origin.to_string(),
                line,
                message: format!("polarity shares {parts:?} must be non-negative and sum to 1"),
            });
        }
        let p = Polarity {
            pos: row.pos,
            neu: row.neu,
            neg: row.neg,
        };
        if out.insert(row.review_id, p).is_some() {
            return Err(duplicate(origin, line, row.review_id));
        }
    }
    Ok(out)
}

pub fn load_emotion_labels(path: &Path) -> Result<BTreeMap<u64, String>, TextstatsError> {
    parse_emotion_labels(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn load_sentiment_labels(path: &Path) -> Result<BTreeMap<u64, Polarity>, TextstatsError> {
    parse_sentiment_labels(&fs::read_to_string(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionDistribution {
    pub counts: BTreeMap<String, usize>,
    /// Relative frequency of each observed category.
    pub histogram: BTreeMap<String, f64>,
    /// Number of categories with nonzero frequency.
    pub categories: usize,
}

pub fn emotion_distribution(
    labels: &BTreeMap<u64, String>,
    ids: &BTreeSet<u64>,
) -> Result<EmotionDistribution, TextstatsError> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for id in ids {
        let label = labels.get(id).ok_or(TextstatsError::MissingLabel(*id))?;
        *counts.entry(label.clone()).or_default() += 1;
    }
    let n = ids.len() as f64;
    let histogram = counts
        .iter()
        .map(|(k, &c)| (k.clone(), c as f64 / n))
        .collect();
    Ok(EmotionDistribution {
        categories: counts.len(),
        counts,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_eight_distinct_labels() {
        let set: BTreeSet<_> = EMOTION_LABELS.iter().collect();
        assert_eq!(set.len(), 28);
    }

    #[test]
    fn distribution_counts() {
        let labels = parse_emotion_labels(
            r#"{"review_id": 1, "dominant_emotion": "joy"}
{"review_id": 2, "dominant_emotion": "anger"}

{"review_id": 3, "dominant_emotion": "joy"}"#,
            "x",
        )
        .unwrap();
        let d = emotion_distribution(&labels, &[1, 2, 3].into()).unwrap();
        assert_eq!(d.categories, 2);
        assert!((d.histogram["joy"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.histogram["anger"] - 1.0 / 3.0).abs() < 1e-15);
        let one = emotion_distribution(&labels, &[2].into()).unwrap();
        assert_eq!((one.categories, one.histogram["anger"]), (1, 1.0));
        assert!(matches!(
            emotion_distribution(&labels, &[9].into()),
            Err(TextstatsError::MissingLabel(9))
        ));
    }

    #[test]
    fn rejects_bad_rows() {
        let e = parse_emotion_labels(r#"{"review_id": 1, "dominant_emotion": "smug"}"#, "x")
            .unwrap_err();
        assert!(matches!(
            e,
            TextstatsError::UnknownEmotion { review_id: 1, .. }
        ));
        let dup = "{\"review_id\": 1, \"dominant_emotion\": \"joy\"}\n{\"review_id\": 1, \"dominant_emotion\": \"joy\"}";
        assert!(matches!(
            parse_emotion_labels(dup, "x"),
            Err(TextstatsError::Parse { line: 2, .. })
        ));
        let s = r#"{"review_id": 4, "pos": 0.5, "neu": 0.4, "neg": 0.2}"#;
        assert!(parse_sentiment_labels(s, "x").is_err());
        let ok = r#"{"review_id": 4, "pos": 0.5, "neu": 0.3, "neg": 0.2}"#;
        assert_eq!(parse_sentiment_labels(ok, "x").unwrap()[&4].pos, 0.5);
    }
}
