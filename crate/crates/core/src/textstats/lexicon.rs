use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TextstatsError;
use crate::text::{normalize_token, tokens};

pub const DEFAULT_THETA: f64 = 0.5;

const BUNDLED_STOPWORDS: &str = include_str!("../../assets/stopwords.txt");
const BUNDLED_LEXICON: &str = include_str!("../../assets/lexicon.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// One word per line; blank lines and `#` comments ignored.
    pub fn parse(s: &str) -> Self {
        Stopwords(
            s.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(normalize_token)
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    pub fn bundled() -> Self {
        Stopwords::parse(BUNDLED_STOPWORDS)
    }

    pub fn none() -> Self {
        Stopwords(BTreeSet::new())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::bundled()
    }
}

pub fn load_stopwords(path: &Path) -> Result<Stopwords, TextstatsError> {
    Ok(Stopwords::parse(&fs::read_to_string(path)?))
}

/// Distinct over total tokens once stopwords are dropped.
pub fn lexical_diversity(text: &str, stopwords: &Stopwords) -> Result<f64, TextstatsError> {
    if text.trim().is_empty() {
        return Err(TextstatsError::EmptyText);
    }
    let kept: Vec<String> = tokens(text).filter(|t| !stopwords.contains(t)).collect();
    if kept.is_empty() {
        return Err(TextstatsError::AllStopwords);
    }
    let distinct: BTreeSet<&str> = kept.iter().map(String::as_str).collect();
    Ok(distinct.len() as f64 / kept.len() as f64)
}

/// Token to valence, read from `token<TAB>valence` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon(BTreeMap<String, f64>);

impl Lexicon {
    pub fn parse(s: &str, origin: &str) -> Result<Self, TextstatsError> {
        let mut map = BTreeMap::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| TextstatsError::Parse {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let (token, valence) = line
                .split_once('\t')
                .ok_or_else(|| err("expected token<TAB>valence".into()))?;
            let v: f64 = valence
                .trim()
                .parse()
                .map_err(|e| err(format!("bad valence `{valence}`: {e}")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite valence `{valence}`")));
            }
            map.insert(normalize_token(token), v);
        }
        Ok(Lexicon(map))
    }

    pub fn bundled() -> Self {
        Lexicon::parse(BUNDLED_LEXICON, "bundled lexicon").expect("bundled lexicon parses")
    }

    pub fn load(path: &Path) -> Result<Self, TextstatsError> {
        Lexicon::parse(&fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Lexicon(pairs.into_iter().map(|(t, v)| (t.to_string(), v)).collect())
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.0.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shares of positive, neutral and negative tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polarity {
    pub pos: f64,
    pub neu: f64,
    pub neg: f64,
}

/// Tokens at or above `theta` count positive, at or below `-theta`
/// negative, everything else (including unknown tokens) neutral.
pub fn sentiment_polarity(
    text: &str,
    lexicon: &Lexicon,
    theta: f64,
) -> Result<Polarity, TextstatsError> {
    let (mut pos, mut neg, mut total) = (0usize, 0usize, 0usize);
    for t in tokens(text) {
        total += 1;
        match lexicon.valence(&t) {
            Some(v) if v >= theta => pos += 1,
            Some(v) if v <= -theta => neg += 1,
            _ => {}
        }
    }
    if total == 0 {
        return Err(TextstatsError::EmptyText);
    }
    let n = total as f64;
    let (p, q) = (pos as f64 / n, neg as f64 / n);
    Ok(Polarity {
        pos: p,
        neu: (total - pos - neg) as f64 / n,
        neg: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diversity_hand_counts() {
        let none = Stopwords::none();
        assert_eq!(
            lexical_diversity("lovely lovely ocean view", &none).unwrap(),
            0.75
        );
        assert_eq!(
            lexical_diversity("Quiet, clean rooms!", &none).unwrap(),
            1.0
        );
        let sw = Stopwords::bundled();
        assert_eq!(sw.len(), 100);
        // "the" and "and" drop out: rooms, clean, rooms.
        assert!(
            (lexical_diversity("The rooms and the clean rooms", &sw).unwrap() - 2.0 / 3.0).abs()
                < 1e-15
        );
        assert!(matches!(
            lexical_diversity("the and of", &sw),
            Err(TextstatsError::AllStopwords)
        ));
        assert!(matches!(
            lexical_diversity("  ", &sw),
            Err(TextstatsError::EmptyText)
        ));
    }

    #[test]
    fn polarity_example() {
        let lex = Lexicon::from_pairs([("great", 3.0), ("bad", -2.0)]);
        let p = sentiment_polarity("great location but bad service", &lex, 0.5).unwrap();
        assert_eq!((p.pos, p.neu, p.neg), (0.2, 0.6, 0.2));
        let p = sentiment_polarity("a room with a view", &lex, 0.5).unwrap();
        assert_eq!((p.pos, p.neu, p.neg), (0.0, 1.0, 0.0));
        let weak = Lexicon::from_pairs([("fine", 0.4)]);
        let p = sentiment_polarity("fine", &weak, 0.5).unwrap();
        assert_eq!(p.neu, 1.0);
        assert!(sentiment_polarity("...", &lex, 0.5).is_err());
    }

    #[test]
    fn lexicon_file_format() {
        let lex = Lexicon::parse("# comment\nGreat\t3.1\n\nbad\t-2.5\r\n", "x").unwrap();
        assert_eq!(lex.valence("great"), Some(3.1));
        assert_eq!(lex.valence("bad"), Some(-2.5));
        let err = Lexicon::parse("ok 1.0\n", "lex.tsv").unwrap_err();
        assert!(err.to_string().starts_with("lex.tsv:1:"));
        assert!(Lexicon::bundled().len() > 40);
    }

    proptest! {
        #[test]
        fn shares_sum_to_one(words in proptest::collection::vec("[a-z]{1,8}|great|bad|awful|lovely", 1..40)) {
            let text = words.join(" ");
            let p = sentiment_polarity(&text, &Lexicon::bundled(), DEFAULT_THETA).unwrap();
            prop_assert!((p.pos + p.neu + p.neg - 1.0).abs() < 1e-9);
        }

        #[test]
        fn repetition_scales_diversity(words in proptest::collection::vec("[a-z]{3,8}", 1..30), m in 1usize..5) {
            let none = Stopwords::none();
            let text = words.join(" ");
            let once = lexical_diversity(&text, &none).unwrap();
            let repeated = vec![text.as_str(); m].join(" ");
            let many = lexical_diversity(&repeated, &none).unwrap();
            prop_assert!((many - once / m as f64).abs() < 1e-12);
        }
    }
}
