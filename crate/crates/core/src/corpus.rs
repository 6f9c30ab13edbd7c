//! Review records, corpus loading and validation, interaction filtering,
//! alignment of paired corpora, and text-level corpus statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::text;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("duplicate review_id {review_id} on lines {first_line} and {line}")]
    DuplicateLine {
        review_id: u64,
        first_line: usize,
        line: usize,
    },
    #[error("duplicate review_id {0}")]
    DuplicateId(u64),
    #[error("review {review_id}: {message}")]
    InvalidRecord { review_id: u64, message: String },
    #[error("corpus label must be nonempty")]
    EmptyLabel,
    #[error("review ids differ between corpora: only in base {only_in_base:?}, only in counterpart {only_in_counterpart:?}")]
    MissingIds {
        only_in_base: Vec<u64>,
        only_in_counterpart: Vec<u64>,
    },
    #[error("metadata mismatch at review_id {review_id}: field `{field}` differs")]
    MetadataMismatch { review_id: u64, field: &'static str },
    #[error("review {0} has no text")]
    MissingText(u64),
    #[error("corpus `{0}` is empty")]
    Empty(String),
}

/// Year and month of a hotel stay, written as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn from_date(d: NaiveDate) -> Self {
        YearMonth {
            year: d.year(),
            month: d.month(),
        }
    }
}

impl FromStr for YearMonth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| format!("stay_date `{s}` is not YYYY-MM"))?;
        let year: i32 = y
            .parse()
            .map_err(|_| format!("stay_date `{s}` has a bad year"))?;
        let month: u32 = m
            .parse()
            .map_err(|_| format!("stay_date `{s}` has a bad month"))?;
        if y.len() != 4 || m.len() != 2 || !(1..=12).contains(&month) {
            return Err(format!("stay_date `{s}` is not YYYY-MM"));
        }
        Ok(YearMonth { year, month })
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotelInfo {
    pub name: String,
    pub region: String,
    pub locality: String,
    pub class: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
}

/// One user–item interaction together with its review text and metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub review_id: u64,
    pub user_id: String,
    pub item_id: String,
    pub overall_rating: u8,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aspect_ratings: BTreeMap<String, u8>,
    pub review_date: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stay_date: Option<YearMonth>,
    #[serde(default)]
    pub helpful_votes: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub hotel: HotelInfo,
}

/// Temporal position of a review: date first, review id breaks same-day ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventKey {
    pub date: NaiveDate,
    pub review_id: u64,
}

impl ReviewRecord {
    pub fn event_key(&self) -> EventKey {
        EventKey {
            date: self.review_date,
            review_id: self.review_id,
        }
    }

    /// Checks rating ranges, hotel class and stay/review date ordering.
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=5).contains(&self.overall_rating) {
            return Err(format!(
                "overall_rating {} outside 1..=5",
                self.overall_rating
            ));
        }
        for (aspect, &r) in &self.aspect_ratings {
            if !(1..=5).contains(&r) {
                return Err(format!("aspect rating `{aspect}`={r} outside 1..=5"));
            }
        }
        if !(1.0..=5.0).contains(&self.hotel.class) {
            return Err(format!("hotel class {} outside [1, 5]", self.hotel.class));
        }
        if let Some(stay) = self.stay_date {
            let review = YearMonth {
                year: self.review_date.year(),
                month: self.review_date.month(),
            };
            if stay > review {
                return Err(format!(
                    "stay_date {stay} is after review_date {}",
                    self.review_date
                ));
            }
        }
        Ok(())
    }
}

// Wire shape used while loading, so that range errors can name the field
// instead of surfacing as opaque integer-overflow messages.
#[derive(Deserialize)]
struct RawRecord {
    review_id: u64,
    user_id: String,
    item_id: String,
    overall_rating: i64,
    #[serde(default)]
    aspect_ratings: BTreeMap<String, i64>,
    review_date: String,
    #[serde(default)]
    stay_date: Option<String>,
    #[serde(default)]
    helpful_votes: i64,
    #[serde(default)]
    text: Option<String>,
    hotel: HotelInfo,
}

fn rating_from(value: i64, what: &str) -> Result<u8, String> {
    if (1..=5).contains(&value) {
        Ok(value as u8)
    } else {
        Err(format!("{what} {value} outside 1..=5"))
    }
}

impl TryFrom<RawRecord> for ReviewRecord {
    type Error = String;

    fn try_from(raw: RawRecord) -> Result<Self, Self::Error> {
        let overall_rating = rating_from(raw.overall_rating, "overall_rating")?;
        let aspect_ratings = raw
            .aspect_ratings
            .into_iter()
            .map(|(k, v)| rating_from(v, &format!("aspect rating `{k}`")).map(|r| (k, r)))
            .collect::<Result<_, _>>()?;
        let review_date = NaiveDate::parse_from_str(&raw.review_date, "%Y-%m-%d")
            .map_err(|e| format!("review_date `{}`: {e}", raw.review_date))?;
        let stay_date = raw.stay_date.as_deref().map(str::parse).transpose()?;
        if raw.helpful_votes < 0 {
            return Err(format!("helpful_votes {} is negative", raw.helpful_votes));
        }
        let helpful_votes = u32::try_from(raw.helpful_votes)
            .map_err(|_| format!("helpful_votes {} too large", raw.helpful_votes))?;
        let record = ReviewRecord {
            review_id: raw.review_id,
            user_id: raw.user_id,
            item_id: raw.item_id,
            overall_rating,
            aspect_ratings,
            review_date,
            stay_date,
            helpful_votes,
            text: raw.text,
            hotel: raw.hotel,
        };
        record.validate()?;
        Ok(record)
    }
}

/// An immutable, validated collection of reviews under one label
/// (e.g. `human`, `user-centric`, `platform-neutral`).
#[derive(Debug, Clone)]
pub struct Corpus {
    label: String,
    records: Vec<ReviewRecord>,
    by_id: HashMap<u64, usize>,
}

impl Corpus {
    pub fn new(label: impl Into<String>, records: Vec<ReviewRecord>) -> Result<Self, CorpusError> {
        let label = label.into();
        if label.is_empty() {
            return Err(CorpusError::EmptyLabel);
        }
        let mut by_id = HashMap::with_capacity(records.len());
        for (pos, r) in records.iter().enumerate() {
            r.validate().map_err(|message| CorpusError::InvalidRecord {
                review_id: r.review_id,
                message,
            })?;
            if by_id.insert(r.review_id, pos).is_some() {
                return Err(CorpusError::DuplicateId(r.review_id));
            }
        }
        Ok(Corpus {
            label,
            records,
            by_id,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn records(&self) -> &[ReviewRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, review_id: u64) -> Option<&ReviewRecord> {
        self.by_id.get(&review_id).map(|&i| &self.records[i])
    }

    pub fn review_ids(&self) -> BTreeSet<u64> {
        self.records.iter().map(|r| r.review_id).collect()
    }

    pub fn user_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.user_id.as_str()).collect()
    }

    pub fn item_ids(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.item_id.as_str()).collect()
    }

    /// Sub-corpus of the records whose ids are in `keep`, preserving order.
    pub fn retain_ids(&self, keep: &BTreeSet<u64>) -> Corpus {
        let records = self
            .records
            .iter()
            .filter(|r| keep.contains(&r.review_id))
            .cloned()
            .collect();
        Corpus::new(self.label.clone(), records).expect("subset of a valid corpus is valid")
    }

    /// Same records under a different label.
    pub fn relabel(&self, label: impl Into<String>) -> Result<Corpus, CorpusError> {
        Corpus::new(label, self.records.clone())
    }

    /// Write the corpus as JSONL in record order.
    pub fn write_jsonl(&self, path: &Path) -> Result<(), CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        for r in &self.records {
            let line = serde_json::to_string(r).expect("records serialize");
            writeln!(out, "{line}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}

/// Load and validate a JSONL corpus. Blank lines are skipped; any malformed
/// line aborts with its 1-based line number.
pub fn load_corpus(path: &Path, label: &str) -> Result<Corpus, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    let mut seen: HashMap<u64, usize> = HashMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Line {
            line: lineno,
            message: e.to_string(),
        })?;
        let record = ReviewRecord::try_from(raw).map_err(|message| CorpusError::Line {
            line: lineno,
            message,
        })?;
        if let Some(&first_line) = seen.get(&record.review_id) {
            return Err(CorpusError::DuplicateLine {
                review_id: record.review_id,
                first_line,
                line: lineno,
            });
        }
        seen.insert(record.review_id, lineno);
        records.push(record);
    }
    Corpus::new(label, records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    /// Repeat the user and item passes until nothing more is removed.
    #[default]
    Fixpoint,
    /// One simultaneous pass over the original counts.
    SinglePass,
}

fn counts<'a>(
    records: impl Iterator<Item = &'a ReviewRecord>,
) -> (HashMap<&'a str, usize>, HashMap<&'a str, usize>) {
    let mut users = HashMap::new();
    let mut items = HashMap::new();
    for r in records {
        *users.entry(r.user_id.as_str()).or_insert(0) += 1;
        *items.entry(r.item_id.as_str()).or_insert(0) += 1;
    }
    (users, items)
}

/// Keep only reviews whose user and item each have at least `min_count`
/// reviews among the survivors.
pub fn filter_min_interactions(c: &Corpus, min_count: usize, mode: FilterMode) -> Corpus {
    assert!(min_count >= 1, "min_count must be at least 1");
    let mut alive: Vec<&ReviewRecord> = c.records.iter().collect();
    loop {
        let (users, items) = counts(alive.iter().copied());
        let before = alive.len();
        alive.retain(|r| {
            users[r.user_id.as_str()] >= min_count && items[r.item_id.as_str()] >= min_count
        });
        if mode == FilterMode::SinglePass || alive.len() == before {
            break;
        }
    }
    let keep = alive.iter().map(|r| r.review_id).collect();
    c.retain_ids(&keep)
}

/// Two corpora over the same interactions that differ only in review text.
#[derive(Debug, Clone)]
pub struct AlignedCorpora {
    pub base: Corpus,
    pub counterpart: Corpus,
}

fn first_metadata_difference(a: &ReviewRecord, b: &ReviewRecord) -> Option<&'static str> {
    if a.user_id != b.user_id {
        Some("user_id")
    } else if a.item_id != b.item_id {
        Some("item_id")
    } else if a.overall_rating != b.overall_rating {
        Some("overall_rating")
    } else if a.aspect_ratings != b.aspect_ratings {
        Some("aspect_ratings")
    } else if a.review_date != b.review_date {
        Some("review_date")
    } else if a.stay_date != b.stay_date {
        Some("stay_date")
    } else if a.helpful_votes != b.helpful_votes {
        Some("helpful_votes")
    } else if a.hotel != b.hotel {
        Some("hotel")
    } else {
        None
    }
}

/// Check that `a` and `b` cover the same review ids with identical metadata.
pub fn align_corpora(a: &Corpus, b: &Corpus) -> Result<AlignedCorpora, CorpusError> {
    let ids_a = a.review_ids();
    let ids_b = b.review_ids();
    if ids_a != ids_b {
        return Err(CorpusError::MissingIds {
            only_in_base: ids_a.difference(&ids_b).copied().collect(),
            only_in_counterpart: ids_b.difference(&ids_a).copied().collect(),
        });
    }
    for id in &ids_a {
        let (ra, rb) = (a.get(*id).unwrap(), b.get(*id).unwrap());
        if let Some(field) = first_metadata_difference(ra, rb) {
            return Err(CorpusError::MetadataMismatch {
                review_id: *id,
                field,
            });
        }
    }
    Ok(AlignedCorpora {
        base: a.clone(),
        counterpart: b.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub records: usize,
    pub avg_word_count: f64,
    pub avg_char_count: f64,
    pub vocab_size: usize,
}

pub fn corpus_stats(c: &Corpus) -> Result<StatsSummary, CorpusError> {
    if c.is_empty() {
        return Err(CorpusError::Empty(c.label.clone()));
    }
    let mut words = 0usize;
    let mut chars = 0usize;
    let mut vocab = BTreeSet::new();
    for r in &c.records {
        let t = r
            .text
            .as_deref()
            .ok_or(CorpusError::MissingText(r.review_id))?;
        words += text::word_count(t);
        chars += t.chars().count();
        vocab.extend(text::tokens(t));
    }
    let n = c.len() as f64;
    Ok(StatsSummary {
        records: c.len(),
        avg_word_count: words as f64 / n,
        avg_char_count: chars as f64 / n,
        vocab_size: vocab.len(),
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn record(id: u64, user: &str, item: &str, rating: u8, date: &str) -> ReviewRecord {
        ReviewRecord {
            review_id: id,
            user_id: user.to_string(),
            item_id: item.to_string(),
            overall_rating: rating,
            aspect_ratings: BTreeMap::new(),
            review_date: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
            stay_date: None,
            helpful_votes: 0,
            text: Some(format!("review {id}")),
            hotel: HotelInfo {
                name: format!("Hotel {item}"),
                region: "CA".into(),
                locality: "San Diego".into(),
                class: 3.0,
                link: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::record;
    use super::*;

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    const VALID: &str = r#"{"review_id":1,"user_id":"u1","item_id":"h1","overall_rating":5,"review_date":"2010-05-02","stay_date":"2010-04","text":"Great stay!","hotel":{"name":"Sea","region":"CA","locality":"SD","class":4.0},"extra":"ignored"}"#;

    fn line_with(id: u64) -> String {
        VALID.replacen("\"review_id\":1", &format!("\"review_id\":{id}"), 1)
    }

    #[test]
    fn empty_file_gives_empty_corpus() {
        let f = write_lines(&[]);
        let c = load_corpus(f.path(), "human").unwrap();
        assert!(c.is_empty());
        assert_eq!(c.label(), "human");
    }

    #[test]
    fn single_valid_record() {
        let f = write_lines(&[VALID]);
        let c = load_corpus(f.path(), "human").unwrap();
        assert_eq!(c.len(), 1);
        let r = &c.records()[0];
        assert_eq!(r.overall_rating, 5);
        assert_eq!(r.helpful_votes, 0);
        assert_eq!(
            r.stay_date,
            Some(YearMonth {
                year: 2010,
                month: 4
            })
        );
    }

    #[test]
    fn duplicate_id_names_both_lines() {
        let lines: Vec<String> = (1..=9)
            .map(|l| match l {
                3 | 9 => line_with(7),
                _ => line_with(100 + l),
            })
            .collect();
        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        let f = write_lines(&refs);
        let err = load_corpus(f.path(), "human").unwrap_err();
        match err {
            CorpusError::DuplicateLine {
                review_id,
                first_line,
                line,
            } => assert_eq!((review_id, first_line, line), (7, 3, 9)),
            other => panic!("unexpected {other}"),
        }
        assert!(load_corpus(f.path(), "human")
            .unwrap_err()
            .to_string()
            .contains("review_id 7"));
    }

    #[test]
    fn rating_out_of_range_and_missing_field() {
        let bad = VALID.replace("\"overall_rating\":5", "\"overall_rating\":6");
        let f = write_lines(&[
            VALID.replace("\"review_id\":1", "\"review_id\":2").as_str(),
            &bad,
        ]);
        let err = load_corpus(f.path(), "h").unwrap_err().to_string();
        assert!(err.starts_with("line 2:"), "{err}");
        assert!(err.contains("overall_rating 6"));

        let missing = VALID.replace("\"user_id\":\"u1\",", "");
        let f = write_lines(&[&missing]);
        let err = load_corpus(f.path(), "h").unwrap_err().to_string();
        assert!(err.contains("line 1") && err.contains("user_id"), "{err}");
    }

    #[test]
    fn stay_after_review_rejected() {
        let bad = VALID.replace("2010-04", "2010-06");
        let f = write_lines(&[&bad]);
        assert!(load_corpus(f.path(), "h").is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let f = write_lines(&[VALID]);
        let c = load_corpus(f.path(), "human").unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        c.write_jsonl(out.path()).unwrap();
        let back = load_corpus(out.path(), "human").unwrap();
        assert_eq!(back.records(), c.records());
    }

    fn grid(pairs: &[(&str, &str)]) -> Corpus {
        let records = pairs
            .iter()
            .enumerate()
            .map(|(i, (u, it))| record(i as u64, u, it, 4, "2011-01-01"))
            .collect();
        Corpus::new("t", records).unwrap()
    }

    // Independent oracle: drop the first offending record one at a time
    // until no user or item is under threshold.
    fn brute_force_filter(c: &Corpus, m: usize) -> BTreeSet<u64> {
        let mut alive: Vec<ReviewRecord> = c.records().to_vec();
        loop {
            let mut removed = false;
            for i in 0..alive.len() {
                let r = &alive[i];
                let uc = alive.iter().filter(|x| x.user_id == r.user_id).count();
                let ic = alive.iter().filter(|x| x.item_id == r.item_id).count();
                if uc < m || ic < m {
                    alive.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                return alive.iter().map(|r| r.review_id).collect();
            }
        }
    }

    #[test]
    fn filter_cascade_matches_brute_force() {
        // Threshold 2. Item X has one review (by A) and is removed; A then
        // has a single review left (on Y) and is removed; Y then has only
        // one review left and is removed, which finally drops D too.
        let c = grid(&[
            ("A", "X"),
            ("A", "Y"),
            ("B", "Z"),
            ("B", "W"),
            ("C", "Z"),
            ("C", "W"),
            ("D", "Y"),
            ("D", "Z"),
        ]);
        let got = filter_min_interactions(&c, 2, FilterMode::Fixpoint);
        assert_eq!(got.review_ids(), brute_force_filter(&c, 2));
        assert_eq!(got.user_ids(), ["B", "C"].into_iter().collect());
        let one_pass = filter_min_interactions(&c, 2, FilterMode::SinglePass);
        assert!(one_pass.len() > got.len());
    }

    #[test]
    fn filter_noop_when_dense() {
        let pairs: Vec<(String, String)> = (0..5)
            .flat_map(|u| (0..5).map(move |i| (format!("u{u}"), format!("i{i}"))))
            .collect();
        let refs: Vec<(&str, &str)> = pairs
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let c = grid(&refs);
        let f = filter_min_interactions(&c, 5, FilterMode::Fixpoint);
        assert_eq!(f.review_ids(), c.review_ids());
    }

    fn small() -> Corpus {
        Corpus::new(
            "human",
            (1..=15)
                .map(|i| record(i, "u", "h", 4, "2011-02-03"))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn align_identity_and_missing() {
        let a = small();
        assert!(align_corpora(&a, &a.relabel("copy").unwrap()).is_ok());

        let keep: BTreeSet<u64> = a.review_ids().into_iter().filter(|&i| i != 12).collect();
        let b = a.retain_ids(&keep);
        match align_corpora(&a, &b).unwrap_err() {
            CorpusError::MissingIds {
                only_in_base,
                only_in_counterpart,
            } => {
                assert_eq!(only_in_base, vec![12]);
                assert!(only_in_counterpart.is_empty());
            }
            e => panic!("{e}"),
        }
        assert!(align_corpora(&b, &a).is_err());
    }

    #[test]
    fn align_metadata_mismatch_names_field() {
        let a = small();
        let mut records = a.records().to_vec();
        records[3].overall_rating = 2; // review id 4
        records[5].text = Some("different text is fine".into());
        let b = Corpus::new("ai", records).unwrap();
        match align_corpora(&a, &b).unwrap_err() {
            CorpusError::MetadataMismatch { review_id, field } => {
                assert_eq!((review_id, field), (4, "overall_rating"))
            }
            e => panic!("{e}"),
        }
    }

    fn texts(ts: &[&str]) -> Corpus {
        let records = ts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut r = record(i as u64, "u", "h", 4, "2011-01-01");
                r.text = Some(t.to_string());
                r
            })
            .collect();
        Corpus::new("t", records).unwrap()
    }

    #[test]
    fn stats_hand_counts() {
        let s = corpus_stats(&texts(&["Great stay!"])).unwrap();
        assert_eq!(s.avg_word_count, 2.0);
        assert_eq!(s.avg_char_count, 11.0);
        assert_eq!(s.vocab_size, 2);

        let s = corpus_stats(&texts(&["nice", "nice"])).unwrap();
        assert_eq!(s.avg_word_count, 1.0);
        assert_eq!(s.vocab_size, 1);
    }

    #[test]
    fn stats_require_text() {
        let mut c = texts(&["a"]).records().to_vec();
        c[0].text = None;
        let c = Corpus::new("t", c).unwrap();
        assert!(matches!(corpus_stats(&c), Err(CorpusError::MissingText(0))));
    }
}
