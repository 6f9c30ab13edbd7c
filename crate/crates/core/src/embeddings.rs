//! Per-review sentence-embedding vectors and the k-most-recent history
//! windows built from them.
//!
//! Stores are persisted in the `REVEMB01` binary layout (all little-endian):
//!
//! ```text
//! bytes 0..8   magic "REVEMB01"
//! u32          dim
//! u64          count
//! count x      (u64 review_id, dim x f32), ascending by review_id
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::corpus::{Corpus, EventKey, ReviewRecord};
use crate::digest::{rng_for, sha256_hex};

pub const MAGIC: &[u8; 8] = b"REVEMB01";
const HEADER_LEN: usize = 8 + 4 + 8;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic: expected REVEMB01")]
    BadMagic,
    #[error("file too short for header ({0} bytes)")]
    ShortHeader(usize),
    #[error(
        "declared {declared} records of dim {dim} need {expected} payload bytes, found {actual}"
    )]
    LengthMismatch {
        declared: u64,
        dim: u32,
        expected: u64,
        actual: u64,
    },
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("review {review_id}: non-finite component at position {position}")]
    NonFinite { review_id: u64, position: usize },
    #[error("review ids not strictly ascending at {0}")]
    Unsorted(u64),
    #[error("review {review_id}: vector has length {got}, store dim is {dim}")]
    WrongLength {
        review_id: u64,
        got: usize,
        dim: usize,
    },
    #[error("review {0} has no embedding")]
    Missing(u64),
}

/// Immutable map from review id to a fixed-dimension vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    entries: BTreeMap<u64, Vec<f32>>,
    source_tag: String,
}

impl EmbeddingStore {
    pub fn new(dim: usize, source_tag: impl Into<String>) -> Result<Self, StoreError> {
        if dim == 0 {
            return Err(StoreError::ZeroDim);
        }
        Ok(EmbeddingStore {
            dim,
            entries: BTreeMap::new(),
            source_tag: source_tag.into(),
        })
    }

    pub fn insert(&mut self, review_id: u64, vector: Vec<f32>) -> Result<(), StoreError> {
        if vector.len() != self.dim {
            return Err(StoreError::WrongLength {
                review_id,
                got: vector.len(),
                dim: self.dim,
            });
        }
        if let Some(position) = vector.iter().position(|v| !v.is_finite()) {
            return Err(StoreError::NonFinite {
                review_id,
                position,
            });
        }
        self.entries.insert(review_id, vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn get(&self, review_id: u64) -> Option<&[f32]> {
        self.entries.get(&review_id).map(Vec::as_slice)
    }

    pub fn require(&self, review_id: u64) -> Result<&[f32], StoreError> {
        self.get(review_id).ok_or(StoreError::Missing(review_id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &[f32])> {
        self.entries.iter().map(|(&id, v)| (id, v.as_slice()))
    }

    /// Componentwise mean over all entries (f64 accumulation).
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0f64; self.dim];
        for v in self.entries.values() {
            for (a, &x) in acc.iter_mut().zip(v) {
                *a += x as f64;
            }
        }
        let n = self.entries.len().max(1) as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// A new store with every vector pulled toward the store mean, keeping
    /// `retain` of each vector's deviation from it.
    pub fn shrink_toward_mean(&self, retain: f64, source_tag: impl Into<String>) -> EmbeddingStore {
        let mean = self.mean();
        let entries = self
            .entries
            .iter()
            .map(|(&id, v)| {
                let shrunk = v
                    .iter()
                    .zip(&mean)
                    .map(|(&x, &m)| (m + retain * (x as f64 - m)) as f32)
                    .collect();
                (id, shrunk)
            })
            .collect();
        EmbeddingStore {
            dim: self.dim,
            entries,
            source_tag: source_tag.into(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.entries.len() * (8 + 4 * self.dim));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for (&id, v) in &self.entries {
            out.extend_from_slice(&id.to_le_bytes());
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], source_tag: impl Into<String>) -> Result<Self, StoreError> {
        if bytes.len() < HEADER_LEN {
            if bytes.len() >= 8 && &bytes[..8] != MAGIC {
                return Err(StoreError::BadMagic);
            }
            return Err(StoreError::ShortHeader(bytes.len()));
        }
        if &bytes[..8] != MAGIC {
            return Err(StoreError::BadMagic);
        }
        let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        if dim == 0 {
            return Err(StoreError::ZeroDim);
        }
        let record_len = 8u64 + 4 * dim as u64;
        let payload = (bytes.len() - HEADER_LEN) as u64;
        let expected = count.saturating_mul(record_len);
        if payload != expected {
            return Err(StoreError::LengthMismatch {
                declared: count,
                dim,
                expected,
                actual: payload,
            });
        }
        let mut store = EmbeddingStore::new(dim as usize, source_tag)?;
        let mut last: Option<u64> = None;
        for rec in bytes[HEADER_LEN..].chunks_exact(record_len as usize) {
            let id = u64::from_le_bytes(rec[..8].try_into().unwrap());
            if last.is_some_and(|l| l >= id) {
                return Err(StoreError::Unsorted(id));
            }
            last = Some(id);
            let v = rec[8..]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            store.insert(id, v)?;
        }
        Ok(store)
    }

    pub fn write(&self, path: &Path) -> Result<(), StoreError> {
        fs::write(path, self.to_bytes()).map_err(|source| StoreError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// SHA-256 of the serialized store.
    pub fn digest(&self) -> String {
        sha256_hex(&self.to_bytes())
    }
}

/// Read and validate a `REVEMB01` file.
pub fn open_store(path: &Path) -> Result<EmbeddingStore, StoreError> {
    let bytes = fs::read(path).map_err(|source| StoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    EmbeddingStore::from_bytes(&bytes, path.display().to_string())
}

fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Deterministic offline stand-in for a sentence encoder: a unit-norm
/// Gaussian vector keyed by the normalized text and `seed`.
pub fn stub_embed(text: &str, seed: u64, dim: usize) -> Vec<f32> {
    assert!(dim >= 1, "dim must be positive");
    let key = normalize_text(text);
    let mut rng = rng_for(seed, &["stub-embed", &key]);
    let raw: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.iter().map(|x| (x / norm) as f32).collect()
}

/// Stub-embed every record of `c` that has text.
pub fn stub_store(c: &Corpus, seed: u64, dim: usize) -> Result<EmbeddingStore, StoreError> {
    let mut store = EmbeddingStore::new(dim, format!("stub:{seed}:{}", c.label()))?;
    for r in c.records() {
        if let Some(t) = &r.text {
            store.insert(r.review_id, stub_embed(t, seed, dim))?;
        }
    }
    Ok(store)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryKey<'a> {
    User(&'a str),
    Item(&'a str),
}

/// Per-user and per-item review timelines used to select histories.
/// Selection looks only at ids and dates, never at text or vectors.
#[derive(Debug, Clone, Default)]
pub struct HistoryIndex {
    by_user: HashMap<String, Vec<EventKey>>,
    by_item: HashMap<String, Vec<EventKey>>,
}

impl HistoryIndex {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a ReviewRecord>) -> Self {
        let mut index = HistoryIndex::default();
        for r in records {
            let key = r.event_key();
            index
                .by_user
                .entry(r.user_id.clone())
                .or_default()
                .push(key);
            index
                .by_item
                .entry(r.item_id.clone())
                .or_default()
                .push(key);
        }
        for timeline in index.by_user.values_mut().chain(index.by_item.values_mut()) {
            timeline.sort_unstable();
        }
        index
    }

    pub fn build(c: &Corpus) -> Self {
        Self::from_records(c.records())
    }

    /// Up to `k` review ids of `key` strictly before `before`, most recent first.
    pub fn select(&self, key: HistoryKey<'_>, before: EventKey, k: usize) -> Vec<u64> {
        let timeline = match key {
            HistoryKey::User(u) => self.by_user.get(u),
            HistoryKey::Item(i) => self.by_item.get(i),
        };
        let Some(timeline) = timeline else {
            return Vec::new();
        };
        let end = timeline.partition_point(|e| *e < before);
        timeline[..end]
            .iter()
            .rev()
            .take(k)
            .map(|e| e.review_id)
            .collect()
    }
}

/// Exactly `k` vectors of length `dim`, most recent first, zero padded.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryWindow {
    k: usize,
    dim: usize,
    flat: Vec<f64>,
    review_ids: Vec<u64>,
}

impl HistoryWindow {
    pub fn zeros(k: usize, dim: usize) -> Self {
        HistoryWindow {
            k,
            dim,
            flat: vec![0.0; k * dim],
            review_ids: Vec::new(),
        }
    }

    /// Materialize the vectors of `ids` (most recent first, at most `k`).
    pub fn from_ids(store: &EmbeddingStore, ids: &[u64], k: usize) -> Result<Self, StoreError> {
        assert!(ids.len() <= k, "more history ids than window slots");
        let mut w = HistoryWindow::zeros(k, store.dim());
        for (slot, &id) in ids.iter().enumerate() {
            let v = store.require(id)?;
            for (dst, &x) in w.flat[slot * w.dim..(slot + 1) * w.dim].iter_mut().zip(v) {
                *dst = x as f64;
            }
        }
        w.review_ids = ids.to_vec();
        Ok(w)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn present_count(&self) -> usize {
        self.review_ids.len()
    }

    pub fn review_ids(&self) -> &[u64] {
        &self.review_ids
    }

    pub fn vector(&self, slot: usize) -> &[f64] {
        &self.flat[slot * self.dim..(slot + 1) * self.dim]
    }

    /// The concatenation of all `k` slots.
    pub fn as_flat(&self) -> &[f64] {
        &self.flat
    }
}

/// Build the history window of `key` from reviews strictly earlier than `before`.
pub fn assemble_history(
    index: &HistoryIndex,
    store: &EmbeddingStore,
    key: HistoryKey<'_>,
    before: EventKey,
    k: usize,
) -> Result<HistoryWindow, StoreError> {
    assert!(k >= 1, "k must be positive");
    let ids = index.select(key, before, k);
    HistoryWindow::from_ids(store, &ids, k)
}
