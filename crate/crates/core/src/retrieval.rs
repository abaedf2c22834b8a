//! Query-by-example retrieval over an archive of fixed-width vectors.
//!
//! Archive segments are encoded once, off-line. A query is encoded the same
//! way and every archive entry is scored by cosine similarity. The DTW
//! baseline ranks raw feature sequences by `−distance` so both paths share
//! the same ordering rule.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::baselines::{self, DtwOptions};
use crate::data::{FeatureSequence, SegmentRecord};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::seq2seq::{self, ModelParams};

/// Anything that maps a feature sequence to a fixed-width vector.
pub trait SegmentEncoder: Sync {
    fn width(&self) -> usize;
    fn encode(&self, x: &FeatureSequence) -> Result<Vec<f64>>;
}

impl SegmentEncoder for ModelParams {
    fn width(&self) -> usize {
        self.hidden_dim
    }

    fn encode(&self, x: &FeatureSequence) -> Result<Vec<f64>> {
        seq2seq::encode(self, x).map(|z| z.0)
    }
}

/// The segment-averaging baseline for a fixed input width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveEncoder {
    pub input_dim: usize,
    pub m: usize,
}

impl SegmentEncoder for NaiveEncoder {
    fn width(&self) -> usize {
        self.input_dim * self.m
    }

    fn encode(&self, x: &FeatureSequence) -> Result<Vec<f64>> {
        if x.dim() != self.input_dim {
            return Err(Error::dim("naive encoder input width", self.input_dim, x.dim()));
        }
        baselines::naive_encode(x, self.m).map(|e| e.v)
    }
}

/// Returns 0 when either vector has zero norm.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dim("cosine operands", u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub id: String,
    pub word: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingArchive {
    entries: Vec<ArchiveEntry>,
    dim: usize,
}

impl EmbeddingArchive {
    pub fn new(entries: Vec<ArchiveEntry>, dim: usize) -> Result<Self> {
        let mut ids = HashSet::new();
        for e in &entries {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            if e.vector.len() != dim {
                return Err(Error::Ingest {
                    id: e.id.clone(),
                    message: format!("vector width {} differs from archive width {dim}", e.vector.len()),
                });
            }
            if e.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::Ingest {
                    id: e.id.clone(),
                    message: "non-finite embedding value".into(),
                });
            }
        }
        Ok(EmbeddingArchive { entries, dim })
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
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

    pub fn get(&self, id: &str) -> Option<&ArchiveEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// CSV with header `id,word,z0,…,z{d−1}`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,word");
        for k in 0..self.dim {
            out.push_str(&format!(",z{k}"));
        }
        out.push('\n');
        for e in &self.entries {
            out.push_str(&e.id);
            out.push(',');
            out.push_str(&e.word);
            for v in &e.vector {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Invalid("empty archive file".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols[0] != "id" || cols[1] != "word" {
            return Err(Error::Invalid(format!("bad archive header {header:?}")));
        }
        let dim = cols.len() - 2;
        let mut entries = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::Invalid(format!(
                    "archive line {}: {} fields, expected {}",
                    n + 2,
                    fields.len(),
                    cols.len()
                )));
            }
            let vector = fields[2..]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Invalid(format!("archive line {}: {e}", n + 2)))?;
            entries.push(ArchiveEntry {
                id: fields[0].to_string(),
                word: fields[1].to_string(),
                vector,
            });
        }
        Self::new(entries, dim)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

/// Encodes every record, keeping record order. Encoding runs in parallel.
pub fn build_archive<'a, E>(encoder: &E, records: impl IntoIterator<Item = &'a SegmentRecord>) -> Result<EmbeddingArchive>
where
    E: SegmentEncoder + ?Sized,
{
    let records: Vec<&SegmentRecord> = records.into_iter().collect();
    let entries = records
        .par_iter()
        .map(|r| {
            let vector = encoder.encode(&r.features).map_err(|e| Error::Ingest {
                id: r.id.clone(),
                message: e.to_string(),
            })?;
            if vector.len() != encoder.width() {
                return Err(Error::Ingest {
                    id: r.id.clone(),
                    message: format!("encoder produced width {}, declared {}", vector.len(), encoder.width()),
                });
            }
            Ok(ArchiveEntry {
                id: r.id.clone(),
                word: r.word.clone(),
                vector,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EmbeddingArchive::new(entries, encoder.width())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredId {
    pub id: String,
    pub score: f64,
}

/// Sorted by descending score, ties by ascending id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedResult {
    pub items: Vec<ScoredId>,
}

impl RankedResult {
    fn from_unsorted(mut items: Vec<ScoredId>, top_k: Option<usize>) -> Self {
        items.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.id.cmp(&b.id))
        });
        if let Some(k) = top_k {
            items.truncate(k);
        }
        RankedResult { items }
    }

    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

pub fn rank(
    query: &[f64],
    archive: &EmbeddingArchive,
    exclude_id: Option<&str>,
    top_k: Option<usize>,
) -> Result<RankedResult> {
    if query.len() != archive.dim() {
        return Err(Error::dim("query width vs. archive", archive.dim(), query.len()));
    }
    let items = archive
        .entries()
        .par_iter()
        .filter(|e| Some(e.id.as_str()) != exclude_id)
        .map(|e| {
            Ok(ScoredId {
                id: e.id.clone(),
                score: cosine_similarity(query, &e.vector)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankedResult::from_unsorted(items, top_k))
}

/// Ranks raw sequences by `−dtw_distance`.
pub fn rank_dtw<'a>(
    query: &FeatureSequence,
    records: impl IntoIterator<Item = &'a SegmentRecord>,
    exclude_id: Option<&str>,
    top_k: Option<usize>,
    options: DtwOptions,
) -> Result<RankedResult> {
    let candidates: Vec<&SegmentRecord> = records
        .into_iter()
        .filter(|r| Some(r.id.as_str()) != exclude_id)
        .collect();
    let items = candidates
        .par_iter()
        .map(|r| {
            Ok(ScoredId {
                id: r.id.clone(),
                score: -baselines::dtw_distance_with(query, &r.features, options)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankedResult::from_unsorted(items, top_k))
}
