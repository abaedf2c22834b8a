//! Dataset ingestion and the synthetic phoneme-string corpus.
//!
//! A dataset is described by a manifest: one JSON object per line,
//!
//! ```text
//! {"id":"w000_t000","word":"cab","phonemes":["c","a","b"],"split":"train","features":"features/w000_t000.csv"}
//! ```
//!
//! where `features` is resolved relative to the manifest's directory. Feature
//! files are either CSV (one frame per line, comma-separated, no header) or,
//! when the path ends in `.bin`, a packed little-endian file with a `u32` frame
//! count, a `u32` width and then `T·D` `f32` values.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A `T × D` sequence of real-valued frames, `T ≥ 1`, every value finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    frames: Matrix,
}

impl FeatureSequence {
    pub fn from_matrix(frames: Matrix) -> Result<Self> {
        if frames.rows() == 0 {
            return Err(Error::Invalid("feature sequence has no frames".into()));
        }
        if frames.cols() == 0 {
            return Err(Error::Invalid("feature sequence has zero width".into()));
        }
        if let Some(pos) = frames.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!(
                "non-finite value at frame {}",
                pos / frames.cols()
            )));
        }
        Ok(FeatureSequence { frames })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(first) = rows.first() {
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != first.len()) {
                return Err(Error::dim(format!("frame {i}"), first.len(), r.len()));
            }
        }
        Self::from_matrix(Matrix::from_rows(rows).expect("widths checked"))
    }

    /// Frame count `T`.
    pub fn len(&self) -> usize {
        self.frames.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frame width `D`.
    pub fn dim(&self) -> usize {
        self.frames.cols()
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        self.frames.row(t)
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |t| self.frame(t))
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.frames
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.frames.to_rows()
    }

    /// Row-major flattening of all frames.
    pub fn as_slice(&self) -> &[f64] {
        self.frames.as_slice()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Invalid(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub id: String,
    pub word: String,
    pub phonemes: Option<Vec<String>>,
    pub split: Split,
    pub features: FeatureSequence,
}

/// Word labels are compared case-insensitively everywhere.
pub fn fold_word(word: &str) -> String {
    word.to_lowercase()
}

/// Records in manifest order, all sharing one frame width.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<SegmentRecord>,
    dim: usize,
}

impl Dataset {
    pub fn new(records: Vec<SegmentRecord>) -> Result<Self> {
        let dim = records
            .first()
            .map(|r| r.features.dim())
            .ok_or_else(|| Error::Invalid("dataset has no records".into()))?;
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
            if r.features.dim() != dim {
                return Err(Error::Ingest {
                    id: r.id.clone(),
                    message: format!("feature width {} differs from dataset width {dim}", r.features.dim()),
                });
            }
            if matches!(&r.phonemes, Some(p) if p.is_empty()) {
                return Err(Error::Ingest {
                    id: r.id.clone(),
                    message: "phoneme list is present but empty".into(),
                });
            }
        }
        Ok(Dataset { records, dim })
    }

    pub fn records(&self) -> &[SegmentRecord] {
        &self.records
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn split(&self, split: Split) -> Vec<&SegmentRecord> {
        self.records.iter().filter(|r| r.split == split).collect()
    }

    pub fn get(&self, id: &str) -> Option<&SegmentRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestLine {
    id: String,
    word: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phonemes: Option<Vec<String>>,
    split: Split,
    features: String,
}

/// Reads a manifest and every feature file it references.
pub fn parse_manifest(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestLine = serde_json::from_str(&line).map_err(|e| {
            Error::Invalid(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        if !seen.insert(entry.id.clone()) {
            return Err(Error::DuplicateId(entry.id));
        }
        let feature_path = base.join(&entry.features);
        let features = read_features(&feature_path).map_err(|e| match e {
            Error::Io { source, .. } => Error::Ingest {
                id: entry.id.clone(),
                message: format!("cannot read {}: {source}", feature_path.display()),
            },
            other @ Error::RaggedRow { .. } => other,
            other => Error::Ingest {
                id: entry.id.clone(),
                message: other.to_string(),
            },
        })?;
        records.push(SegmentRecord {
            id: entry.id,
            word: entry.word,
            phonemes: entry.phonemes,
            split: entry.split,
            features,
        });
    }
    Dataset::new(records)
}

/// Writes `manifest.jsonl` plus one CSV per record under `features/`.
/// Returns the manifest path.
pub fn write_manifest(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let feat_dir = dir.join("features");
    fs::create_dir_all(&feat_dir).map_err(|e| Error::io(&feat_dir, e))?;
    let manifest_path = dir.join("manifest.jsonl");
    let file = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut out = BufWriter::new(file);
    for r in dataset.records() {
        let rel = format!("features/{}.csv", r.id);
        write_features_csv(&r.features, dir.join(&rel))?;
        let line = ManifestLine {
            id: r.id.clone(),
            word: r.word.clone(),
            phonemes: r.phonemes.clone(),
            split: r.split,
            features: rel,
        };
        let json = serde_json::to_string(&line).expect("manifest line serializes");
        writeln!(out, "{json}").map_err(|e| Error::io(&manifest_path, e))?;
    }
    out.flush().map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

/// Reads a feature file, choosing the binary reader for `.bin` paths.
pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "bin") {
        read_features_bin(path)
    } else {
        read_features_csv(path)
    }
}

pub fn read_features_csv(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Invalid(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::RaggedRow {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    row: rows.len(),
                    expected: first.len(),
                    actual: row.len(),
                });
            }
        }
        rows.push(row);
    }
    FeatureSequence::from_rows(&rows)
}

pub fn write_features_csv(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for frame in seq.frames() {
        let line: Vec<String> = frame.iter().map(|v| v.to_string()).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_features_bin(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::Invalid(format!("{}: {msg}", path.display()));
    if bytes.len() < 8 {
        return Err(bad("missing header"));
    }
    let t = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if body.len() != t * d * 4 {
        return Err(bad(&format!(
            "header declares {t}x{d} values but body holds {} bytes",
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    FeatureSequence::from_matrix(Matrix::from_fn(t, d, |r, c| values[r * d + c]))
}

/// Writes the packed binary format. Values are narrowed to `f32`.
pub fn write_features_bin(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(8 + seq.as_slice().len() * 4);
    bytes.extend_from_slice(&(seq.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&(seq.dim() as u32).to_le_bytes());
    for v in seq.as_slice() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Parameters of the synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub alphabet_size: usize,
    pub num_words: usize,
    pub tokens_per_word: usize,
    /// Inclusive phoneme-count range per word.
    pub phonemes_per_word: (usize, usize),
    pub dim: usize,
    /// Inclusive frame-count range per phoneme occurrence.
    pub frames_per_phoneme: (usize, usize),
    pub noise_sigma: f64,
    pub seed: u64,
    /// The last `test_tokens` tokens of every word go to the test split.
    pub test_tokens: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            alphabet_size: 10,
            num_words: 40,
            tokens_per_word: 15,
            phonemes_per_word: (3, 6),
            dim: 8,
            frames_per_phoneme: (2, 4),
            noise_sigma: 0.1,
            seed: 0,
            test_tokens: 5,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Generation(m));
        if self.alphabet_size < 2 {
            return err(format!("alphabet size must be at least 2, got {}", self.alphabet_size));
        }
        for (name, (lo, hi)) in [
            ("phonemes per word", self.phonemes_per_word),
            ("frames per phoneme", self.frames_per_phoneme),
        ] {
            if lo < 1 || lo > hi {
                return err(format!("{name} range [{lo}, {hi}] is empty or starts below 1"));
            }
        }
        if self.dim == 0 {
            return err("feature width must be at least 1".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return err(format!("noise sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if self.test_tokens > self.tokens_per_word {
            return err(format!(
                "test tokens ({}) exceed tokens per word ({})",
                self.test_tokens, self.tokens_per_word
            ));
        }
        let capacity = distinct_strings(self.alphabet_size, self.phonemes_per_word);
        if (self.num_words as u128) > capacity {
            return err(format!(
                "{} distinct words requested but only {capacity} strings exist",
                self.num_words
            ));
        }
        Ok(())
    }
}

fn distinct_strings(alphabet: usize, (lo, hi): (usize, usize)) -> u128 {
    let mut total: u128 = 0;
    for k in lo..=hi {
        let n = (alphabet as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        total = total.saturating_add(n);
        if total == u128::MAX {
            break;
        }
    }
    total
}

/// Symbol name for phoneme index `k`.
pub fn phoneme_symbol(alphabet_size: usize, k: usize) -> String {
    if alphabet_size <= 26 {
        char::from(b'a' + k as u8).to_string()
    } else {
        format!("p{k}")
    }
}

fn word_label(alphabet_size: usize, symbols: &[String]) -> String {
    if alphabet_size <= 26 {
        symbols.concat()
    } else {
        symbols.join("-")
    }
}

/// Renders one token: each phoneme becomes `lengths[k]` copies of its
/// prototype plus independent Gaussian noise.
pub fn render_token(
    prototypes: &Matrix,
    phonemes: &[usize],
    lengths: &[usize],
    noise: Option<&Normal<f64>>,
    rng: &mut impl Rng,
) -> Matrix {
    let dim = prototypes.cols();
    let total: usize = lengths.iter().sum();
    let mut frames = Matrix::zeros(total, dim);
    let mut t = 0;
    for (&p, &len) in phonemes.iter().zip(lengths) {
        for _ in 0..len {
            for c in 0..dim {
                let eps = noise.map_or(0.0, |n| n.sample(rng));
                frames.set(t, c, prototypes.get(p, c) + eps);
            }
            t += 1;
        }
    }
    frames
}

/// Everything the generator drew, for tests and diagnostics.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub dataset: Dataset,
    pub prototypes: Matrix,
    /// Per record (dataset order), the number of frames rendered per phoneme.
    pub phoneme_lengths: Vec<Vec<usize>>,
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<Dataset> {
    generate_synthetic_corpus(config).map(|c| c.dataset)
}

pub fn generate_synthetic_corpus(config: &SynthConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let prototypes = Matrix::from_fn(config.alphabet_size, config.dim, |_, _| {
        rng.random_range(-1.0..=1.0)
    });

    let (pmin, pmax) = config.phonemes_per_word;
    let mut seen = HashSet::new();
    let mut words: Vec<Vec<usize>> = Vec::with_capacity(config.num_words);
    while words.len() < config.num_words {
        let k = rng.random_range(pmin..=pmax);
        let w: Vec<usize> = (0..k).map(|_| rng.random_range(0..config.alphabet_size)).collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }

    let noise = (config.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, config.noise_sigma).expect("sigma validated"));
    let (fmin, fmax) = config.frames_per_phoneme;
    let mut records = Vec::new();
    let mut phoneme_lengths = Vec::new();
    for (wi, word) in words.iter().enumerate() {
        let symbols: Vec<String> = word
            .iter()
            .map(|&p| phoneme_symbol(config.alphabet_size, p))
            .collect();
        let label = word_label(config.alphabet_size, &symbols);
        for tok in 0..config.tokens_per_word {
            let lengths: Vec<usize> = word.iter().map(|_| rng.random_range(fmin..=fmax)).collect();
            let frames = render_token(&prototypes, word, &lengths, noise.as_ref(), &mut rng);
            let split = if tok >= config.tokens_per_word - config.test_tokens {
                Split::Test
            } else {
                Split::Train
            };
            records.push(SegmentRecord {
                id: format!("w{wi:03}_t{tok:03}"),
                word: label.clone(),
                phonemes: Some(symbols.clone()),
                split,
                features: FeatureSequence::from_matrix(frames)?,
            });
            phoneme_lengths.push(lengths);
        }
    }
    Ok(SyntheticCorpus {
        dataset: Dataset::new(records)?,
        prototypes,
        phoneme_lengths,
    })
}
