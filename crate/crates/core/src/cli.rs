//! The `seqae` command line.
//!
//! Defaults reproduce the full-size configuration (100 hidden units,
//! learning rate 0.3, 500 epochs, masking probability 0.3 in `dsa` mode);
//! small experiments override them explicitly.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 training divergence.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::DtwOptions;
use crate::data::{self, Dataset, FeatureSequence, SegmentRecord, Split, SynthConfig};
use crate::error::Error;
use crate::eval::{self, MapReport, RetrievalMethod};
use crate::retrieval::{self, EmbeddingArchive, NaiveEncoder, RankedResult, SegmentEncoder};
use crate::seq2seq::{self, TrainConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
    #[error("no scorable queries: every query word occurs only once in the evaluated split")]
    NoScorableQueries,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(Error::Divergence { .. }) => EXIT_DIVERGENCE,
            CliError::Data(_) | CliError::NoScorableQueries => EXIT_DATA,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "seqae", version, about = "Sequence autoencoder embeddings and query-by-example retrieval")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic phoneme-string corpus (manifest + CSV features).
    Synth(SynthArgs),
    /// Train an autoencoder (sa) or denoising autoencoder (dsa).
    Train(TrainArgs),
    /// Encode a split into an embedding archive CSV.
    Encode(EncodeArgs),
    /// Rank archive segments against one query.
    Search(SearchArgs),
    /// Mean average precision for one or more retrieval methods.
    Evaluate(EvaluateArgs),
    /// Similarity-by-edit-distance tables and word difference vectors.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub alphabet: usize,
    #[arg(long, default_value_t = 40)]
    pub words: usize,
    #[arg(long, default_value_t = 15)]
    pub tokens: usize,
    #[arg(long, default_value_t = 3)]
    pub min_phonemes: usize,
    #[arg(long, default_value_t = 6)]
    pub max_phonemes: usize,
    #[arg(long, default_value_t = 13)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub min_frames: usize,
    #[arg(long, default_value_t = 4)]
    pub max_frames: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tokens per word assigned to the test split [default: a third of --tokens]
    #[arg(long)]
    pub test_tokens: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sa,
    Dsa,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Sa)]
    pub mode: Mode,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.3)]
    pub lr: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    /// Masking probability [default: 0 for sa, 0.3 for dsa]
    #[arg(long)]
    pub denoise: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub clip: f64,
    /// Disable gradient clipping.
    #[arg(long)]
    pub no_clip: bool,
    /// Loss log CSV [default: <out>.loss.csv]
    #[arg(long)]
    pub loss_log: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncoderKind {
    Sa,
    Ne,
}

#[derive(Debug, Args)]
pub struct EncoderArgs {
    #[arg(long, value_enum, default_value_t = EncoderKind::Sa)]
    pub encoder: EncoderKind,
    /// Autoencoder checkpoint (required for --encoder sa).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Segment count for --encoder ne.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    #[command(flatten)]
    pub encoder: EncoderArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchMethod {
    Cosine,
    Dtw,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Precomputed embedding archive; ranks by cosine.
    #[arg(long, conflicts_with = "manifest")]
    pub archive: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitArg::All)]
    pub split: SplitArg,
    #[command(flatten)]
    pub encoder: EncoderArgs,
    #[arg(long, value_enum, default_value_t = SearchMethod::Cosine)]
    pub method: SearchMethod,
    /// Divide DTW cost by alignment path length.
    #[arg(long)]
    pub dtw_normalize: bool,
    #[arg(long, conflicts_with = "query_features")]
    pub query_id: Option<String>,
    #[arg(long)]
    pub query_features: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    /// Autoencoder checkpoint as LABEL=PATH (or PATH, labelled by file stem). Repeatable.
    #[arg(long = "checkpoint")]
    pub checkpoints: Vec<String>,
    /// Naive encoder with M segments, labelled neM. Repeatable.
    #[arg(long = "ne")]
    pub ne: Vec<usize>,
    /// Include the frame-level DTW baseline.
    #[arg(long)]
    pub dtw: bool,
    #[arg(long)]
    pub dtw_normalize: bool,
    /// Directory for per-query reports and comparison.csv.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(subcommand)]
    pub kind: AnalyzeKind,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeKind {
    /// Mean cosine similarity of segment pairs grouped by phoneme edit distance.
    EditDistance {
        #[arg(long)]
        archive: PathBuf,
        /// Manifest supplying phoneme sequences.
        #[arg(long)]
        manifest: PathBuf,
        /// Distances at or above this share the last bucket.
        #[arg(long, default_value_t = 5)]
        top_bucket: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Differences of per-word mean embeddings and their 2-D projection.
    DiffVectors {
        #[arg(long)]
        archive: PathBuf,
        /// Comma-separated word pairs, e.g. "new:few,night:fight".
        #[arg(long)]
        pairs: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command, writing
/// primary output to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> CliResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return emit(out, &e.to_string());
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Encode(a) => cmd_encode(&a, out),
        Command::Search(a) => cmd_search(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Analyze(a) => cmd_analyze(&a, out),
    }
}

/// Entry point used by the binary: parses the process arguments, reports
/// errors on stderr and returns the exit code.
pub fn main_exit_code() -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(std::env::args_os(), &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_string().trim_end());
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Data(Error::io("<stdout>", e)))
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Data(Error::io(path, e)))
}

fn select(dataset: &Dataset, split: SplitArg) -> Vec<&SegmentRecord> {
    match split {
        SplitArg::All => dataset.records().iter().collect(),
        SplitArg::Train => dataset.split(Split::Train),
        SplitArg::Test => dataset.split(Split::Test),
    }
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> CliResult {
    let config = SynthConfig {
        alphabet_size: a.alphabet,
        num_words: a.words,
        tokens_per_word: a.tokens,
        phonemes_per_word: (a.min_phonemes, a.max_phonemes),
        dim: a.dim,
        frames_per_phoneme: (a.min_frames, a.max_frames),
        noise_sigma: a.noise,
        seed: a.seed,
        test_tokens: a.test_tokens.unwrap_or(a.tokens / 3),
    };
    let dataset = data::generate_synthetic(&config)?;
    let manifest = data::write_manifest(&dataset, &a.out_dir)?;
    emit(
        out,
        &format!(
            "wrote {} records ({} train, {} test, D = {}) to {}\n",
            dataset.len(),
            dataset.split(Split::Train).len(),
            dataset.split(Split::Test).len(),
            dataset.dim(),
            manifest.display()
        ),
    )
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> CliResult {
    if a.hidden == 0 {
        return Err(usage("--hidden must be at least 1"));
    }
    if !(a.lr > 0.0 && a.lr.is_finite()) {
        return Err(usage("--lr must be a positive number"));
    }
    let denoise_p = a.denoise.unwrap_or(match a.mode {
        Mode::Sa => 0.0,
        Mode::Dsa => 0.3,
    });
    if !(0.0..=1.0).contains(&denoise_p) {
        return Err(usage("--denoise must lie in [0, 1]"));
    }
    if !a.no_clip && !(a.clip > 0.0 && a.clip.is_finite()) {
        return Err(usage("--clip must be positive (use --no-clip to disable)"));
    }
    let dataset = data::parse_manifest(&a.manifest)?;
    let train_split = dataset.split(Split::Train);
    if train_split.is_empty() {
        return Err(CliError::Data(Error::Invalid("manifest has no train records".into())));
    }
    let params = seq2seq::init_params(dataset.dim(), a.hidden, a.seed)?;
    let config = TrainConfig {
        lr: a.lr,
        epochs: a.epochs,
        denoise_p,
        clip_norm: (!a.no_clip).then_some(a.clip),
        seed: a.seed,
    };
    let outcome = seq2seq::train(params, &train_split, &config)?;
    seq2seq::save_checkpoint(&outcome.params, &a.out)?;
    let log_path = a.loss_log.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".loss.csv");
        PathBuf::from(p)
    });
    seq2seq::write_loss_log(&log_path, &outcome.loss_log)?;
    let last = outcome.loss_log.last().map(|l| l.to_string()).unwrap_or_else(|| "n/a".into());
    emit(
        out,
        &format!(
            "trained {} epochs on {} sequences (denoise {denoise_p}); final mean loss {last}\ncheckpoint {}\nloss log {}\n",
            a.epochs,
            train_split.len(),
            a.out.display(),
            log_path.display()
        ),
    )
}

fn make_encoder(args: &EncoderArgs, input_dim: usize) -> CliResult<Box<dyn SegmentEncoder>> {
    match args.encoder {
        EncoderKind::Sa => {
            let path = args
                .checkpoint
                .as_ref()
                .ok_or_else(|| usage("--encoder sa requires --checkpoint"))?;
            let params = seq2seq::load_checkpoint(path)?;
            if params.input_dim != input_dim {
                return Err(CliError::Data(Error::dim(
                    "checkpoint input width vs. data",
                    params.input_dim,
                    input_dim,
                )));
            }
            Ok(Box::new(params))
        }
        EncoderKind::Ne => {
            let m = args.m.ok_or_else(|| usage("--encoder ne requires --m"))?;
            if m == 0 {
                return Err(usage("--m must be at least 1"));
            }
            Ok(Box::new(NaiveEncoder { input_dim, m }))
        }
    }
}

pub fn cmd_encode(a: &EncodeArgs, out: &mut dyn Write) -> CliResult {
    let dataset = data::parse_manifest(&a.manifest)?;
    let encoder = make_encoder(&a.encoder, dataset.dim())?;
    let records = select(&dataset, a.split);
    let archive = retrieval::build_archive(encoder.as_ref(), records)?;
    archive.write_csv(&a.out)?;
    emit(
        out,
        &format!("encoded {} segments into {} dimensions: {}\n", archive.len(), archive.dim(), a.out.display()),
    )
}

fn print_ranking(out: &mut dyn Write, ranked: &RankedResult, word_of: impl Fn(&str) -> String) -> CliResult {
    let mut text = String::from("rank,id,word,score\n");
    for (k, item) in ranked.items.iter().enumerate() {
        text.push_str(&format!("{},{},{},{}\n", k + 1, item.id, word_of(&item.id), item.score));
    }
    emit(out, &text)
}

pub fn cmd_search(a: &SearchArgs, out: &mut dyn Write) -> CliResult {
    if a.query_id.is_none() && a.query_features.is_none() {
        return Err(usage("one of --query-id or --query-features is required"));
    }
    let top = Some(a.top);

    if let Some(path) = &a.archive {
        if a.method == SearchMethod::Dtw {
            return Err(usage("--method dtw needs --manifest, not --archive"));
        }
        let archive = EmbeddingArchive::read_csv(path)?;
        let (query, exclude) = match (&a.query_id, &a.query_features) {
            (Some(id), _) => {
                let entry = archive.get(id).ok_or_else(|| CliError::Data(Error::UnknownId(id.clone())))?;
                (entry.vector.clone(), Some(id.as_str()))
            }
            (None, Some(fpath)) => {
                let features = data::read_features(fpath)?;
                let encoder = make_encoder(&a.encoder, features.dim())?;
                (encoder.encode(&features)?, None)
            }
            (None, None) => unreachable!(),
        };
        let ranked = retrieval::rank(&query, &archive, exclude, top)?;
        return print_ranking(out, &ranked, |id| archive.get(id).map(|e| e.word.clone()).unwrap_or_default());
    }

    let manifest = a
        .manifest
        .as_ref()
        .ok_or_else(|| usage("either --archive or --manifest is required"))?;
    let dataset = data::parse_manifest(manifest)?;
    let records = select(&dataset, a.split);
    let (query, exclude): (FeatureSequence, Option<&str>) = match (&a.query_id, &a.query_features) {
        (Some(id), _) => {
            let rec = dataset.get(id).ok_or_else(|| CliError::Data(Error::UnknownId(id.clone())))?;
            (rec.features.clone(), Some(id.as_str()))
        }
        (None, Some(fpath)) => (data::read_features(fpath)?, None),
        (None, None) => unreachable!(),
    };
    let ranked = match a.method {
        SearchMethod::Dtw => retrieval::rank_dtw(
            &query,
            records.iter().copied(),
            exclude,
            top,
            DtwOptions { normalize: a.dtw_normalize },
        )?,
        SearchMethod::Cosine => {
            let encoder = make_encoder(&a.encoder, dataset.dim())?;
            let archive = retrieval::build_archive(encoder.as_ref(), records.iter().copied())?;
            retrieval::rank(&encoder.encode(&query)?, &archive, exclude, top)?
        }
    };
    print_ranking(out, &ranked, |id| dataset.get(id).map(|r| r.word.clone()).unwrap_or_default())
}

fn parse_checkpoint_spec(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() => (label.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(spec);
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            (label, path)
        }
    }
}

pub fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> CliResult {
    if a.checkpoints.is_empty() && a.ne.is_empty() && !a.dtw {
        return Err(usage("give at least one of --checkpoint, --ne, --dtw"));
    }
    if a.ne.contains(&0) {
        return Err(usage("--ne segment count must be at least 1"));
    }
    let dataset = data::parse_manifest(&a.manifest)?;
    let records = select(&dataset, a.split);
    if records.is_empty() {
        return Err(CliError::Data(Error::Invalid("evaluation split is empty".into())));
    }

    let mut results: Vec<(String, MapReport)> = Vec::new();
    for spec in &a.checkpoints {
        let (label, path) = parse_checkpoint_spec(spec);
        let params = seq2seq::load_checkpoint(&path)?;
        if params.input_dim != dataset.dim() {
            return Err(CliError::Data(Error::dim("checkpoint input width vs. data", params.input_dim, dataset.dim())));
        }
        results.push((label, eval::mean_average_precision(&RetrievalMethod::Embedding(&params), &records)?));
    }
    for &m in &a.ne {
        let enc = NaiveEncoder { input_dim: dataset.dim(), m };
        results.push((format!("ne{m}"), eval::mean_average_precision(&RetrievalMethod::Embedding(&enc), &records)?));
    }
    if a.dtw {
        let opts = DtwOptions { normalize: a.dtw_normalize };
        results.push(("dtw".into(), eval::mean_average_precision(&RetrievalMethod::Dtw(opts), &records)?));
    }

    if results.iter().all(|(_, r)| r.map.is_none()) {
        return Err(CliError::NoScorableQueries);
    }

    let mut table = String::from("method,map,scored_queries,excluded_queries\n");
    for (label, r) in &results {
        let map = r.map.map(|m| m.to_string()).unwrap_or_default();
        table.push_str(&format!("{label},{map},{},{}\n", r.scored(), r.excluded()));
    }
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(Error::io(dir, e)))?;
        for (label, r) in &results {
            write_file(&dir.join(format!("{label}.queries.csv")), &r.to_csv())?;
        }
        write_file(&dir.join("comparison.csv"), &table)?;
    }
    emit(out, &table)
}

fn parse_pairs(spec: &str) -> CliResult<Vec<(String, String)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|p| {
            p.split_once(':')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .filter(|(a, b)| !a.is_empty() && !b.is_empty())
                .ok_or_else(|| usage(format!("bad word pair {p:?}; expected w1:w2")))
        })
        .collect()
}

pub fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    match &a.kind {
        AnalyzeKind::EditDistance {
            archive,
            manifest,
            top_bucket,
            out: path,
        } => {
            if *top_bucket == 0 {
                return Err(usage("--top-bucket must be at least 1"));
            }
            let archive = EmbeddingArchive::read_csv(archive)?;
            let dataset = data::parse_manifest(manifest)?;
            let csv = eval::similarity_table(&archive, &dataset, *top_bucket)?.to_csv();
            match path {
                Some(p) => write_file(p, &csv),
                None => emit(out, &csv),
            }
        }
        AnalyzeKind::DiffVectors { archive, pairs, out: path } => {
            let pairs = parse_pairs(pairs)?;
            if pairs.is_empty() {
                return Err(usage("--pairs is empty"));
            }
            let archive = EmbeddingArchive::read_csv(archive)?;
            let diffs = eval::word_difference_vectors(&archive, &pairs)?;
            let proj = if diffs.len() >= 2 {
                eval::project_2d(&diffs)?
            } else {
                // a single vector centres to the origin
                vec![[0.0, 0.0]; diffs.len()]
            };
            let csv = eval::difference_vectors_csv(&pairs, &diffs, &proj);
            match path {
                Some(p) => write_file(p, &csv),
                None => emit(out, &csv),
            }
        }
    }
}
