use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use seqae::cli::{self, CliError, EXIT_DATA, EXIT_DIVERGENCE, EXIT_USAGE};
use seqae::data::{self, parse_manifest, Split};
use seqae::seq2seq::{init_params, load_checkpoint};

fn run(args: &[&str]) -> Result<String, CliError> {
    let mut out = Vec::new();
    let mut full = vec!["seqae"];
    full.extend_from_slice(args);
    cli::run(full, &mut out).map(|()| String::from_utf8(out).unwrap())
}

fn ok(args: &[&str]) -> String {
    run(args).unwrap_or_else(|e| panic!("{args:?}: {e}"))
}

fn bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_seqae")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// 8 words x 4 tokens, D = 4; two tokens per word in each split.
fn corpus(dir: &Path) -> PathBuf {
    let out = dir.join("corpus");
    ok(&[
        "synth", "--out-dir", s(&out), "--alphabet", "6", "--words", "8", "--tokens", "4", "--min-phonemes", "2",
        "--max-phonemes", "4", "--dim", "4", "--seed", "3", "--test-tokens", "2",
    ]);
    out.join("manifest.jsonl")
}

fn train(manifest: &Path, out: &Path, mode: &str, extra: &[&str]) {
    let mut args = vec![
        "train", "--manifest", s(manifest), "--out", s(out), "--mode", mode, "--seed", "7", "--hidden", "5", "--lr", "0.05",
    ];
    if !extra.contains(&"--epochs") {
        args.extend(["--epochs", "2"]);
    }
    args.extend_from_slice(extra);
    ok(&args);
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

/// Writes a manifest whose segments are single 1-D frames.
fn scalar_manifest(dir: &Path, segments: &[(&str, &str, f64)]) -> PathBuf {
    fs::create_dir_all(dir.join("f")).unwrap();
    let mut lines = String::new();
    for (id, word, value) in segments {
        fs::write(dir.join(format!("f/{id}.csv")), format!("{value}\n")).unwrap();
        lines.push_str(&format!(
            "{{\"id\":\"{id}\",\"word\":\"{word}\",\"split\":\"test\",\"features\":\"f/{id}.csv\"}}\n"
        ));
    }
    let path = dir.join("manifest.jsonl");
    fs::write(&path, lines).unwrap();
    path
}

#[test]
fn synth_writes_600_records_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["synth", "--out-dir", s(out), "--words", "40", "--tokens", "15", "--seed", "4"]);
    }
    let ds = parse_manifest(a.join("manifest.jsonl")).unwrap();
    assert_eq!(ds.len(), 600);
    assert_eq!(ds.dim(), 13);
    assert_eq!(ds.split(Split::Test).len(), 40 * 5);
    assert_eq!(fs::read(a.join("manifest.jsonl")).unwrap(), fs::read(b.join("manifest.jsonl")).unwrap());
    for r in ds.records() {
        let rel = format!("features/{}.csv", r.id);
        assert_eq!(fs::read(a.join(&rel)).unwrap(), fs::read(b.join(&rel)).unwrap(), "{rel}");
    }
}

#[test]
fn synth_rejects_unsatisfiable_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["synth", "--out-dir", s(dir.path()), "--alphabet", "2", "--min-phonemes", "1", "--max-phonemes", "1", "--words", "3"]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
}

#[test]
fn train_modes_record_masking_probability() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let sa = dir.path().join("sa.ckpt");
    let dsa = dir.path().join("dsa.ckpt");
    train(&manifest, &sa, "sa", &[]);
    train(&manifest, &dsa, "dsa", &[]);
    assert_eq!(load_checkpoint(&sa).unwrap().training.unwrap().denoise_p, 0.0);
    assert_eq!(load_checkpoint(&dsa).unwrap().training.unwrap().denoise_p, 0.3);

    let log = fs::read_to_string(dir.path().join("sa.ckpt.loss.csv")).unwrap();
    let rows = csv_rows(&log);
    assert_eq!(rows[0], ["epoch", "mean_loss"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][0], "2");
}

#[test]
fn train_zero_epochs_keeps_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let ckpt = dir.path().join("init.ckpt");
    train(&manifest, &ckpt, "sa", &["--epochs", "0"]);
    let loaded = load_checkpoint(&ckpt).unwrap();
    assert_eq!(loaded.weights, init_params(4, 5, 7).unwrap().weights);
    assert_eq!(loaded.epochs, 0);
}

#[test]
fn train_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let ckpt = dir.path().join("x.ckpt");

    let missing_seed = bin(&["train", "--manifest", s(&manifest), "--out", s(&ckpt)]);
    assert_eq!(missing_seed.status.code(), Some(EXIT_USAGE));

    let bad_denoise = bin(&["train", "--manifest", s(&manifest), "--out", s(&ckpt), "--seed", "1", "--denoise", "1.5"]);
    assert_eq!(bad_denoise.status.code(), Some(EXIT_USAGE));

    let no_manifest = bin(&["train", "--manifest", "/nonexistent/m.jsonl", "--out", s(&ckpt), "--seed", "1"]);
    assert_eq!(no_manifest.status.code(), Some(EXIT_DATA));

    let diverge = bin(&[
        "train", "--manifest", s(&manifest), "--out", s(&ckpt), "--seed", "1", "--hidden", "4", "--lr", "1e200", "--no-clip",
        "--epochs", "5",
    ]);
    assert_eq!(diverge.status.code(), Some(EXIT_DIVERGENCE));
    let stderr = String::from_utf8_lossy(&diverge.stderr);
    assert!(stderr.contains("epoch"), "{stderr}");
    assert!(!ckpt.exists());
}

#[test]
fn encode_checkpoint_and_naive_widths() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let ckpt = dir.path().join("sa.ckpt");
    train(&manifest, &ckpt, "sa", &[]);

    let z = dir.path().join("z.csv");
    ok(&["encode", "--manifest", s(&manifest), "--checkpoint", s(&ckpt), "--out", s(&z)]);
    let rows = csv_rows(&fs::read_to_string(&z).unwrap());
    assert_eq!(rows[0].len(), 2 + 5);
    assert_eq!(rows[0][..3], ["id", "word", "z0"]);
    assert_eq!(rows.len(), 1 + 16);

    // D = 13 data, m = 4
    let d13 = dir.path().join("d13");
    ok(&["synth", "--out-dir", s(&d13), "--words", "3", "--tokens", "3", "--seed", "1"]);
    let m13 = d13.join("manifest.jsonl");
    let ne = dir.path().join("ne.csv");
    let ne_again = dir.path().join("ne2.csv");
    for out in [&ne, &ne_again] {
        ok(&["encode", "--manifest", s(&m13), "--encoder", "ne", "--m", "4", "--out", s(out)]);
    }
    let header = fs::read_to_string(&ne).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count() - 2, 52);
    assert_eq!(fs::read(&ne).unwrap(), fs::read(&ne_again).unwrap());
}

#[test]
fn encode_rejects_width_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let ckpt = dir.path().join("sa.ckpt");
    train(&manifest, &ckpt, "sa", &["--epochs", "0"]);
    let d13 = dir.path().join("d13");
    ok(&["synth", "--out-dir", s(&d13), "--words", "2", "--tokens", "3", "--seed", "1"]);
    let out = bin(&[
        "encode", "--manifest", s(&d13.join("manifest.jsonl")), "--checkpoint", s(&ckpt), "--out",
        s(&dir.path().join("z.csv")),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
}

#[test]
fn search_excludes_query_and_honours_top() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let archive = dir.path().join("ne.csv");
    ok(&["encode", "--manifest", s(&manifest), "--split", "all", "--encoder", "ne", "--m", "3", "--out", s(&archive)]);
    let ds = parse_manifest(&manifest).unwrap();
    let query = &ds.records()[0].id;

    let text = ok(&["search", "--archive", s(&archive), "--query-id", query, "--top", "5"]);
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["rank", "id", "word", "score"]);
    assert_eq!(rows.len(), 1 + 5);
    assert!(rows[1..].iter().all(|r| &r[1] != query));
    let scores: Vec<f64> = rows[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    let all = csv_rows(&ok(&["search", "--archive", s(&archive), "--query-id", query, "--top", "1000"]));
    assert_eq!(all.len(), 1 + ds.len() - 1);

    let unknown = bin(&["search", "--archive", s(&archive), "--query-id", "nope"]);
    assert_eq!(unknown.status.code(), Some(EXIT_DATA));
}

#[test]
fn search_dtw_puts_identical_segment_first() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let ds = parse_manifest(&manifest).unwrap();
    let target = &ds.records()[5];
    let query = manifest.parent().unwrap().join("features").join(format!("{}.csv", target.id));
    let rows = csv_rows(&ok(&["search", "--manifest", s(&manifest), "--method", "dtw", "--query-features", s(&query), "--top", "3"]));
    assert_eq!(rows[1][1], target.id);
    assert_eq!(rows[1][3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows.len(), 4);
}

#[test]
fn evaluate_hand_fixture() {
    // DTW on single frames is |x - y|.
    // query a1: a2 (0.8) then b1 (1.0) -> AP 1; query a2: b1 (0.2) then a1 (0.8) -> AP 1/2
    let dir = tempfile::tempdir().unwrap();
    let manifest = scalar_manifest(dir.path(), &[("a1", "a", 0.0), ("a2", "A", 0.8), ("b1", "b", 1.0), ("c1", "c", 10.0)]);
    let out_dir = dir.path().join("report");
    let text = ok(&["evaluate", "--manifest", s(&manifest), "--dtw", "--out-dir", s(&out_dir)]);
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["method", "map", "scored_queries", "excluded_queries"]);
    assert_eq!(rows[1], ["dtw", "0.75", "2", "2"]);
    assert_eq!(fs::read_to_string(out_dir.join("comparison.csv")).unwrap(), text);

    let per_query = csv_rows(&fs::read_to_string(out_dir.join("dtw.queries.csv")).unwrap());
    assert_eq!(per_query[0], ["query_id", "word", "num_relevant", "ap"]);
    let ap: Vec<(&str, &str)> = per_query[1..].iter().map(|r| (r[0].as_str(), r[3].as_str())).collect();
    assert_eq!(ap, [("a1", "1"), ("a2", "0.5"), ("b1", ""), ("c1", "")]);
}

#[test]
fn evaluate_without_repeated_words_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = scalar_manifest(dir.path(), &[("x", "one", 0.0), ("y", "two", 1.0), ("z", "three", 2.0)]);
    let out = bin(&["evaluate", "--manifest", s(&manifest), "--dtw", "--ne", "1"]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no scorable queries"));

    let usage = bin(&["evaluate", "--manifest", s(&manifest)]);
    assert_eq!(usage.status.code(), Some(EXIT_USAGE));
}

#[test]
fn evaluate_six_method_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let sa = dir.path().join("sa.ckpt");
    let dsa = dir.path().join("dsa.ckpt");
    train(&manifest, &sa, "sa", &[]);
    train(&manifest, &dsa, "dsa", &[]);
    let out_dir = dir.path().join("cmp");
    let text = ok(&[
        "evaluate", "--manifest", s(&manifest), "--checkpoint", &format!("sa={}", s(&sa)), "--checkpoint", s(&dsa), "--ne", "4",
        "--ne", "6", "--ne", "8", "--dtw", "--out-dir", s(&out_dir),
    ]);
    let rows = csv_rows(&fs::read_to_string(out_dir.join("comparison.csv")).unwrap());
    let labels: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels, ["sa", "dsa", "ne4", "ne6", "ne8", "dtw"]);
    for r in &rows[1..] {
        let map: f64 = r[1].parse().unwrap();
        assert!((0.0..=1.0).contains(&map));
        assert_eq!(r[2], "16");
        assert!(out_dir.join(format!("{}.queries.csv", r[0])).exists());
    }
    assert_eq!(csv_rows(&text), rows);
}

#[test]
fn analyze_edit_distance_buckets() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let archive = dir.path().join("ne.csv");
    ok(&["encode", "--manifest", s(&manifest), "--encoder", "ne", "--m", "2", "--out", s(&archive)]);
    let rows = csv_rows(&ok(&["analyze", "edit-distance", "--archive", s(&archive), "--manifest", s(&manifest)]));
    assert_eq!(rows[0], ["edit_distance", "pair_count", "mean_cosine"]);
    let labels: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels, ["0", "1", "2", "3", "4", "5+"]);
    let pairs: usize = rows[1..].iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert_eq!(pairs, 16 * 15 / 2);
    // eight words with two test tokens each
    assert_eq!(rows[1][1], "8");
}

#[test]
fn analyze_edit_distance_needs_phonemes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = scalar_manifest(dir.path(), &[("a1", "a", 0.0), ("a2", "a", 1.0)]);
    let archive = dir.path().join("ne.csv");
    ok(&["encode", "--manifest", s(&manifest), "--encoder", "ne", "--m", "1", "--out", s(&archive)]);
    let out = bin(&["analyze", "edit-distance", "--archive", s(&archive), "--manifest", s(&manifest)]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
}

#[test]
fn analyze_diff_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let archive = dir.path().join("ne.csv");
    ok(&["encode", "--manifest", s(&manifest), "--encoder", "ne", "--m", "2", "--out", s(&archive)]);
    let ds = data::parse_manifest(&manifest).unwrap();
    let w0 = ds.records()[0].word.clone();
    let w1 = ds.records().iter().find(|r| r.word != w0).unwrap().word.clone();
    let pairs = format!("{w0}:{w0},{w0}:{w1},{w1}:{w0}");
    let out = dir.path().join("diff.csv");
    ok(&["analyze", "diff-vectors", "--archive", s(&archive), "--pairs", &pairs, "--out", s(&out)]);
    let rows = csv_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows[0].len(), 1 + 8 + 2);
    assert_eq!(rows[0].last().unwrap(), "proj_y");
    assert_eq!(rows[1][0], format!("{w0}:{w0}"));
    assert!(rows[1][1..9].iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    for (fwd, back) in rows[2][1..9].iter().zip(&rows[3][1..9]) {
        assert_eq!(fwd.parse::<f64>().unwrap(), -back.parse::<f64>().unwrap());
    }

    let unknown = bin(&["analyze", "diff-vectors", "--archive", s(&archive), "--pairs", &format!("{w0}:nosuchword")]);
    assert_eq!(unknown.status.code(), Some(EXIT_DATA));
    let malformed = bin(&["analyze", "diff-vectors", "--archive", s(&archive), "--pairs", "abc"]);
    assert_eq!(malformed.status.code(), Some(EXIT_USAGE));
}

#[test]
fn help_goes_to_stdout() {
    let text = ok(&["--help"]);
    for cmd in ["synth", "train", "encode", "search", "evaluate", "analyze"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
    assert!(matches!(run(&["bogus"]), Err(CliError::Usage(_))));
}
