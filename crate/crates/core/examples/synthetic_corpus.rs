//! Generates a synthetic phoneme-string corpus, writes it as a manifest plus
//! per-segment CSV feature files, and reads it back.
//!
//! ```text
//! cargo run --example synthetic_corpus -- [out-dir]
//! ```

use std::collections::BTreeMap;

use seqae::data::{generate_synthetic_corpus, parse_manifest, write_manifest, Split, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig {
        num_words: 12,
        tokens_per_word: 6,
        test_tokens: 2,
        seed: 3,
        ..SynthConfig::default()
    };
    let corpus = generate_synthetic_corpus(&config)?;
    let ds = &corpus.dataset;
    println!(
        "{} records ({} train / {} test), D = {}, {} phoneme prototypes",
        ds.len(),
        ds.split(Split::Train).len(),
        ds.split(Split::Test).len(),
        ds.dim(),
        corpus.prototypes.rows()
    );

    let mut lengths: BTreeMap<usize, usize> = BTreeMap::new();
    for r in ds.records() {
        *lengths.entry(r.features.len()).or_default() += 1;
    }
    println!("frames per segment: {lengths:?}");
    for r in ds.records().iter().step_by(config.tokens_per_word).take(5) {
        let phonemes = r.phonemes.as_deref().unwrap_or_default().join(" ");
        println!("  {:<12} {:<8} /{phonemes}/  T = {}", r.id, r.word, r.features.len());
    }

    let dir = match std::env::args().nth(1) {
        Some(d) => std::path::PathBuf::from(d),
        None => std::env::temp_dir().join("seqae-synthetic"),
    };
    let manifest = write_manifest(ds, &dir)?;
    let back = parse_manifest(&manifest)?;
    assert_eq!(back.len(), ds.len());
    let worst = ds
        .records()
        .iter()
        .zip(back.records())
        .flat_map(|(a, b)| a.features.as_slice().iter().zip(b.features.as_slice()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    println!("wrote {} and read it back; largest feature difference {worst:e}", manifest.display());
    Ok(())
}
