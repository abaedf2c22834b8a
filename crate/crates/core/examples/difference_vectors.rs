//! Differences between per-word mean embeddings for word pairs that differ in
//! one phoneme, projected onto their first two principal components.
//!
//! Pairs sharing the same substitution should produce similar difference
//! vectors after training.

use seqae::data::{generate_synthetic_corpus, Split, SynthConfig};
use seqae::eval::{difference_vectors_csv, project_2d, word_difference_vectors};
use seqae::retrieval::build_archive;
use seqae::seq2seq::{init_params, train_dataset, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        num_words: 30,
        tokens_per_word: 8,
        test_tokens: 4,
        dim: 8,
        seed: 21,
        ..SynthConfig::default()
    })?;
    let dataset = &corpus.dataset;

    let mut words: Vec<(String, Vec<String>)> = dataset
        .records()
        .iter()
        .map(|r| (r.word.clone(), r.phonemes.clone().unwrap_or_default()))
        .collect();
    words.dedup_by(|a, b| a.0 == b.0);
    let mut pairs = Vec::new();
    for (i, (wa, pa)) in words.iter().enumerate() {
        for (wb, pb) in &words[i + 1..] {
            let diff = pa.iter().zip(pb).filter(|(x, y)| x != y).count();
            if pa.len() == pb.len() && diff == 1 {
                pairs.push((wa.clone(), wb.clone()));
            }
        }
    }
    if pairs.len() < 2 {
        println!("corpus has {} one-substitution pairs; need two", pairs.len());
        return Ok(());
    }
    println!("{} one-substitution word pairs", pairs.len());

    let config = TrainConfig { lr: 0.05, epochs: 60, seed: 7, ..TrainConfig::default() };
    let model = train_dataset(init_params(dataset.dim(), 16, 7)?, dataset, &config)?.params;
    let archive = build_archive(&model, dataset.split(Split::Test))?;
    let diffs = word_difference_vectors(&archive, &pairs)?;
    let proj = project_2d(&diffs)?;
    print!("{}", difference_vectors_csv(&pairs, &diffs, &proj));
    Ok(())
}
