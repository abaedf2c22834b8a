//! Mean cosine similarity between embeddings of segment pairs, grouped by the
//! phoneme edit distance between their words. Compares a trained autoencoder
//! with the untrained network it started from.
//!
//! ```text
//! cargo run --release --example similarity_by_edit_distance -- [epochs]
//! ```

use seqae::data::{generate_synthetic, Split, SynthConfig};
use seqae::eval::similarity_table;
use seqae::retrieval::build_archive;
use seqae::seq2seq::{init_params, train_dataset, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(60);
    let dataset = generate_synthetic(&SynthConfig {
        num_words: 20,
        tokens_per_word: 8,
        test_tokens: 4,
        dim: 8,
        seed: 21,
        ..SynthConfig::default()
    })?;
    let untrained = init_params(dataset.dim(), 32, 7)?;
    let config = TrainConfig { lr: 0.05, epochs, seed: 7, ..TrainConfig::default() };
    let trained = train_dataset(untrained.clone(), &dataset, &config)?.params;

    let test = dataset.split(Split::Test);
    for (label, model) in [("untrained", &untrained), ("trained", &trained)] {
        let archive = build_archive(model, test.iter().copied())?;
        let table = similarity_table(&archive, &dataset, 3)?;
        println!("{label}\n{}", table.to_csv());
    }
    Ok(())
}
