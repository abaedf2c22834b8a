//! Query-by-example search: encode every archive segment once, then rank the
//! archive against a spoken query by cosine similarity. DTW over raw frames
//! is shown alongside for the same query.

use seqae::baselines::DtwOptions;
use seqae::data::{generate_synthetic, Split, SynthConfig};
use seqae::retrieval::{build_archive, rank, rank_dtw, SegmentEncoder};
use seqae::seq2seq::{init_params, train_dataset, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dataset = generate_synthetic(&SynthConfig {
        num_words: 15,
        tokens_per_word: 8,
        test_tokens: 4,
        dim: 6,
        seed: 9,
        ..SynthConfig::default()
    })?;
    let config = TrainConfig { lr: 0.05, epochs: 40, seed: 2, ..TrainConfig::default() };
    let model = train_dataset(init_params(dataset.dim(), 24, 2)?, &dataset, &config)?.params;

    let test = dataset.split(Split::Test);
    let archive = build_archive(&model, test.iter().copied())?;
    let query = test[0];
    println!("query {} ({}), archive of {} segments\n", query.id, query.word, archive.len());

    let ranked = rank(&model.encode(&query.features)?, &archive, Some(&query.id), Some(6))?;
    println!("cosine");
    for (k, hit) in ranked.items.iter().enumerate() {
        let word = &archive.get(&hit.id).unwrap().word;
        let mark = if *word == query.word { "*" } else { " " };
        println!("{:>2} {mark} {:<12} {:<8} {:.4}", k + 1, hit.id, word, hit.score);
    }

    let ranked = rank_dtw(&query.features, test.iter().copied(), Some(&query.id), Some(6), DtwOptions::default())?;
    println!("\ndtw (score = -distance)");
    for (k, hit) in ranked.items.iter().enumerate() {
        let word = &dataset.get(&hit.id).unwrap().word;
        let mark = if *word == query.word { "*" } else { " " };
        println!("{:>2} {mark} {:<12} {:<8} {:.4}", k + 1, hit.id, word, hit.score);
    }
    Ok(())
}
