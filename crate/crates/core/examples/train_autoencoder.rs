//! Trains a small sequence-to-sequence autoencoder, saves and reloads the
//! checkpoint, and reconstructs one test segment from its embedding.
//!
//! ```text
//! cargo run --release --example train_autoencoder -- [epochs]
//! ```

use seqae::data::{generate_synthetic, Split, SynthConfig};
use seqae::seq2seq::{
    decode, encode, init_params, load_checkpoint, reconstruction_loss, save_checkpoint, train_dataset, TrainConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(200);
    let dataset = generate_synthetic(&SynthConfig {
        num_words: 10,
        tokens_per_word: 6,
        test_tokens: 2,
        dim: 6,
        seed: 1,
        ..SynthConfig::default()
    })?;
    let params = init_params(dataset.dim(), 24, 5)?;
    println!("{} parameters, {} training sequences", params.num_params(), dataset.split(Split::Train).len());

    let config = TrainConfig {
        lr: 0.05,
        epochs,
        seed: 5,
        ..TrainConfig::default()
    };
    let outcome = train_dataset(params, &dataset, &config)?;
    for (e, l) in outcome.loss_log.iter().enumerate() {
        if e % 25 == 0 || e + 1 == outcome.loss_log.len() {
            println!("epoch {:>4}  mean loss {l:.4}", e + 1);
        }
    }

    let path = std::env::temp_dir().join("seqae-example.ckpt");
    save_checkpoint(&outcome.params, &path)?;
    let model = load_checkpoint(&path)?;
    assert_eq!(model, outcome.params);
    println!("checkpoint round-trips through {}", path.display());

    let seg = dataset.split(Split::Test)[0];
    let z = encode(&model, &seg.features)?;
    let y = decode(&model, &z, seg.features.len())?;
    println!(
        "{} ({}): T = {}, |z| = {}, reconstruction loss {:.4}",
        seg.id,
        seg.word,
        seg.features.len(),
        z.dim(),
        reconstruction_loss(&seg.features, &y)?
    );
    Ok(())
}
