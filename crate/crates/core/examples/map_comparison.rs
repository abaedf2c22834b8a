//! Retrieval comparison on a synthetic corpus: trained autoencoder (SA),
//! denoising autoencoder (DSA), the untrained network, segment-averaging
//! encoders with m = 4, 6, 8, and frame-level DTW.
//!
//! ```text
//! cargo run --release --example map_comparison -- [epochs] [hidden] [corpus-seed]
//! ```

use std::time::Instant;

use seqae::baselines::DtwOptions;
use seqae::data::{generate_synthetic, Split, SynthConfig};
use seqae::eval::{mean_average_precision, similarity_table, RetrievalMethod};
use seqae::retrieval::{build_archive, NaiveEncoder};
use seqae::seq2seq::{init_params, train_dataset, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(300);
    let hidden: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(32);
    let corpus_seed: u64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(21);

    let config = SynthConfig {
        seed: corpus_seed,
        ..SynthConfig::default()
    };
    let dataset = generate_synthetic(&config)?;
    let test = dataset.split(Split::Test);
    println!(
        "corpus: {} records, {} test, D = {}",
        dataset.len(),
        test.len(),
        dataset.dim()
    );

    let untrained = init_params(dataset.dim(), hidden, 7)?;
    let base = TrainConfig {
        lr: 0.05,
        epochs,
        clip_norm: Some(5.0),
        seed: 7,
        ..TrainConfig::default()
    };

    let (sa, dsa) = std::thread::scope(|s| {
        let sa = s.spawn(|| {
            let t = Instant::now();
            let out = train_dataset(untrained.clone(), &dataset, &base);
            (out, t.elapsed())
        });
        let dsa = s.spawn(|| {
            let cfg = TrainConfig { denoise_p: 0.3, ..base.clone() };
            train_dataset(untrained.clone(), &dataset, &cfg)
        });
        (sa.join().unwrap(), dsa.join().unwrap())
    });
    let (sa, took) = sa;
    let (sa, dsa) = (sa?, dsa?);
    println!("trained {epochs} epochs in {took:.1?}");
    let log = &sa.loss_log;
    println!(
        "SA loss: first {:.4}, last {:.4}",
        log.first().unwrap_or(&f64::NAN),
        log.last().unwrap_or(&f64::NAN)
    );

    println!("\nmethod,map");
    let methods: Vec<(String, RetrievalMethod)> = vec![
        ("untrained".into(), RetrievalMethod::Embedding(&untrained)),
        ("sa".into(), RetrievalMethod::Embedding(&sa.params)),
        ("dsa".into(), RetrievalMethod::Embedding(&dsa.params)),
    ];
    let ne: Vec<NaiveEncoder> = [4, 6, 8]
        .iter()
        .map(|&m| NaiveEncoder { input_dim: dataset.dim(), m })
        .collect();
    let mut methods = methods;
    for enc in &ne {
        methods.push((format!("ne{}", enc.m), RetrievalMethod::Embedding(enc)));
    }
    methods.push(("dtw".into(), RetrievalMethod::Dtw(DtwOptions::default())));
    for (label, method) in &methods {
        let report = mean_average_precision(method, &test)?;
        println!("{label},{:.4}", report.map.unwrap_or(f64::NAN));
    }

    for (label, params) in [("sa", &sa.params), ("dsa", &dsa.params)] {
        let archive = build_archive(params, test.iter().copied())?;
        println!("\n{label} similarity by edit distance\n{}", similarity_table(&archive, &dataset, 3)?.to_csv());
    }
    Ok(())
}
