//! The two reference methods: the segment-averaging naive encoder and
//! frame-level dynamic time warping.

use seqae::baselines::{dtw_align, dtw_distance_with, naive_encode, DtwOptions};
use seqae::data::FeatureSequence;

fn seq(values: &[f64]) -> FeatureSequence {
    FeatureSequence::from_rows(&values.iter().map(|v| vec![*v]).collect::<Vec<_>>()).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = seq(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    for m in [1, 2, 4, 6, 8] {
        let e = naive_encode(&x, m)?;
        println!("naive m = {m}: {:?}", e.v);
    }

    let a = seq(&[0.0, 1.0, 2.0, 3.0]);
    let b = seq(&[0.0, 0.0, 1.0, 1.0, 2.0, 3.0, 3.0]);
    let al = dtw_align(&a, &b)?;
    println!("\nDTW cost {} over {} aligned frame pairs", al.cost, al.path.len());
    println!("path {:?}", al.path);
    println!("normalized {}", dtw_distance_with(&a, &b, DtwOptions { normalize: true })?);

    let shifted = seq(&[1.0, 2.0, 3.0, 4.0]);
    println!("a vs a+1: {}", dtw_distance_with(&a, &shifted, DtwOptions::default())?);
    Ok(())
}
