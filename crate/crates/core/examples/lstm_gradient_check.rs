//! Runs a peephole LSTM over a short sequence, backpropagates through time,
//! and compares every parameter gradient with central differences.
//!
//! The loss is `sum_t r_t . h_t` for fixed random vectors `r_t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqae::lstm::{backward_sequence, forward_sequence, LstmParams, LstmState};

fn params_mut(p: &mut LstmParams) -> Vec<(String, &mut [f64])> {
    let mut out: Vec<(String, &mut [f64])> = p
        .input
        .named_mut()
        .into_iter()
        .map(|(n, m)| (n.to_string(), m.as_mut_slice()))
        .collect();
    out.extend(p.recurrent.slices_mut().into_iter().map(|(n, s)| (n.to_string(), s)));
    out
}

fn loss(p: &LstmParams, xs: &[Vec<f64>], rs: &[Vec<f64>]) -> f64 {
    let (states, _) = forward_sequence(p, xs.iter().map(Vec::as_slice), LstmState::zeros(p.hidden_dim())).unwrap();
    states.iter().zip(rs).map(|(s, r)| s.h.iter().zip(r).map(|(a, b)| a * b).sum::<f64>()).sum()
}

fn main() {
    let (input, hidden, steps) = (3, 4, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut p = LstmParams::zeros(input, hidden);
    for (_, values) in params_mut(&mut p) {
        values.iter_mut().for_each(|v| *v = rng.random_range(-0.5..0.5));
    }
    let mut draw = |n: usize| -> Vec<Vec<f64>> { (0..steps).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect() };
    let xs = draw(input);
    let rs = draw(hidden);

    let (_, tape) = forward_sequence(&p, xs.iter().map(Vec::as_slice), LstmState::zeros(hidden)).unwrap();
    let mut grads = LstmParams::zeros(input, hidden);
    backward_sequence(&p, &tape, &rs, &mut grads).unwrap();

    let eps = 1e-5;
    let analytic: Vec<(String, Vec<f64>)> = params_mut(&mut grads).into_iter().map(|(n, g)| (n, g.to_vec())).collect();
    println!("{:<6} {:>6} {:>12}", "tensor", "size", "max |diff|");
    for (k, (name, g)) in analytic.iter().enumerate() {
        let mut worst = 0.0f64;
        for (j, gj) in g.iter().enumerate() {
            let mut plus = p.clone();
            params_mut(&mut plus)[k].1[j] += eps;
            let mut minus = p.clone();
            params_mut(&mut minus)[k].1[j] -= eps;
            let numeric = (loss(&plus, &xs, &rs) - loss(&minus, &xs, &rs)) / (2.0 * eps);
            worst = worst.max((numeric - gj).abs());
        }
        println!("{name:<6} {:>6} {worst:>12.2e}", g.len());
    }
}
