//! Sequence-to-sequence autoencoder and its denoising variant.
//!
//! The encoder LSTM reads `x_1..x_T` from a zero state; its final hidden state
//! is the embedding `z`. The decoder LSTM also starts from zero. At step 1 it
//! reads `z` through its own input projection (`decoder.W_z`), and at every
//! later step it reads its previous output `y_{t-1}` through `decoder.W_y`.
//! Outputs are `y_t = W_out h_t + b_out`. Training minimizes
//! `Σ_t ‖x_t − y_t‖²` with plain per-sequence SGD. Gradients flow through the
//! output feedback, the `z` handoff and the encoder.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureSequence, SegmentRecord, Split};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lstm::{self, InputWeights, LstmParams, LstmState, TapeEntry};

pub const CHECKPOINT_VERSION: u32 = 1;
const INIT_RANGE: f64 = 0.08;

/// All trainable tensors of the autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub encoder: LstmParams,
    /// Decoder input projection used at step 1, reading `z` (width `d`).
    pub decoder_z: InputWeights,
    /// Decoder cell; its own input projection reads `y_{t-1}` (width `D`).
    pub decoder: LstmParams,
    pub out_w: Matrix,
    pub out_b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Matrix(usize, usize),
    Vector(usize),
}

impl Weights {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Weights {
            encoder: LstmParams::zeros(input_dim, hidden_dim),
            decoder_z: InputWeights::zeros(hidden_dim, hidden_dim),
            decoder: LstmParams::zeros(input_dim, hidden_dim),
            out_w: Matrix::zeros(input_dim, hidden_dim),
            out_b: vec![0.0; input_dim],
        }
    }

    /// Every tensor with its checkpoint name, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, Shape, &[f64])> {
        let mut out: Vec<(String, Shape, &[f64])> = Vec::new();
        let shape = |m: &Matrix| Shape::Matrix(m.rows(), m.cols());
        for (n, m) in self.encoder.input.named() {
            out.push((format!("encoder.{n}"), shape(m), m.as_slice()));
        }
        for (n, m) in self.encoder.recurrent.named_matrices() {
            out.push((format!("encoder.{n}"), shape(m), m.as_slice()));
        }
        for (n, v) in self.encoder.recurrent.named_vectors() {
            out.push((format!("encoder.{n}"), Shape::Vector(v.len()), v.as_slice()));
        }
        for (n, m) in self.decoder_z.named() {
            out.push((format!("decoder.W_z.{n}"), shape(m), m.as_slice()));
        }
        for (n, m) in self.decoder.input.named() {
            out.push((format!("decoder.W_y.{n}"), shape(m), m.as_slice()));
        }
        for (n, m) in self.decoder.recurrent.named_matrices() {
            out.push((format!("decoder.{n}"), shape(m), m.as_slice()));
        }
        for (n, v) in self.decoder.recurrent.named_vectors() {
            out.push((format!("decoder.{n}"), Shape::Vector(v.len()), v.as_slice()));
        }
        out.push(("output.W".into(), shape(&self.out_w), self.out_w.as_slice()));
        out.push(("output.b".into(), Shape::Vector(self.out_b.len()), &self.out_b));
        out
    }

    /// Mutable counterpart of [`Weights::tensors`], same order and names.
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        for (n, m) in self.encoder.input.named_mut() {
            out.push((format!("encoder.{n}"), m.as_mut_slice()));
        }
        for (n, v) in self.encoder.recurrent.slices_mut() {
            out.push((format!("encoder.{n}"), v));
        }
        for (n, m) in self.decoder_z.named_mut() {
            out.push((format!("decoder.W_z.{n}"), m.as_mut_slice()));
        }
        for (n, m) in self.decoder.input.named_mut() {
            out.push((format!("decoder.W_y.{n}"), m.as_mut_slice()));
        }
        for (n, v) in self.decoder.recurrent.slices_mut() {
            out.push((format!("decoder.{n}"), v));
        }
        out.push(("output.W".into(), self.out_w.as_mut_slice()));
        out.push(("output.b".into(), self.out_b.as_mut_slice()));
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, _, v)| v.len()).sum()
    }

    pub fn fill_zero(&mut self) {
        for (_, v) in self.tensors_mut() {
            v.fill(0.0);
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(_, _, v)| v.iter())
            .map(|g| g * g)
            .sum()
    }

    fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, _, v)| v.iter().all(|x| x.is_finite()))
    }
}

/// Hyperparameters of the most recent training run, kept for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub lr: f64,
    pub denoise_p: f64,
    pub clip_norm: Option<f64>,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub seed: u64,
    /// Total epochs trained since initialization.
    pub epochs: usize,
    pub training: Option<TrainingRecord>,
    pub weights: Weights,
}

/// Fixed-dimensional representation of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Uniform `[-0.08, 0.08]` weights, zero biases.
pub fn init_params(input_dim: usize, hidden_dim: usize, seed: u64) -> Result<ModelParams> {
    if input_dim == 0 || hidden_dim == 0 {
        return Err(Error::Invalid(format!(
            "model dimensions must be at least 1 (input {input_dim}, hidden {hidden_dim})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Weights::zeros(input_dim, hidden_dim);
    for (name, values) in weights.tensors_mut() {
        let is_bias = name.ends_with(".b") || name.rsplit('.').next().is_some_and(|n| n.starts_with("b_"));
        if !is_bias {
            values
                .iter_mut()
                .for_each(|v| *v = rng.random_range(-INIT_RANGE..=INIT_RANGE));
        }
    }
    Ok(ModelParams {
        input_dim,
        hidden_dim,
        seed,
        epochs: 0,
        training: None,
        weights,
    })
}

impl ModelParams {
    fn check_input(&self, x: &FeatureSequence) -> Result<()> {
        if x.dim() != self.input_dim {
            return Err(Error::dim("sequence width vs. model input", self.input_dim, x.dim()));
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.weights.num_params()
    }
}

pub fn encode(params: &ModelParams, x: &FeatureSequence) -> Result<Embedding> {
    params.check_input(x)?;
    let mut state = LstmState::zeros(params.hidden_dim);
    for frame in x.frames() {
        state = lstm::cell_forward(&params.weights.encoder, frame, &state)?.0;
    }
    Ok(Embedding(state.h))
}

pub fn decode(params: &ModelParams, z: &Embedding, length: usize) -> Result<FeatureSequence> {
    if length == 0 {
        return Err(Error::Invalid("decode length must be at least 1".into()));
    }
    if z.dim() != params.hidden_dim {
        return Err(Error::dim("embedding width", params.hidden_dim, z.dim()));
    }
    let pass = decode_pass(&params.weights, &z.0, length)?;
    FeatureSequence::from_rows(&pass.ys)
}

struct DecoderPass {
    tape: Vec<TapeEntry>,
    hs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
}

fn decode_pass(w: &Weights, z: &[f64], length: usize) -> Result<DecoderPass> {
    let hidden = w.decoder.hidden_dim();
    let mut state = LstmState::zeros(hidden);
    let mut tape = Vec::with_capacity(length);
    let mut hs = Vec::with_capacity(length);
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(length);
    for t in 0..length {
        let (next, entry) = match ys.last() {
            None => lstm::step_forward(&w.decoder_z, &w.decoder.recurrent, z, &state)?,
            Some(prev_y) => lstm::cell_forward(&w.decoder, prev_y, &state)?,
        };
        let mut y = w.out_b.clone();
        w.out_w.mul_vec_add(&next.h, &mut y);
        debug_assert_eq!(tape.len(), t);
        tape.push(entry);
        hs.push(next.h.clone());
        ys.push(y);
        state = next;
    }
    Ok(DecoderPass { tape, hs, ys })
}

/// `Σ_t ‖x_t − y_t‖²`.
pub fn reconstruction_loss(x: &FeatureSequence, y: &FeatureSequence) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dim("reconstruction length", x.len(), y.len()));
    }
    if x.dim() != y.dim() {
        return Err(Error::dim("reconstruction width", x.dim(), y.dim()));
    }
    Ok(x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Zero-masking corruption: each scalar is independently zeroed with probability `p`.
pub fn corrupt_zero_mask(x: &FeatureSequence, p: f64, rng: &mut impl Rng) -> Result<FeatureSequence> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("corruption probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(x.clone());
    }
    let mut m = x.as_matrix().clone();
    for v in m.as_mut_slice() {
        if rng.random::<f64>() < p {
            *v = 0.0;
        }
    }
    FeatureSequence::from_matrix(m)
}

/// Forward and backward pass for one sequence. `input` is what the encoder
/// reads (possibly corrupted), `target` what the decoder must reproduce.
/// Gradients are added into `grads`; the loss is returned.
pub fn loss_and_gradient(
    params: &ModelParams,
    input: &FeatureSequence,
    target: &FeatureSequence,
    grads: &mut Weights,
) -> Result<f64> {
    params.check_input(input)?;
    params.check_input(target)?;
    if input.len() != target.len() {
        return Err(Error::dim("input vs. target length", target.len(), input.len()));
    }
    let w = &params.weights;
    let (enc_states, enc_tape) =
        lstm::forward_sequence(&w.encoder, input.frames(), LstmState::zeros(params.hidden_dim))?;
    let z = &enc_states.last().expect("T >= 1").h;
    let dec = decode_pass(w, z, target.len())?;

    let mut loss = 0.0;
    for (y, x) in dec.ys.iter().zip(target.frames()) {
        loss += y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }

    let hidden = params.hidden_dim;
    let mut carry_h = vec![0.0; hidden];
    let mut carry_c = vec![0.0; hidden];
    // gradient reaching y_t through step t+1's input
    let mut feedback = vec![0.0; params.input_dim];
    let mut grad_z = Vec::new();
    for t in (0..dec.ys.len()).rev() {
        let dy: Vec<f64> = dec.ys[t]
            .iter()
            .zip(target.frame(t))
            .zip(&feedback)
            .map(|((y, x), fb)| 2.0 * (y - x) + fb)
            .collect();
        grads.out_w.add_outer(&dy, &dec.hs[t]);
        for (b, d) in grads.out_b.iter_mut().zip(&dy) {
            *b += d;
        }
        let mut dh = carry_h;
        w.out_w.tr_mul_vec_add(&dy, &mut dh);
        let step = if t == 0 {
            lstm::step_backward(
                &w.decoder_z,
                &w.decoder.recurrent,
                &dec.tape[t],
                &dh,
                &carry_c,
                &mut grads.decoder_z,
                &mut grads.decoder.recurrent,
            )?
        } else {
            lstm::cell_backward(&w.decoder, &dec.tape[t], &dh, &carry_c, &mut grads.decoder)?
        };
        if t == 0 {
            grad_z = step.x;
        } else {
            feedback = step.x;
        }
        carry_h = step.h_prev;
        carry_c = step.c_prev;
    }

    let mut upstream = vec![vec![0.0; hidden]; enc_tape.len()];
    *upstream.last_mut().expect("T >= 1") = grad_z;
    lstm::backward_sequence(&w.encoder, &enc_tape, &upstream, &mut grads.encoder)?;
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    /// Zero-masking probability; 0 trains a plain autoencoder.
    pub denoise_p: f64,
    /// Global-norm gradient clip threshold; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.3,
            epochs: 500,
            denoise_p: 0.0,
            clip_norm: Some(5.0),
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Invalid(format!("learning rate must be finite and >= 0, got {}", self.lr)));
        }
        if !(0.0..=1.0).contains(&self.denoise_p) {
            return Err(Error::Invalid(format!("denoise probability {} outside [0, 1]", self.denoise_p)));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Invalid(format!("clip norm must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean per-sequence loss of each epoch, measured before each update.
    pub loss_log: Vec<f64>,
}

/// Trains on the dataset's train split.
pub fn train_dataset(params: ModelParams, dataset: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    train(params, &dataset.split(Split::Train), config)
}

pub fn train(mut params: ModelParams, records: &[&SegmentRecord], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if records.is_empty() {
        return Err(Error::Invalid("training split is empty".into()));
    }
    for r in records {
        params.check_input(&r.features).map_err(|e| Error::Ingest {
            id: r.id.clone(),
            message: e.to_string(),
        })?;
    }

    let mut order_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(config.seed);
    noise_rng.set_stream(1);

    let mut grads = Weights::zeros(params.input_dim, params.hidden_dim);
    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut loss_log = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut order_rng);
        let mut total = 0.0;
        for &idx in &order {
            let rec = records[idx];
            let input = corrupt_zero_mask(&rec.features, config.denoise_p, &mut noise_rng)?;
            grads.fill_zero();
            let loss = loss_and_gradient(&params, &input, &rec.features, &mut grads)?;
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    record: rec.id.clone(),
                    loss,
                });
            }
            total += loss;
            let mut scale = config.lr;
            if let Some(clip) = config.clip_norm {
                let norm = grads.squared_norm().sqrt();
                if norm > clip {
                    scale *= clip / norm;
                }
            }
            if scale != 0.0 {
                for ((_, w), (_, _, g)) in params.weights.tensors_mut().into_iter().zip(grads.tensors()) {
                    for (wv, gv) in w.iter_mut().zip(g) {
                        *wv -= scale * gv;
                    }
                }
            }
        }
        loss_log.push(total / records.len() as f64);
    }
    params.epochs += config.epochs;
    params.training = Some(TrainingRecord {
        lr: config.lr,
        denoise_p: config.denoise_p,
        clip_norm: config.clip_norm,
        epochs: config.epochs,
    });
    Ok(TrainOutcome { params, loss_log })
}

/// Writes the loss log as CSV with header `epoch,mean_loss` (epochs 1-based).
pub fn write_loss_log(path: impl AsRef<Path>, log: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from("epoch,mean_loss\n");
    for (i, l) in log.iter().enumerate() {
        text.push_str(&format!("{},{}\n", i + 1, l));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TensorValue {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    input_dim: usize,
    hidden_dim: usize,
    seed: u64,
    epochs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training: Option<TrainingRecord>,
    params: BTreeMap<String, TensorValue>,
}

pub fn checkpoint_to_string(params: &ModelParams) -> Result<String> {
    if !params.weights.is_finite() {
        return Err(Error::Checkpoint("refusing to save non-finite parameters".into()));
    }
    let tensors = params
        .weights
        .tensors()
        .into_iter()
        .map(|(name, shape, values)| {
            let value = match shape {
                Shape::Vector(_) => TensorValue::Vector(values.to_vec()),
                Shape::Matrix(_, cols) => TensorValue::Matrix(values.chunks(cols).map(<[f64]>::to_vec).collect()),
            };
            (name, value)
        })
        .collect();
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        input_dim: params.input_dim,
        hidden_dim: params.hidden_dim,
        seed: params.seed,
        epochs: params.epochs,
        training: params.training.clone(),
        params: tensors,
    };
    let mut s = serde_json::to_string(&file).map_err(|e| Error::Checkpoint(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn checkpoint_from_str(text: &str) -> Result<ModelParams> {
    let file: CheckpointFile =
        serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("malformed checkpoint: {e}")))?;
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {} (expected {CHECKPOINT_VERSION})",
            file.version
        )));
    }
    if file.input_dim == 0 || file.hidden_dim == 0 {
        return Err(Error::Checkpoint("zero model dimension".into()));
    }
    let mut weights = Weights::zeros(file.input_dim, file.hidden_dim);
    let shapes: Vec<Shape> = weights.tensors().iter().map(|(_, s, _)| *s).collect();
    let mut remaining = file.params;
    for ((name, dest), shape) in weights.tensors_mut().into_iter().zip(shapes) {
        let value = remaining
            .remove(&name)
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))?;
        let flat = match (value, shape) {
            (TensorValue::Vector(v), Shape::Vector(n)) if v.len() == n => v,
            (TensorValue::Matrix(rows), Shape::Matrix(r, c))
                if rows.len() == r && rows.iter().all(|row| row.len() == c) =>
            {
                rows.concat()
            }
            _ => return Err(Error::Checkpoint(format!("tensor {name} does not have shape {shape:?}"))),
        };
        dest.copy_from_slice(&flat);
    }
    if let Some(extra) = remaining.keys().next() {
        return Err(Error::Checkpoint(format!("unexpected tensor {extra}")));
    }
    Ok(ModelParams {
        input_dim: file.input_dim,
        hidden_dim: file.hidden_dim,
        seed: file.seed,
        epochs: file.epochs,
        training: file.training,
        weights,
    })
}

pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = checkpoint_to_string(params)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_str(&text)
}
