//! Fixed-dimensional embeddings of variable-length feature sequences.
//!
//! A sequence-to-sequence autoencoder (an LSTM encoder feeding an LSTM decoder
//! that reconstructs its own input) compresses each sequence into the encoder's
//! final hidden state. The crate also carries the pieces needed to use and
//! judge those embeddings:
//!
//! - [`data`]: manifest and feature-file ingestion, plus a seeded synthetic
//!   phoneme-string corpus generator.
//! - [`lstm`]: a peephole LSTM cell with an exact analytic backward pass.
//! - [`seq2seq`]: the autoencoder, its denoising variant, SGD training and
//!   JSON checkpoints.
//! - [`baselines`]: the segment-averaging encoder and frame-level DTW.
//! - [`retrieval`]: cosine ranking over an embedding archive.
//! - [`eval`]: phoneme edit distance, similarity-by-distance tables, MAP,
//!   word difference vectors and a 2-D PCA projection.
//! - [`cli`]: the `seqae` command-line front end.

pub mod baselines;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod lstm;
pub mod retrieval;
pub mod seq2seq;

pub use error::{Error, Result};
