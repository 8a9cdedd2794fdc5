//! Reference sequence models and decoding.
//!
//! [`NGramModel`] is an add-λ smoothed k-gram learner trained on probe
//! corpora; [`ChainModel`] exposes the generating chain itself through the
//! same [`SequenceModel`] interface so decoding can be checked against the
//! ground truth.

mod chain_model;
mod decode;
mod ngram;
mod temperature;

pub use chain_model::{wrap_chain_as_model, ChainModel};
pub use decode::{argmax, decode, decode_batch, Decoding, DecodingConfig};
pub use ngram::{fit, ContextCounts, ModelFile, NGramModel};
pub use temperature::apply_temperature;

use crate::markov::Token;

/// Anything that yields a next-token distribution from a context window.
pub trait SequenceModel: Send + Sync {
    fn vocab_size(&self) -> usize;

    /// Number of trailing tokens the model conditions on.
    fn context_len(&self) -> usize;

    /// Distribution over the next token given the tokens so far. Only the
    /// last [`SequenceModel::context_len`] tokens are used; shorter contexts
    /// fall back to the uniform distribution.
    fn next_token_distribution(&self, context: &[Token]) -> Vec<f64>;
}

pub(crate) fn uniform(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}
