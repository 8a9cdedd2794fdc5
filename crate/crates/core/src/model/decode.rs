use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::temperature::apply_temperature;
use super::SequenceModel;
use crate::error::{Error, Result};
use crate::markov::{Token, TokenSequence};
use crate::rng::{sample_categorical, substream};

/// Greedy decoding is its own mode rather than the `T → 0` limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Decoding {
    Greedy,
    Sampling { temperature: f64 },
}

impl Decoding {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Decoding::Greedy => Ok(()),
            Decoding::Sampling { temperature } if temperature > 0.0 && temperature.is_finite() => {
                Ok(())
            }
            Decoding::Sampling { temperature } => Err(Error::param(
                "temperature",
                format!("must be positive and finite, got {temperature}"),
            )),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Decoding::Greedy => "greedy".to_string(),
            Decoding::Sampling { temperature } => format!("T={temperature}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingConfig {
    #[serde(flatten)]
    pub decoding: Decoding,
    pub max_new_tokens: usize,
    /// Base seed for [`decode_batch`].
    pub seed: u64,
}

impl DecodingConfig {
    pub fn greedy(max_new_tokens: usize) -> Self {
        Self {
            decoding: Decoding::Greedy,
            max_new_tokens,
            seed: 0,
        }
    }

    pub fn sampling(temperature: f64, max_new_tokens: usize, seed: u64) -> Self {
        Self {
            decoding: Decoding::Sampling { temperature },
            max_new_tokens,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.decoding.validate()?;
        if self.max_new_tokens == 0 {
            return Err(Error::param("max_new_tokens", "must be at least 1"));
        }
        Ok(())
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate().skip(1) {
        if x > p[best] {
            best = i;
        }
    }
    best
}

/// Extends `prompt` by `max_new_tokens` tokens.
///
/// Greedy mode consumes no randomness. Sampling draws one uniform per token.
pub fn decode<M: SequenceModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    prompt: &TokenSequence,
    config: &DecodingConfig,
    rng: &mut R,
) -> Result<TokenSequence> {
    config.validate()?;
    prompt.check_vocab(model.vocab_size())?;
    let k = model.context_len();
    let mut out = prompt.clone();
    for _ in 0..config.max_new_tokens {
        let ctx = out.tokens();
        let window = &ctx[ctx.len().saturating_sub(k)..];
        let p = model.next_token_distribution(window);
        let next = match config.decoding {
            Decoding::Greedy => argmax(&p),
            Decoding::Sampling { temperature } => {
                sample_categorical(&apply_temperature(&p, temperature)?, rng)
            }
        };
        out.push(next as Token);
    }
    Ok(out)
}

/// Decodes every prompt; prompt `i` uses sub-stream `i` of `config.seed`.
pub fn decode_batch<M: SequenceModel + ?Sized>(
    model: &M,
    prompts: &[TokenSequence],
    config: &DecodingConfig,
) -> Result<Vec<TokenSequence>> {
    config.validate()?;
    prompts
        .par_iter()
        .enumerate()
        .map(|(i, p)| decode(model, p, config, &mut substream(config.seed, i as u64)))
        .collect()
}
