use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{StationaryDistribution, TransitionMatrix};
use crate::error::{Error, Result};
use crate::rng::{sample_categorical, substream};

pub type Token = u32;

/// Non-empty sequence of state indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::param("tokens", "sequence must be non-empty"));
        }
        Ok(Self { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Checks every token is below `m`.
    pub fn check_vocab(&self, m: usize) -> Result<()> {
        match self.tokens.iter().position(|&t| t as usize >= m) {
            Some(pos) => Err(Error::param(
                "tokens",
                format!("token {} at position {pos} is outside vocabulary of {m}", self.tokens[pos]),
            )),
            None => Ok(()),
        }
    }

    pub(crate) fn push(&mut self, t: Token) {
        self.tokens.push(t);
    }
}

impl AsRef<[Token]> for TokenSequence {
    fn as_ref(&self) -> &[Token] {
        &self.tokens
    }
}

/// First token from `π`, then one draw per step from the previous token's
/// row. Consumes exactly `n` uniforms from `rng`.
pub fn sample_sequence<R: Rng + ?Sized>(
    matrix: &TransitionMatrix,
    pi: &StationaryDistribution,
    n: usize,
    rng: &mut R,
) -> Result<TokenSequence> {
    if n == 0 {
        return Err(Error::param("n", "sequence length must be at least 1"));
    }
    if pi.len() != matrix.size() {
        return Err(Error::param("stationary", "dimension does not match matrix"));
    }
    let mut tokens = Vec::with_capacity(n);
    let mut state = sample_categorical(pi.probabilities(), rng);
    tokens.push(state as Token);
    for _ in 1..n {
        state = sample_categorical(matrix.row(state), rng);
        tokens.push(state as Token);
    }
    Ok(TokenSequence { tokens })
}

/// `count` sequences of length `n`; sequence `i` uses sub-stream `i` of `seed`.
pub fn sample_corpus(
    matrix: &TransitionMatrix,
    pi: &StationaryDistribution,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<TokenSequence>> {
    (0..count)
        .into_par_iter()
        .map(|i| sample_sequence(matrix, pi, n, &mut substream(seed, i as u64)))
        .collect()
}

/// Normalisation convention for average NLL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NllMode {
    /// `−Σ_{t≥2} log₂ P[x_{t−1}][x_t] / (n − 1)`: the first token is treated
    /// as a given prompt.
    #[default]
    Conditional,
    /// `−log₂ p(xⁿ) / n`, including `−log₂ π(x₁)`.
    Joint,
}

impl std::str::FromStr for NllMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conditional" => Ok(NllMode::Conditional),
            "joint" => Ok(NllMode::Joint),
            other => Err(Error::param("mode", format!("unknown NLL mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for NllMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NllMode::Conditional => "conditional",
            NllMode::Joint => "joint",
        })
    }
}

/// Average NLL of `x` under the chain in bits per token. A zero-probability
/// step yields `f64::INFINITY`.
pub fn sequence_nll(
    matrix: &TransitionMatrix,
    pi: &StationaryDistribution,
    x: &TokenSequence,
    mode: NllMode,
) -> Result<f64> {
    x.check_vocab(matrix.size())?;
    let t = x.tokens();
    let mut bits = 0.0;
    for w in t.windows(2) {
        bits -= matrix.get(w[0] as usize, w[1] as usize).log2();
    }
    match mode {
        NllMode::Conditional => {
            if t.len() < 2 {
                return Err(Error::param(
                    "tokens",
                    "conditional NLL needs at least 2 tokens",
                ));
            }
            Ok(bits / (t.len() - 1) as f64)
        }
        NllMode::Joint => {
            bits -= pi.probabilities()[t[0] as usize].log2();
            Ok(bits / t.len() as f64)
        }
    }
}
