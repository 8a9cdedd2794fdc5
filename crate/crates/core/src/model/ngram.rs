use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{uniform, SequenceModel};
use crate::error::{Error, Result};
use crate::markov::{Token, TokenSequence};

/// Add-λ smoothed k-gram model.
///
/// `P(j | c) = (count[c][j] + λ) / (Σ count[c] + λM)`. Contexts shorter than
/// `k`, and unseen contexts with `λ = 0`, back off to the uniform
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    k: usize,
    m: usize,
    lambda: f64,
    counts: BTreeMap<Vec<Token>, Vec<u64>>,
}

/// Counts every `(context, next)` pair inside each sequence.
pub fn fit(corpus: &[TokenSequence], m: usize, k: usize, lambda: f64) -> Result<NGramModel> {
    if corpus.is_empty() {
        return Err(Error::param("corpus", "must contain at least one sequence"));
    }
    validate(m, k, lambda)?;
    let mut counts: BTreeMap<Vec<Token>, Vec<u64>> = BTreeMap::new();
    for seq in corpus {
        seq.check_vocab(m)?;
        for w in seq.tokens().windows(k + 1) {
            let (ctx, next) = w.split_at(k);
            let row = match counts.get_mut(ctx) {
                Some(row) => row,
                None => counts.entry(ctx.to_vec()).or_insert_with(|| vec![0; m]),
            };
            row[next[0] as usize] += 1;
        }
    }
    Ok(NGramModel {
        k,
        m,
        lambda,
        counts,
    })
}

fn validate(m: usize, k: usize, lambda: f64) -> Result<()> {
    if m < 2 {
        return Err(Error::param("m", format!("vocabulary must have at least 2 tokens, got {m}")));
    }
    if k == 0 {
        return Err(Error::param("k", "order must be at least 1"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("must be finite and non-negative, got {lambda}")));
    }
    Ok(())
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Raw successor counts for a context, if it was observed.
    pub fn counts(&self, context: &[Token]) -> Option<&[u64]> {
        self.counts.get(context).map(Vec::as_slice)
    }

    pub fn num_contexts(&self) -> usize {
        self.counts.len()
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            k: self.k,
            m: self.m,
            lambda: self.lambda,
            counts: self
                .counts
                .iter()
                .map(|(c, n)| ContextCounts {
                    context: c.clone(),
                    next_counts: n.clone(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        validate(file.m, file.k, file.lambda)?;
        let mut counts = BTreeMap::new();
        for entry in file.counts {
            if entry.context.len() != file.k {
                return Err(Error::format(
                    "model file",
                    format!("context {:?} does not have length k = {}", entry.context, file.k),
                ));
            }
            if entry.next_counts.len() != file.m {
                return Err(Error::format(
                    "model file",
                    format!("next_counts for {:?} must have {} entries", entry.context, file.m),
                ));
            }
            if entry.context.iter().any(|&t| t as usize >= file.m) {
                return Err(Error::format(
                    "model file",
                    format!("context {:?} outside vocabulary", entry.context),
                ));
            }
            if counts.insert(entry.context.clone(), entry.next_counts).is_some() {
                return Err(Error::format(
                    "model file",
                    format!("duplicate context {:?}", entry.context),
                ));
            }
        }
        Ok(Self {
            k: file.k,
            m: file.m,
            lambda: file.lambda,
            counts,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_file(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&self.to_file())?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

impl SequenceModel for NGramModel {
    fn vocab_size(&self) -> usize {
        self.m
    }

    fn context_len(&self) -> usize {
        self.k
    }

    fn next_token_distribution(&self, context: &[Token]) -> Vec<f64> {
        if context.len() < self.k {
            return uniform(self.m);
        }
        let ctx = &context[context.len() - self.k..];
        let smoothing = self.lambda * self.m as f64;
        match self.counts.get(ctx) {
            Some(row) => {
                let total = row.iter().sum::<u64>() as f64 + smoothing;
                if total == 0.0 {
                    return uniform(self.m);
                }
                row.iter().map(|&c| (c as f64 + self.lambda) / total).collect()
            }
            None => uniform(self.m),
        }
    }
}

/// On-disk model: `{"k", "m", "lambda", "counts": [{"context", "next_counts"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub k: usize,
    pub m: usize,
    pub lambda: f64,
    pub counts: Vec<ContextCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextCounts {
    pub context: Vec<Token>,
    pub next_counts: Vec<u64>,
}
