//! Entropy-rate distribution of random Dirichlet chains over a grid of
//! concentrations, plus the best-of-grid selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::select::{candidate, SelectedProbe};
use crate::error::{Error, Result};
use crate::stats::{ks_two_sample, KsTest};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub m: usize,
    pub alphas: Vec<f64>,
    pub num_candidates: usize,
    pub target_entropy: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaSweep {
    pub alpha: f64,
    /// `(candidate index, entropy rate)` for every converged candidate.
    pub entropies: Vec<(usize, f64)>,
    pub skipped: Vec<usize>,
}

impl AlphaSweep {
    pub fn values(&self) -> Vec<f64> {
        self.entropies.iter().map(|&(_, h)| h).collect()
    }

    fn closest(&self, target: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &(i, h) in &self.entropies {
            if best.is_none_or(|(_, b)| (h - target).abs() < (b - target).abs()) {
                best = Some((i, h));
            }
        }
        best
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestCandidate {
    pub alpha_index: usize,
    pub alpha: f64,
    pub candidate_index: usize,
    pub entropy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropySweep {
    pub config: SweepConfig,
    pub per_alpha: Vec<AlphaSweep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramRow {
    pub alpha: f64,
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaShift {
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub test: KsTest,
}

fn stream_id(alpha_index: usize, candidate_index: usize) -> u64 {
    ((alpha_index as u64) << 32) | candidate_index as u64
}

/// Runs the sweep. Candidate `i` of grid point `a` uses sub-stream
/// `(a << 32) | i`, so grid point 0 reproduces [`super::select_probe`] with
/// the same seed and concentration.
pub fn sweep_entropy(config: &SweepConfig) -> Result<EntropySweep> {
    if config.alphas.is_empty() {
        return Err(Error::param("alphas", "grid is empty"));
    }
    if config.num_candidates == 0 {
        return Err(Error::param("num_candidates", "must be at least 1"));
    }
    if config.alphas.len() as u64 > u32::MAX as u64 || config.num_candidates as u64 > u32::MAX as u64 {
        return Err(Error::param("num_candidates", "grid too large"));
    }
    let mut per_alpha = Vec::with_capacity(config.alphas.len());
    for (a, &alpha) in config.alphas.iter().enumerate() {
        let results: Vec<(usize, Option<f64>)> = (0..config.num_candidates)
            .into_par_iter()
            .map(|i| {
                candidate(config.m, alpha, config.seed, stream_id(a, i), i)
                    .map(|c| (i, c.map(|c| c.entropy)))
            })
            .collect::<Result<_>>()?;
        let mut entropies = Vec::new();
        let mut skipped = Vec::new();
        for (i, h) in results {
            match h {
                Some(h) => entropies.push((i, h)),
                None => skipped.push(i),
            }
        }
        per_alpha.push(AlphaSweep {
            alpha,
            entropies,
            skipped,
        });
    }
    Ok(EntropySweep {
        config: config.clone(),
        per_alpha,
    })
}

impl EntropySweep {
    /// Closest candidate to the target across the whole grid; ties go to the
    /// earlier grid point, then the lower candidate index.
    pub fn best(&self) -> Option<BestCandidate> {
        let target = self.config.target_entropy;
        let mut best: Option<BestCandidate> = None;
        for (a, sweep) in self.per_alpha.iter().enumerate() {
            if let Some((i, h)) = sweep.closest(target) {
                if best
                    .as_ref()
                    .is_none_or(|b| (h - target).abs() < (b.entropy - target).abs())
                {
                    best = Some(BestCandidate {
                        alpha_index: a,
                        alpha: sweep.alpha,
                        candidate_index: i,
                        entropy: h,
                    });
                }
            }
        }
        best
    }

    /// Regenerates the chain behind [`EntropySweep::best`].
    pub fn best_probe(&self) -> Result<SelectedProbe> {
        let best = self
            .best()
            .ok_or_else(|| Error::Generation("no candidate converged".into()))?;
        let c = candidate(
            self.config.m,
            best.alpha,
            self.config.seed,
            stream_id(best.alpha_index, best.candidate_index),
            best.candidate_index,
        )?
        .ok_or_else(|| Error::Generation("best candidate no longer converges".into()))?;
        let skipped = self.per_alpha[best.alpha_index].skipped.clone();
        Ok(SelectedProbe {
            matrix: c.matrix,
            stationary: c.stationary,
            achieved_entropy: c.entropy,
            candidate_index: c.index,
            skipped,
        })
    }

    /// Per-α histograms over `bins` equal-width bins spanning `[0, log2 M]`.
    pub fn histogram(&self, bins: usize) -> Vec<HistogramRow> {
        let bins = bins.max(1);
        let top = (self.config.m as f64).log2();
        let width = top / bins as f64;
        let mut rows = Vec::with_capacity(bins * self.per_alpha.len());
        for sweep in &self.per_alpha {
            let mut counts = vec![0usize; bins];
            for h in sweep.values() {
                let b = ((h / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            rows.extend(counts.into_iter().enumerate().map(|(b, count)| HistogramRow {
                alpha: sweep.alpha,
                bin_low: b as f64 * width,
                bin_high: (b + 1) as f64 * width,
                count,
            }));
        }
        rows
    }

    /// Empirical CDF `(alpha, entropy, fraction ≤ entropy)` per grid point.
    pub fn cdf(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for sweep in &self.per_alpha {
            let mut v = sweep.values();
            v.sort_by(f64::total_cmp);
            let n = v.len() as f64;
            out.extend(
                v.iter()
                    .enumerate()
                    .map(|(i, h)| (sweep.alpha, *h, (i + 1) as f64 / n)),
            );
        }
        out
    }

    /// Two-sample Kolmogorov–Smirnov tests between consecutive grid points.
    pub fn shifts(&self) -> Vec<AlphaShift> {
        self.per_alpha
            .windows(2)
            .filter_map(|w| {
                let test = ks_two_sample(&w[0].values(), &w[1].values())?;
                Some(AlphaShift {
                    alpha_a: w[0].alpha,
                    alpha_b: w[1].alpha,
                    test,
                })
            })
            .collect()
    }
}
