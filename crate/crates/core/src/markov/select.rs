use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dirichlet::sample_transition_matrix;
use super::entropy::entropy_rate;
use super::matrix::{StationaryDistribution, TransitionMatrix};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Parameters of the best-of-K entropy-targeted probe search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGenSpec {
    pub m: usize,
    pub alpha: f64,
    pub target_entropy: f64,
    pub num_candidates: usize,
    pub seed: u64,
}

impl ProbeGenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::param("m", format!("need at least 2 states, got {}", self.m)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive, got {}", self.alpha)));
        }
        let max_h = (self.m as f64).log2();
        if !(0.0..=max_h).contains(&self.target_entropy) {
            return Err(Error::param(
                "target_entropy",
                format!("{} outside [0, log2 M = {max_h}]", self.target_entropy),
            ));
        }
        if self.num_candidates == 0 {
            return Err(Error::param("num_candidates", "must be at least 1"));
        }
        Ok(())
    }
}

/// Chain chosen by [`select_probe`].
#[derive(Debug, Clone)]
pub struct SelectedProbe {
    pub matrix: TransitionMatrix,
    pub stationary: StationaryDistribution,
    pub achieved_entropy: f64,
    pub candidate_index: usize,
    /// Candidates dropped because power iteration did not converge.
    pub skipped: Vec<usize>,
}

pub(crate) struct Candidate {
    pub index: usize,
    pub matrix: TransitionMatrix,
    pub stationary: StationaryDistribution,
    pub entropy: f64,
}

/// Generates candidate `index` on its own sub-stream of `seed`.
pub(crate) fn candidate(
    m: usize,
    alpha: f64,
    seed: u64,
    stream: u64,
    index: usize,
) -> Result<Option<Candidate>> {
    let mut rng = substream(seed, stream);
    let matrix = sample_transition_matrix(m, alpha, &mut rng)?;
    match StationaryDistribution::solve(&matrix) {
        Ok(stationary) => {
            let entropy = entropy_rate(&matrix, &stationary)?;
            Ok(Some(Candidate {
                index,
                matrix,
                stationary,
                entropy,
            }))
        }
        Err(Error::Convergence { residual, .. }) => {
            log::debug!("candidate {index} skipped: stationary distribution did not converge (residual {residual:.3e})");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Samples `K` Dirichlet chains and keeps the one whose entropy rate is
/// closest to the target. Ties go to the lowest candidate index.
pub fn select_probe(spec: &ProbeGenSpec) -> Result<SelectedProbe> {
    spec.validate()?;
    let target = spec.target_entropy;
    let results: Vec<(usize, Option<Candidate>)> = (0..spec.num_candidates)
        .into_par_iter()
        .map(|i| candidate(spec.m, spec.alpha, spec.seed, i as u64, i).map(|c| (i, c)))
        .collect::<Result<_>>()?;

    let mut skipped = Vec::new();
    let mut best: Option<Candidate> = None;
    for (i, c) in results {
        match c {
            None => skipped.push(i),
            Some(c) => {
                let better = match &best {
                    None => true,
                    // strict comparison keeps the lower index on ties
                    Some(b) => (c.entropy - target).abs() < (b.entropy - target).abs(),
                };
                if better {
                    best = Some(c);
                }
            }
        }
    }
    let best = best.ok_or_else(|| {
        Error::Generation(format!(
            "all {} candidates failed to converge",
            spec.num_candidates
        ))
    })?;
    Ok(SelectedProbe {
        matrix: best.matrix,
        stationary: best.stationary,
        achieved_entropy: best.entropy,
        candidate_index: best.index,
        skipped,
    })
}
