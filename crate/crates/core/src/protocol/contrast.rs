use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::claim::{Claim, ClaimBinding, Direction};
use super::family::{describe, Configuration, ProcessFamily};
use super::report::CardNarrative;
use crate::error::{Error, Result};
use crate::rng::{substream, ProbeRng};
use crate::stats::{bootstrap_contrast, mean, permutation_p_value, quantile_sorted};

/// A known generative process that can be sampled at any valid
/// configuration.
pub trait ProbeProcess: Send + Sync {
    /// Diagnostic object produced per draw.
    type Sample: Send;

    fn sample(&self, config: &Configuration, rng: &mut ProbeRng) -> Result<Self::Sample>;
}

/// Named real-valued diagnostic `m_j` over diagnostic objects.
pub struct Diagnostic<Y> {
    pub id: String,
    pub kind: String,
    eval: Arc<dyn Fn(&Y) -> f64 + Send + Sync>,
}

impl<Y> Clone for Diagnostic<Y> {
    fn clone(&self) -> Self {
        Self {
            id: self.id.clone(),
            kind: self.kind.clone(),
            eval: Arc::clone(&self.eval),
        }
    }
}

impl<Y> fmt::Debug for Diagnostic<Y> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diagnostic")
            .field("id", &self.id)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl<Y> Diagnostic<Y> {
    pub fn new(
        id: impl Into<String>,
        kind: impl Into<String>,
        eval: impl Fn(&Y) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            kind: kind.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn evaluate(&self, y: &Y) -> f64 {
        (self.eval)(y)
    }
}

/// Claim together with its falsification binding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundClaim {
    pub claim: Claim,
    pub binding: ClaimBinding,
    #[serde(default)]
    pub narrative: Option<CardNarrative>,
}

/// A full probe assembly: process family, sampler, diagnostics and claims.
pub struct Probe<P: ProbeProcess> {
    pub family: ProcessFamily,
    pub process: P,
    pub diagnostics: Vec<Diagnostic<P::Sample>>,
    pub claims: Vec<BoundClaim>,
}

impl<P: ProbeProcess> Probe<P> {
    pub fn diagnostic(&self, id: &str) -> Option<&Diagnostic<P::Sample>> {
        self.diagnostics.iter().find(|d| d.id == id)
    }

    pub fn claim(&self, id: &str) -> Option<&BoundClaim> {
        self.claims.iter().find(|c| c.claim.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastSettings {
    pub samples_per_arm: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_resamples: usize,
}

pub const DEFAULT_PERMUTATIONS: usize = 9_999;
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 10_000;

fn default_permutations() -> usize {
    DEFAULT_PERMUTATIONS
}

fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP_RESAMPLES
}

impl ContrastSettings {
    pub fn new(samples_per_arm: usize, seeds: Vec<u64>) -> Self {
        Self {
            samples_per_arm,
            seeds,
            permutations: DEFAULT_PERMUTATIONS,
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples_per_arm < 2 {
            return Err(Error::param("samples_per_arm", "need at least 2 samples per arm"));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "need at least one seed"));
        }
        if self.permutations == 0 || self.bootstrap_resamples == 0 {
            return Err(Error::param("permutations", "resample counts must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Probe,
    Real,
}

/// Statistical summaries consumed by the falsification predicates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summaries {
    /// Direction the one-sided quantities below were computed for.
    #[serde(default)]
    pub direction: Option<Direction>,
    #[serde(default)]
    pub p_value: Option<f64>,
    /// `α`-quantile of the bootstrap distribution of `s_h·Δ`.
    #[serde(default)]
    pub directional_lower_bound: Option<f64>,
    #[serde(default)]
    pub bound_level: Option<f64>,
    /// `sign(Δ_s)` per seed, in seed order.
    #[serde(default)]
    pub seed_signs: Option<Vec<i8>>,
    #[serde(default)]
    pub permutations: Option<usize>,
    #[serde(default)]
    pub bootstrap_resamples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastResult {
    pub side: Side,
    pub claim_id: String,
    pub mu_a: f64,
    pub mu_b: f64,
    pub delta: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub seeds: Vec<u64>,
    pub summaries: Summaries,
    #[serde(default)]
    pub configuration_a: Option<Configuration>,
    #[serde(default)]
    pub configuration_b: Option<Configuration>,
}

impl ContrastResult {
    /// `Δ = μ_b − μ_a` exactly, and finite means.
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_a.is_finite() && self.mu_b.is_finite()) {
            return Err(Error::Validation("contrast means must be finite".into()));
        }
        if (self.mu_b - self.mu_a).to_bits() != self.delta.to_bits() {
            return Err(Error::Validation(format!(
                "stored Δ = {} differs from μ_b − μ_a = {}",
                self.delta,
                self.mu_b - self.mu_a
            )));
        }
        Ok(())
    }
}

/// Samples grouped by seed: `(seed, arm a values, arm b values)`.
pub type SeedArms = (u64, Vec<f64>, Vec<f64>);

/// Pools per-seed samples into a [`ContrastResult`] with permutation,
/// bootstrap and seed-sign summaries. Resampling draws from sub-streams 2 and
/// 3 of `stat_seed`.
pub fn summarize_contrast(
    side: Side,
    claim_id: &str,
    binding: &ClaimBinding,
    per_seed: &[SeedArms],
    permutations: usize,
    bootstrap_resamples: usize,
    stat_seed: u64,
) -> Result<ContrastResult> {
    let a: Vec<f64> = per_seed.iter().flat_map(|(_, a, _)| a.iter().copied()).collect();
    let b: Vec<f64> = per_seed.iter().flat_map(|(_, _, b)| b.iter().copied()).collect();
    if a.is_empty() || b.is_empty() {
        return Err(Error::Contrast {
            configuration: claim_id.to_string(),
            reason: "both arms need at least one observation".into(),
        });
    }
    let mu_a = mean(&a);
    let mu_b = mean(&b);
    let s = binding.direction.sign();
    let p_value = permutation_p_value(&a, &b, s, permutations, &mut substream(stat_seed, 2));
    let reps = bootstrap_contrast(&a, &b, s, bootstrap_resamples, &mut substream(stat_seed, 3));
    let lower = quantile_sorted(&reps, binding.alpha);
    let signs: Vec<i8> = per_seed
        .iter()
        .filter(|(_, a, b)| !a.is_empty() && !b.is_empty())
        .map(|(_, a, b)| {
            let d = mean(b) - mean(a);
            if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(ContrastResult {
        side,
        claim_id: claim_id.to_string(),
        mu_a,
        mu_b,
        delta: mu_b - mu_a,
        n_a: a.len(),
        n_b: b.len(),
        seeds: per_seed.iter().map(|(s, _, _)| *s).collect(),
        summaries: Summaries {
            direction: Some(binding.direction),
            p_value: Some(p_value),
            directional_lower_bound: Some(lower),
            bound_level: Some(binding.alpha),
            seed_signs: (!signs.is_empty()).then_some(signs),
            permutations: Some(permutations),
            bootstrap_resamples: Some(bootstrap_resamples),
        },
        configuration_a: None,
        configuration_b: None,
    })
}

/// Monte Carlo estimate of the probe-side contrast for one claim.
///
/// Arm `a` of seed `s` draws from sub-stream 0 of `s`, arm `b` from
/// sub-stream 1. Statistics use the first seed.
pub fn run_probe_contrast<P: ProbeProcess>(
    probe: &Probe<P>,
    claim_id: &str,
    settings: &ContrastSettings,
) -> Result<ContrastResult> {
    settings.validate()?;
    let bound = probe
        .claim(claim_id)
        .ok_or_else(|| Error::Validation(format!("unknown claim `{claim_id}`")))?;
    let claim = &bound.claim;
    claim.validate()?;
    bound.binding.validate()?;
    let diagnostic = probe.diagnostic(&claim.diagnostic).ok_or_else(|| {
        Error::Validation(format!("claim `{claim_id}` uses unknown diagnostic `{}`", claim.diagnostic))
    })?;
    let family = &probe.family;
    let config_a = family.intervene(&family.baseline, &claim.knob, &claim.from)?;
    let config_b = family.intervene(&family.baseline, &claim.knob, &claim.to)?;

    let draw = |config: &Configuration, seed: u64, stream: u64| -> Result<Vec<f64>> {
        let mut rng = substream(seed, stream);
        (0..settings.samples_per_arm)
            .map(|_| {
                let y = probe.process.sample(config, &mut rng).map_err(|e| Error::Contrast {
                    configuration: describe(config),
                    reason: e.to_string(),
                })?;
                let v = diagnostic.evaluate(&y);
                if !v.is_finite() {
                    return Err(Error::Contrast {
                        configuration: describe(config),
                        reason: format!("diagnostic `{}` returned {v}", diagnostic.id),
                    });
                }
                Ok(v)
            })
            .collect()
    };

    let per_seed: Vec<SeedArms> = settings
        .seeds
        .par_iter()
        .map(|&seed| Ok((seed, draw(&config_a, seed, 0)?, draw(&config_b, seed, 1)?)))
        .collect::<Result<_>>()?;

    let mut result = summarize_contrast(
        Side::Probe,
        claim_id,
        &bound.binding,
        &per_seed,
        settings.permutations,
        settings.bootstrap_resamples,
        settings.seeds[0],
    )?;
    result.configuration_a = Some(config_a);
    result.configuration_b = Some(config_b);
    Ok(result)
}
