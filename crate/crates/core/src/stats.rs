//! Resampling statistics used by the falsification predicates and the
//! entropy sweep.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Linear-interpolated quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// One-sided two-sample permutation test on the difference of means.
///
/// The statistic is `direction · (mean(b) − mean(a))`; the returned p-value is
/// `(1 + #{permuted ≥ observed}) / (1 + resamples)`, which is valid for any
/// number of resamples.
pub fn permutation_p_value<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    direction: f64,
    resamples: usize,
    rng: &mut R,
) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let observed = direction * (mean(b) - mean(a));
    let mut pool: Vec<f64> = a.iter().chain(b).copied().collect();
    let total: f64 = pool.iter().sum();
    let (na, nb) = (a.len(), b.len());
    // absorbs rounding when a permutation reproduces the observed split
    let slack = 1e-12 * (1.0 + observed.abs());
    let mut extreme = 0usize;
    for _ in 0..resamples {
        let (head, _) = pool.partial_shuffle(rng, na);
        let sum_a: f64 = head.iter().sum();
        let stat = direction * ((total - sum_a) / nb as f64 - sum_a / na as f64);
        if stat >= observed - slack {
            extreme += 1;
        }
    }
    (1 + extreme) as f64 / (1 + resamples) as f64
}

/// Percentile bootstrap of `direction · (mean(b) − mean(a))`, resampling each
/// arm independently. Returns the sorted replicate distribution.
pub fn bootstrap_contrast<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    direction: f64,
    resamples: usize,
    rng: &mut R,
) -> Vec<f64> {
    assert!(!a.is_empty() && !b.is_empty());
    let resample_mean = |xs: &[f64], rng: &mut R| -> f64 {
        let n = xs.len();
        (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64
    };
    let mut reps: Vec<f64> = (0..resamples)
        .map(|_| {
            let ma = resample_mean(a, rng);
            let mb = resample_mean(b, rng);
            direction * (mb - ma)
        })
        .collect();
    reps.sort_by(f64::total_cmp);
    reps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction). `None` if either sample is empty.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Option<KsTest> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Some(KsTest {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        n_a: a.len(),
        n_b: b.len(),
    })
}

/// `Q_KS(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = sign * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
