use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::matrix::TransitionMatrix;
use crate::error::{Error, Result};

/// Symmetric Dirichlet sampler that stays finite for very small `alpha`.
///
/// Gamma variates are drawn in log space: for `alpha < 1`,
/// `G(alpha) = G(alpha + 1) · U^(1/alpha)`, so `ln G` never underflows even
/// when `G` itself would. The row is then normalised with log-sum-exp; entries
/// far below the row maximum come out as (sub)normal floats or exact zeros,
/// never NaN.
#[derive(Debug, Clone)]
pub struct SymmetricDirichlet {
    dim: usize,
    alpha: f64,
    gamma: Gamma<f64>,
    boosted: bool,
}

impl SymmetricDirichlet {
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("m", format!("need at least 2 states, got {dim}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive and finite, got {alpha}")));
        }
        let boosted = alpha < 1.0;
        let shape = if boosted { alpha + 1.0 } else { alpha };
        let gamma = Gamma::new(shape, 1.0)
            .map_err(|e| Error::param("alpha", e.to_string()))?;
        Ok(Self {
            dim,
            alpha,
            gamma,
            boosted,
        })
    }

    fn log_gamma<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = self.gamma.sample(rng).ln();
        if self.boosted {
            // U in (0, 1]
            let u: f64 = 1.0 - rng.random::<f64>();
            g + u.ln() / self.alpha
        } else {
            g
        }
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        for x in out.iter_mut() {
            *x = self.log_gamma(rng);
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in out.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in out.iter_mut() {
            *x /= sum;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, &mut out);
        out
    }
}

/// `M × M` transition matrix whose rows are independent
/// `Dirichlet(alpha, …, alpha)` draws.
pub fn sample_transition_matrix<R: Rng + ?Sized>(
    m: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<TransitionMatrix> {
    let dirichlet = SymmetricDirichlet::new(m, alpha)?;
    let mut data = vec![0.0; m * m];
    for row in data.chunks_exact_mut(m) {
        dirichlet.sample_into(rng, row);
    }
    TransitionMatrix::from_flat(m, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = seeded(0);
        assert!(sample_transition_matrix(1, 1.0, &mut rng).is_err());
        assert!(sample_transition_matrix(4, 0.0, &mut rng).is_err());
        assert!(sample_transition_matrix(4, -1.0, &mut rng).is_err());
        assert!(sample_transition_matrix(4, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn tiny_alpha_rows_are_finite_and_normalised() {
        let mut rng = seeded(11);
        for &alpha in &[1e-4, 1e-3, 0.005, 0.1, 1.0, 50.0] {
            let p = sample_transition_matrix(64, alpha, &mut rng).unwrap();
            for row in p.rows() {
                assert!(row.iter().all(|x| x.is_finite() && *x >= 0.0));
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn deterministic_given_stream() {
        let a = sample_transition_matrix(16, 0.3, &mut seeded(5)).unwrap();
        let b = sample_transition_matrix(16, 0.3, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_state_uniform_mean() {
        // Dirichlet(1, 1) first coordinate is Uniform(0, 1): mean 1/2, variance 1/12
        let d = SymmetricDirichlet::new(2, 1.0).unwrap();
        let mut rng = seeded(2024);
        let n = 100_000;
        let mean = (0..n).map(|_| d.sample(&mut rng)[0]).sum::<f64>() / n as f64;
        let sigma = (1.0 / 12.0 / n as f64).sqrt();
        assert!((mean - 0.5).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn small_alpha_matches_beta_moments() {
        // for M = 2 the first coordinate is Beta(α, α): mean 1/2, var 1 / (4(2α + 1))
        let alpha = 0.3;
        let d = SymmetricDirichlet::new(2, alpha).unwrap();
        let mut rng = seeded(99);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)[0]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let expected_var = 1.0 / (4.0 * (2.0 * alpha + 1.0));
        assert!((mean - 0.5).abs() <= 3.0 * (expected_var / n as f64).sqrt());
        assert!((var - expected_var).abs() / expected_var < 0.02, "var {var}");
    }
}
