use super::matrix::{StationaryDistribution, TransitionMatrix};
use crate::error::{Error, Result};

/// Shannon entropy of a distribution in bits, with `0·log 0 = 0`.
pub fn shannon_entropy_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// Entropy rate `−Σᵢ πᵢ Σⱼ Pᵢⱼ log₂ Pᵢⱼ` in bits per token.
pub fn entropy_rate(matrix: &TransitionMatrix, pi: &StationaryDistribution) -> Result<f64> {
    if pi.len() != matrix.size() {
        return Err(Error::param(
            "stationary",
            format!("length {} does not match {} states", pi.len(), matrix.size()),
        ));
    }
    let h: f64 = pi
        .probabilities()
        .iter()
        .zip(matrix.rows())
        .map(|(w, row)| w * shannon_entropy_bits(row))
        .sum();
    // rounding can leave a tiny negative value for deterministic chains
    Ok(h.max(0.0))
}
