use crate::error::{Error, Result};

/// Rescales `p` to `p_i^{1/T} / Σ_j p_j^{1/T}`, computed in log space.
///
/// `T = 1` returns `p` unchanged. Zero entries stay zero for every `T`.
pub fn apply_temperature(p: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::param(
            "temperature",
            format!("must be positive and finite, got {temperature}"),
        ));
    }
    if p.is_empty() || p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::param("p", "not a probability vector"));
    }
    if temperature == 1.0 {
        return Ok(p.to_vec());
    }
    let inv_t = 1.0 / temperature;
    let logs: Vec<f64> = p.iter().map(|x| x.ln() * inv_t).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::param("p", "all entries are zero"));
    }
    let mut out: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= sum);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_at_one() {
        let p = [0.1, 0.2, 0.7];
        assert_eq!(apply_temperature(&p, 1.0).unwrap(), p.to_vec());
    }

    #[test]
    fn hot_limit_flattens() {
        // 0.9^(1/100) / (0.9^(1/100) + 0.1^(1/100)) = 0.505493…
        let q = apply_temperature(&[0.9, 0.1], 100.0).unwrap();
        let a = 0.9f64.powf(0.01);
        let b = 0.1f64.powf(0.01);
        assert_abs_diff_eq!(q[0], a / (a + b), epsilon = 1e-12);
        assert!((q[0] - 0.5).abs() < 0.01 && (q[1] - 0.5).abs() < 0.01);
    }

    #[test]
    fn cold_limit_concentrates() {
        let q = apply_temperature(&[0.9, 0.1], 0.01).unwrap();
        assert!(q[0] >= 1.0 - 1e-6);
    }

    #[test]
    fn rejects_non_positive_temperature() {
        assert!(apply_temperature(&[0.5, 0.5], 0.0).is_err());
        assert!(apply_temperature(&[0.5, 0.5], -1.0).is_err());
        assert!(apply_temperature(&[0.5, 0.5], f64::NAN).is_err());
    }

    #[test]
    fn zeros_stay_zero_and_no_underflow() {
        let mut p = vec![0.0; 128];
        p[3] = 1e-300;
        p[7] = 1.0 - 1e-300;
        let q = apply_temperature(&p, 0.05).unwrap();
        assert_eq!(q[0], 0.0);
        assert!(q.iter().all(|x| x.is_finite()));
        assert_abs_diff_eq!(q.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
