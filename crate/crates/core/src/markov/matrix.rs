use crate::error::{Error, Result};

/// Tolerance on each row sum of a [`TransitionMatrix`].
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;
/// Bound on `‖πP − π‖₁` accepted by [`StationaryDistribution::for_matrix`].
pub const STATIONARY_RESIDUAL_BOUND: f64 = 1e-8;
/// Residual tolerance used by [`StationaryDistribution::solve`].
pub const DEFAULT_POWER_TOLERANCE: f64 = 1e-10;

/// Row-stochastic `M × M` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    m: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m < 2 {
            return Err(Error::param("m", format!("need at least 2 states, got {m}")));
        }
        let mut data = Vec::with_capacity(m * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::param(
                    "transition_matrix",
                    format!("row {i} has {} entries, expected {m}", row.len()),
                ));
            }
            data.extend(row);
        }
        Self::from_flat(m, data)
    }

    /// Builds from a row-major buffer of length `m * m`.
    pub fn from_flat(m: usize, data: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::param("m", format!("need at least 2 states, got {m}")));
        }
        if data.len() != m * m {
            return Err(Error::param(
                "transition_matrix",
                format!("expected {} entries, got {}", m * m, data.len()),
            ));
        }
        for (i, row) in data.chunks_exact(m).enumerate() {
            if let Some(j) = row.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::param(
                    "transition_matrix",
                    format!("entry ({i}, {j}) = {} is not a probability", row[j]),
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::param(
                    "transition_matrix",
                    format!("row {i} sums to {sum}"),
                ));
            }
        }
        Ok(Self { m, data })
    }

    /// Matrix with every entry `1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::from_flat(m, vec![1.0 / m as f64; m * m])
    }

    /// Deterministic cycle `i → (i + shift) mod m`.
    pub fn cyclic(m: usize, shift: usize) -> Result<Self> {
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            data[i * m + (i + shift) % m] = 1.0;
        }
        Self::from_flat(m, data)
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.m)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// `v ↦ vP` for a row vector `v`.
    pub fn left_multiply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (vi, row) in v.iter().zip(self.rows()) {
            if *vi == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(row) {
                *o += vi * p;
            }
        }
    }
}

/// Invariant measure `π` of a [`TransitionMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pi: Vec<f64>,
}

impl StationaryDistribution {
    /// Validates `pi` against `matrix`: non-negative, sums to one, and
    /// `‖πP − π‖₁ ≤ 1e-8`.
    pub fn for_matrix(pi: Vec<f64>, matrix: &TransitionMatrix) -> Result<Self> {
        if pi.len() != matrix.size() {
            return Err(Error::param(
                "stationary",
                format!("length {} does not match {} states", pi.len(), matrix.size()),
            ));
        }
        if pi.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::param("stationary", "entries must be finite and non-negative"));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::param("stationary", format!("sums to {sum}")));
        }
        let dist = Self { pi };
        let residual = dist.residual(matrix);
        if residual > STATIONARY_RESIDUAL_BOUND {
            return Err(Error::param(
                "stationary",
                format!("residual ‖πP − π‖₁ = {residual:.3e} exceeds {STATIONARY_RESIDUAL_BOUND:e}"),
            ));
        }
        Ok(dist)
    }

    /// Power iteration with the default tolerance and `100·M` iterations.
    pub fn solve(matrix: &TransitionMatrix) -> Result<Self> {
        stationary_distribution(matrix, DEFAULT_POWER_TOLERANCE, 100 * matrix.size())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.pi
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// `‖πP − π‖₁`.
    pub fn residual(&self, matrix: &TransitionMatrix) -> f64 {
        let mut next = vec![0.0; self.pi.len()];
        matrix.left_multiply(&self.pi, &mut next);
        l1_distance(&next, &self.pi)
    }
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Power iteration from the uniform vector.
///
/// Returns the first iterate `π` with `‖πP − π‖₁ ≤ tol`. Reducible or periodic
/// chains typically exhaust `max_iters` and yield [`Error::Convergence`].
pub fn stationary_distribution(
    matrix: &TransitionMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<StationaryDistribution> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let m = matrix.size();
    let mut pi = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        matrix.left_multiply(&pi, &mut next);
        residual = l1_distance(&next, &pi);
        if residual <= tol {
            let sum: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|p| *p /= sum);
            return Ok(StationaryDistribution { pi });
        }
        let sum: f64 = next.iter().sum();
        for (p, n) in pi.iter_mut().zip(&next) {
            *p = n / sum;
        }
    }
    Err(Error::Convergence {
        iterations: max_iters,
        residual,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_bad_rows() {
        assert!(TransitionMatrix::from_rows(vec![vec![1.0]]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![f64::NAN, 1.0], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn two_state_balance() {
        // π₀·0.1 = π₁·0.3 and π₀ + π₁ = 1  ⇒  π = (0.75, 0.25)
        let p = TransitionMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let pi = StationaryDistribution::solve(&p).unwrap();
        assert_abs_diff_eq!(pi.probabilities()[0], 0.75, epsilon = 1e-9);
        assert_abs_diff_eq!(pi.probabilities()[1], 0.25, epsilon = 1e-9);
        assert!(pi.residual(&p) <= DEFAULT_POWER_TOLERANCE);
    }

    #[test]
    fn doubly_stochastic_is_uniform() {
        let p = TransitionMatrix::from_rows(vec![
            vec![0.2, 0.3, 0.5],
            vec![0.5, 0.2, 0.3],
            vec![0.3, 0.5, 0.2],
        ])
        .unwrap();
        let pi = StationaryDistribution::solve(&p).unwrap();
        for v in pi.probabilities() {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn absorbing_chain_with_few_iterations_fails() {
        // state 0 absorbing, state 1 leaks very slowly
        let p = TransitionMatrix::from_rows(vec![vec![1.0, 0.0], vec![1e-6, 1.0 - 1e-6]]).unwrap();
        let err = stationary_distribution(&p, 1e-10, 10).unwrap_err();
        assert!(matches!(err, Error::Convergence { iterations: 10, .. }));
    }

    #[test]
    fn periodic_chain_does_not_converge() {
        // period 3 over classes {0}, {1, 2}, {3}; uniform start has unequal class mass
        let p = TransitionMatrix::from_rows(vec![
            vec![0.0, 0.5, 0.5, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(matches!(
            StationaryDistribution::solve(&p),
            Err(Error::Convergence { .. })
        ));
        // the exact invariant measure still validates
        assert!(StationaryDistribution::for_matrix(
            vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0],
            &p
        )
        .is_ok());
    }

    #[test]
    fn non_positive_tolerance_is_parameter_error() {
        let p = TransitionMatrix::uniform(3).unwrap();
        assert!(matches!(
            stationary_distribution(&p, 0.0, 10),
            Err(Error::Parameter { name: "tol", .. })
        ));
    }

    #[test]
    fn for_matrix_checks_residual() {
        let p = TransitionMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        assert!(StationaryDistribution::for_matrix(vec![0.5, 0.5], &p).is_err());
        assert!(StationaryDistribution::for_matrix(vec![0.75, 0.25], &p).is_ok());
    }
}
