//! Chain file: the JSON document describing a generated probe.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::{StationaryDistribution, TransitionMatrix};
use super::select::{ProbeGenSpec, SelectedProbe};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub m: usize,
    pub alpha: f64,
    pub seed: u64,
    pub target_entropy: f64,
    pub achieved_entropy: f64,
    pub transition_matrix: Vec<Vec<f64>>,
    pub stationary: Vec<f64>,
}

impl ChainFile {
    pub fn from_probe(spec: &ProbeGenSpec, probe: &SelectedProbe) -> Self {
        Self {
            m: spec.m,
            alpha: spec.alpha,
            seed: spec.seed,
            target_entropy: spec.target_entropy,
            achieved_entropy: probe.achieved_entropy,
            transition_matrix: probe.matrix.to_rows(),
            stationary: probe.stationary.probabilities().to_vec(),
        }
    }

    /// Validated matrix and stationary distribution.
    pub fn chain(&self) -> Result<(TransitionMatrix, StationaryDistribution)> {
        let matrix = TransitionMatrix::from_rows(self.transition_matrix.clone())?;
        if matrix.size() != self.m {
            return Err(Error::format(
                "chain file",
                format!("m = {} but matrix has {} rows", self.m, matrix.size()),
            ));
        }
        let pi = StationaryDistribution::for_matrix(self.stationary.clone(), &matrix)?;
        Ok((matrix, pi))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(s)?;
        file.chain()?;
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::select_probe;

    #[test]
    fn round_trip_is_bit_exact() {
        let spec = ProbeGenSpec {
            m: 12,
            alpha: 0.05,
            target_entropy: 1.0,
            num_candidates: 10,
            seed: 77,
        };
        let probe = select_probe(&spec).unwrap();
        let file = ChainFile::from_probe(&spec, &probe);
        let back = ChainFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(file, back);
        let bits = |v: &[Vec<f64>]| -> Vec<u64> { v.iter().flatten().map(|x| x.to_bits()).collect() };
        assert_eq!(bits(&file.transition_matrix), bits(&back.transition_matrix));
        let (p, pi) = back.chain().unwrap();
        assert_eq!(p, probe.matrix);
        assert_eq!(pi, probe.stationary);
    }

    #[test]
    fn rejects_inconsistent_m() {
        let mut file = ChainFile {
            m: 3,
            alpha: 1.0,
            seed: 0,
            target_entropy: 1.0,
            achieved_entropy: 1.0,
            transition_matrix: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            stationary: vec![0.5, 0.5],
        };
        assert!(file.chain().is_err());
        file.m = 2;
        assert!(file.chain().is_ok());
    }
}
