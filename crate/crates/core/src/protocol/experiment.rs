//! Experiment spec files and real-side ingestion.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::claim::Claim;
use super::contrast::{summarize_contrast, BoundClaim, ContrastResult, ContrastSettings, Probe, SeedArms, Side};
use super::family::ProcessFamily;
use super::markov::{markov_diagnostics, temperature_family, MarkovDecodingProcess};
use crate::error::{Error, Result};
use crate::markov::file::ChainFile;
use crate::model::{wrap_chain_as_model, NGramModel, SequenceModel};
use crate::typical::{TypicalSetBand, DEFAULT_EPSILON};

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_max_new_tokens() -> usize {
    127
}

/// Declarative description of a probe experiment. Relative paths resolve
/// against the directory of the spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub chain: PathBuf,
    /// Fitted model file; the chain itself is used when absent.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_new_tokens")]
    pub max_new_tokens: usize,
    /// Overrides the built-in temperature family.
    #[serde(default)]
    pub family: Option<ProcessFamily>,
    /// Subset of built-in diagnostics; all when absent.
    #[serde(default)]
    pub diagnostics: Option<Vec<String>>,
    pub claims: Vec<BoundClaim>,
    pub contrast: ContrastSettings,
}

impl ExperimentSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((spec, base))
    }

    /// `p` relative to the spec directory `base`, unless absolute.
    pub fn resolve(base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    /// Loads the chain and model and assembles the probe.
    pub fn claim(&self, id: Option<&str>) -> Result<&BoundClaim> {
        match id {
            Some(id) => self
                .claims
                .iter()
                .find(|c| c.claim.id == id)
                .ok_or_else(|| Error::Validation(format!("spec has no claim `{id}`"))),
            None => self
                .claims
                .first()
                .ok_or_else(|| Error::Validation("spec declares no claims".into())),
        }
    }

    pub fn build(&self, base: &Path) -> Result<Probe<MarkovDecodingProcess>> {
        let chain = ChainFile::load(Self::resolve(base, &self.chain))?;
        let (matrix, stationary) = chain.chain()?;
        let model: Arc<dyn SequenceModel> = match &self.model {
            Some(p) => Arc::new(NGramModel::load(Self::resolve(base, p))?),
            None => Arc::new(wrap_chain_as_model(matrix.clone())),
        };
        let band = TypicalSetBand::new(chain.achieved_entropy, self.epsilon, self.max_new_tokens + 1)?;
        let process = MarkovDecodingProcess::new(model, matrix, stationary, band)?;
        let mut diagnostics = markov_diagnostics();
        if let Some(names) = &self.diagnostics {
            for n in names {
                if !diagnostics.iter().any(|d| &d.id == n) {
                    return Err(Error::Validation(format!("unknown diagnostic `{n}`")));
                }
            }
            diagnostics.retain(|d| names.contains(&d.id));
        }
        Ok(Probe {
            family: self
                .family
                .clone()
                .unwrap_or_else(|| temperature_family(self.max_new_tokens)),
            process,
            diagnostics,
            claims: self.claims.clone(),
        })
    }
}

/// One row of a real-side CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealRow {
    pub arm: String,
    pub seed: u64,
    pub diagnostic_value: f64,
}

pub fn read_real_rows<R: Read>(reader: R) -> Result<Vec<RealRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<RealRow>().enumerate() {
        let row = rec?;
        if !row.diagnostic_value.is_finite() {
            return Err(Error::format(
                "real-side CSV",
                format!("row {}: diagnostic_value must be finite", i + 1),
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Groups real-side rows into a [`ContrastResult`] for `bound`.
///
/// Arm labels match the claim's `from`/`to` values or the literals `a`/`b`.
/// Seeds are ordered ascending; resampling uses the smallest seed.
pub fn ingest_real(
    rows: &[RealRow],
    bound: &BoundClaim,
    permutations: usize,
    bootstrap_resamples: usize,
) -> Result<ContrastResult> {
    let claim: &Claim = &bound.claim;
    let mut by_seed: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let entry = by_seed.entry(r.seed).or_default();
        if r.arm == claim.from || r.arm == "a" {
            entry.0.push(r.diagnostic_value);
        } else if r.arm == claim.to || r.arm == "b" {
            entry.1.push(r.diagnostic_value);
        } else {
            return Err(Error::format(
                "real-side CSV",
                format!(
                    "row {}: arm `{}` matches neither `{}` nor `{}`",
                    i + 1,
                    r.arm,
                    claim.from,
                    claim.to
                ),
            ));
        }
    }
    let stat_seed = *by_seed
        .keys()
        .next()
        .ok_or_else(|| Error::format("real-side CSV", "no rows"))?;
    let per_seed: Vec<SeedArms> = by_seed.into_iter().map(|(s, (a, b))| (s, a, b)).collect();
    summarize_contrast(
        Side::Real,
        &claim.id,
        &bound.binding,
        &per_seed,
        permutations,
        bootstrap_resamples,
        stat_seed,
    )
}
