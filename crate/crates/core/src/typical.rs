//! Typical-set regimes for average NLL values.
//!
//! A sequence of length `n` is ε-typical for a law with entropy rate `H` when
//! its average NLL lies in the closed band `[H − ε, H + ε]`. Values below the
//! band are over-conservative (too likely), values above it uncertain.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::NllMode;

pub const DEFAULT_EPSILON: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalSetBand {
    pub entropy_rate: f64,
    pub epsilon: f64,
    pub n: usize,
}

impl TypicalSetBand {
    pub fn new(entropy_rate: f64, epsilon: f64, n: usize) -> Result<Self> {
        if !(entropy_rate >= 0.0 && entropy_rate.is_finite()) {
            return Err(Error::param("entropy_rate", format!("must be finite and ≥ 0, got {entropy_rate}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::param("epsilon", format!("must be finite and ≥ 0, got {epsilon}")));
        }
        Ok(Self {
            entropy_rate,
            epsilon,
            n,
        })
    }

    pub fn lower(&self) -> f64 {
        self.entropy_rate - self.epsilon
    }

    pub fn upper(&self) -> f64 {
        self.entropy_rate + self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    OverConservative,
    Typical,
    Uncertain,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::OverConservative, Regime::Typical, Regime::Uncertain];

    /// −1, 0, +1.
    pub fn score(self) -> f64 {
        match self {
            Regime::OverConservative => -1.0,
            Regime::Typical => 0.0,
            Regime::Uncertain => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::OverConservative => "over_conservative",
            Regime::Typical => "typical",
            Regime::Uncertain => "uncertain",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regime of one average NLL value. `+∞` is uncertain.
pub fn classify(avg_nll: f64, band: &TypicalSetBand) -> Result<Regime> {
    if avg_nll.is_nan() || avg_nll < 0.0 {
        return Err(Error::param("avg_nll", format!("must be ≥ 0 or +inf, got {avg_nll}")));
    }
    Ok(if avg_nll < band.lower() {
        Regime::OverConservative
    } else if avg_nll <= band.upper() {
        Regime::Typical
    } else {
        Regime::Uncertain
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeCounts {
    pub over_conservative: usize,
    pub typical: usize,
    pub uncertain: usize,
}

impl RegimeCounts {
    pub fn add(&mut self, regime: Regime) {
        match regime {
            Regime::OverConservative => self.over_conservative += 1,
            Regime::Typical => self.typical += 1,
            Regime::Uncertain => self.uncertain += 1,
        }
    }

    pub fn get(&self, regime: Regime) -> usize {
        match regime {
            Regime::OverConservative => self.over_conservative,
            Regime::Typical => self.typical,
            Regime::Uncertain => self.uncertain,
        }
    }

    pub fn total(&self) -> usize {
        self.over_conservative + self.typical + self.uncertain
    }

    pub fn fraction(&self, regime: Regime) -> f64 {
        self.get(regime) as f64 / self.total() as f64
    }

    /// Mean of [`Regime::score`] over all counted values.
    pub fn mean_score(&self) -> f64 {
        (self.uncertain as f64 - self.over_conservative as f64) / self.total() as f64
    }
}

/// Regime histogram and empirical CDF of a batch of average NLLs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NllSummary {
    pub nlls: Vec<f64>,
    pub regime_counts: RegimeCounts,
    /// Number of `+∞` values (counted as uncertain, excluded from the CDF).
    pub infinite: usize,
    /// `(nll, fraction of finite values ≤ nll)` at each distinct finite value.
    pub cdf: Vec<(f64, f64)>,
    pub band: TypicalSetBand,
}

pub fn summarize(nlls: &[f64], band: &TypicalSetBand) -> Result<NllSummary> {
    if nlls.is_empty() {
        return Err(Error::param("nlls", "need at least one value"));
    }
    let mut counts = RegimeCounts::default();
    for &v in nlls {
        counts.add(classify(v, band)?);
    }
    let mut finite: Vec<f64> = nlls.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let n = finite.len() as f64;
    let mut cdf: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in finite.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match cdf.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => cdf.push((v, frac)),
        }
    }
    Ok(NllSummary {
        nlls: nlls.to_vec(),
        regime_counts: counts,
        infinite: nlls.len() - finite.len(),
        cdf,
        band: *band,
    })
}

impl NllSummary {
    /// Mean over finite values; `None` when every value is infinite.
    pub fn finite_mean(&self) -> Option<f64> {
        let finite: Vec<f64> = self.nlls.iter().copied().filter(|v| v.is_finite()).collect();
        (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64)
    }

    pub fn infinite_fraction(&self) -> f64 {
        self.infinite as f64 / self.nlls.len() as f64
    }

    pub fn write_cdf_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["nll", "cdf"])?;
        for (v, c) in &self.cdf {
            out.write_record([v.to_string(), c.to_string()])?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// `{"regime_counts", "band", "count", "infinite", "mode"}`.
    pub fn report_json(&self, mode: NllMode) -> serde_json::Value {
        serde_json::json!({
            "regime_counts": self.regime_counts,
            "band": self.band,
            "count": self.nlls.len(),
            "infinite": self.infinite,
            "mode": mode,
            "finite_mean": self.finite_mean(),
        })
    }
}
