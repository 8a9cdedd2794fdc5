use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::claim::{Claim, ClaimBinding};
use super::contrast::{BoundClaim, ContrastResult, Side};
use super::verdict::{ClaimVerdict, TransferStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Checked,
    QualitativeOnly,
    Pending,
    Failed,
}

impl StepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StepStatus::Checked => "checked",
            StepStatus::QualitativeOnly => "qualitative only",
            StepStatus::Pending => "pending",
            StepStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub step: u32,
    pub operator: String,
    pub preserved_invariants: String,
    pub hypothesis: String,
    pub rejection_condition: String,
    pub status: StepStatus,
}

/// Ordered ledger of how a realistic setting was reduced to the probe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionRecord {
    pub title: String,
    pub steps: Vec<ReductionStep>,
}

impl ReductionRecord {
    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Validation("reduction record has no steps".into()));
        }
        for s in &self.steps {
            if s.rejection_condition.trim().is_empty() {
                return Err(Error::Validation(format!("step {} has an empty rejection condition", s.step)));
            }
        }
        Ok(())
    }

    /// The four-step record for the Markov temperature probe.
    pub fn markov_temperature() -> Self {
        let step = |step, operator: &str, preserved: &str, hypothesis: &str, rejection: &str, status| ReductionStep {
            step,
            operator: operator.into(),
            preserved_invariants: preserved.into(),
            hypothesis: hypothesis.into(),
            rejection_condition: rejection.into(),
            status,
        };
        Self {
            title: "Markov temperature probe".into(),
            steps: vec![
                step(
                    1,
                    "Replace natural text with sequences from a Markov chain of chosen entropy rate",
                    "The transition law is explicit and its entropy rate is set by construction",
                    "Decoded sequences fall into well defined regimes relative to the typical-set band",
                    "Regime labels fail to distinguish the decoding conditions",
                    StepStatus::Checked,
                ),
                step(
                    2,
                    "Drop meaning and topic so only transition statistics remain",
                    "Sequence likelihood is still computed exactly under the known chain",
                    "Average NLL under the chain is a faithful diagnostic of the generator",
                    "Average NLL disagrees with the likelihood assigned by the known chain",
                    StepStatus::Checked,
                ),
                step(
                    3,
                    "Hold the trained model fixed and vary only the sampling temperature",
                    "A single knob changes, so decoding diversity is the only moving part",
                    "Raising temperature moves regime mass from over-conservative through typical to uncertain",
                    "The probe-side regime shift does not appear for the declared contrast",
                    StepStatus::Checked,
                ),
                step(
                    4,
                    "Compare against outputs of a language model trained on real text",
                    "The same temperature ordering is applied on both sides",
                    "Real-text degeneration and diversity follow the probe-side direction",
                    "Real-text outputs show no matching directional change under the same ordering",
                    StepStatus::QualitativeOnly,
                ),
            ],
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let record: Self = serde_json::from_str(s)?;
        record.validate()?;
        Ok(record)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("Reduction record: {}\n", self.title);
        for s in &self.steps {
            let _ = writeln!(out, "\n[{}] {} ({})", s.step, s.operator, s.status.as_str());
            let _ = writeln!(out, "    preserves: {}", s.preserved_invariants);
            let _ = writeln!(out, "    expects:   {}", s.hypothesis);
            let _ = writeln!(out, "    rejected if: {}", s.rejection_condition);
        }
        out
    }
}

/// Validates and serializes a record.
pub fn emit_reduction_record(record: &ReductionRecord) -> Result<String> {
    record.validate()?;
    record.to_json()
}

/// Free-text fields of a claim card. Missing fields are filled from the
/// claim itself.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardNarrative {
    #[serde(default)]
    pub statement: Option<String>,
    #[serde(default)]
    pub intervention: Option<String>,
    #[serde(default)]
    pub diagnostics: Option<String>,
    #[serde(default)]
    pub real_side: Option<String>,
    #[serde(default)]
    pub failure_condition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCard {
    pub claim: Claim,
    pub binding: ClaimBinding,
    pub statement: String,
    pub intervention: String,
    pub diagnostics: String,
    pub real_side: String,
    pub failure_condition: String,
    pub results: Vec<ContrastResult>,
    pub verdict: ClaimVerdict,
    pub status: TransferStatus,
    /// Set when the status is outside the two-by-two decision matrix.
    pub status_is_extension: bool,
}

pub fn emit_claim_card(bound: &BoundClaim, results: &[ContrastResult], verdict: &ClaimVerdict) -> ClaimCard {
    let claim = &bound.claim;
    let binding = &bound.binding;
    let n = bound.narrative.clone().unwrap_or_default();
    let verb = match binding.direction {
        super::claim::Direction::Increase => "increases",
        super::claim::Direction::Decrease => "decreases",
    };
    let has_real = results.iter().any(|r| r.side == Side::Real);
    ClaimCard {
        claim: claim.clone(),
        binding: binding.clone(),
        statement: n.statement.unwrap_or_else(|| {
            format!(
                "Moving `{}` from {} to {} {} `{}`",
                claim.knob, claim.from, claim.to, verb, claim.diagnostic
            )
        }),
        intervention: n
            .intervention
            .unwrap_or_else(|| format!("{}: {} -> {}", claim.knob, claim.from, claim.to)),
        diagnostics: n.diagnostics.unwrap_or_else(|| claim.diagnostic.clone()),
        real_side: n.real_side.unwrap_or_else(|| {
            if has_real {
                "ingested real-side contrast".into()
            } else {
                "none evaluated".into()
            }
        }),
        failure_condition: n.failure_condition.unwrap_or_else(|| {
            format!(
                "signed effect below margin {} or any of [{}] fails at level {}",
                binding.margin,
                binding.predicates.iter().map(|p| p.name()).collect::<Vec<_>>().join(", "),
                binding.alpha
            )
        }),
        results: results.to_vec(),
        verdict: verdict.clone(),
        status: verdict.status,
        status_is_extension: verdict.status.is_extension(),
    }
}

impl ClaimCard {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("Claim card: {}\n", self.claim.id);
        let _ = writeln!(out, "  Claim:             {}", self.statement);
        let _ = writeln!(out, "  Intervention:      {}", self.intervention);
        let _ = writeln!(out, "  Diagnostics:       {}", self.diagnostics);
        let _ = writeln!(out, "  Real side:         {}", self.real_side);
        let _ = writeln!(out, "  Failure condition: {}", self.failure_condition);
        for r in &self.results {
            let side = match r.side {
                Side::Probe => "probe",
                Side::Real => "real",
            };
            let _ = write!(
                out,
                "  {side:<5} mu_a={:.6} mu_b={:.6} delta={:+.6} (n={}/{})",
                r.mu_a, r.mu_b, r.delta, r.n_a, r.n_b
            );
            if let Some(p) = r.summaries.p_value {
                let _ = write!(out, " p={p:.4}");
            }
            out.push('\n');
        }
        let ev = match self.verdict.ev {
            Some(true) => "1",
            Some(false) => "0",
            None => "not evaluated",
        };
        let _ = writeln!(out, "  IV={} EV={ev}", u8::from(self.verdict.iv));
        let _ = write!(out, "  Transfer status:   {}", self.status);
        if self.status_is_extension {
            out.push_str(" [extension: outside the IV/EV decision matrix]");
        }
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_record_round_trips() {
        let r = ReductionRecord::markov_temperature();
        assert_eq!(r.steps.len(), 4);
        let back = ReductionRecord::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let statuses: Vec<_> = r.steps.iter().map(|s| s.status).collect();
        assert_eq!(
            statuses,
            [
                StepStatus::Checked,
                StepStatus::Checked,
                StepStatus::Checked,
                StepStatus::QualitativeOnly
            ]
        );
    }

    #[test]
    fn empty_rejection_condition_rejected() {
        let mut r = ReductionRecord::markov_temperature();
        r.steps[2].rejection_condition = "  ".into();
        assert!(r.validate().is_err());
        assert!(ReductionRecord::from_json(&serde_json::to_string(&r).unwrap()).is_err());
    }
}
