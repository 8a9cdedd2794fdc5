use std::fmt;

use serde::{Deserialize, Serialize};

use super::claim::{ClaimBinding, PredicateOutcome};
use super::contrast::{ContrastResult, Side};
use crate::error::{Error, Result};

/// Outcome of the IV or EV predicate with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub side: Side,
    pub passed: bool,
    /// `s_h·Δ`.
    pub signed_delta: f64,
    /// `δ_h` on the probe side, 0 on the real side.
    pub threshold: f64,
    pub direction_passed: bool,
    pub predicates: Vec<PredicateOutcome>,
}

fn validity(result: &ContrastResult, binding: &ClaimBinding, side: Side, threshold: f64) -> Result<ValidityReport> {
    if result.side != side {
        return Err(Error::param(
            "side",
            format!("expected a {side:?} contrast, got {:?}", result.side).to_lowercase(),
        ));
    }
    binding.validate()?;
    if binding.predicates.is_empty() {
        return Err(Error::Validation("binding declares no falsification predicates".into()));
    }
    result.validate()?;
    let signed_delta = binding.direction.sign() * result.delta;
    let direction_passed = signed_delta >= threshold;
    let predicates = binding
        .predicates
        .iter()
        .map(|p| p.evaluate(result, binding))
        .collect::<Result<Vec<_>>>()?;
    let passed = direction_passed && predicates.iter().all(|p| p.passed);
    Ok(ValidityReport {
        side,
        passed,
        signed_delta,
        threshold,
        direction_passed,
        predicates,
    })
}

/// IV: `s_h·Δ ≥ δ_h` and every predicate passes.
pub fn internal_validity(result: &ContrastResult, binding: &ClaimBinding) -> Result<ValidityReport> {
    validity(result, binding, Side::Probe, binding.margin)
}

/// EV: `s_h·Δ ≥ 0` on ingested real-side data and every predicate passes.
pub fn external_validity(result: &ContrastResult, binding: &ClaimBinding) -> Result<ValidityReport> {
    validity(result, binding, Side::Real, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferStatus {
    TransferSupported,
    ProbeLocal,
    Rejected,
    /// IV holds but no real-side data was evaluated. Not part of the
    /// two-by-two decision matrix; reports flag it.
    Pending,
}

impl TransferStatus {
    pub fn is_extension(self) -> bool {
        self == TransferStatus::Pending
    }

    pub fn describe(self) -> &'static str {
        match self {
            TransferStatus::TransferSupported => "transfer supported",
            TransferStatus::ProbeLocal => "probe-local result",
            TransferStatus::Rejected => "claim rejected under declared criterion",
            TransferStatus::Pending => "pending: no real-side evaluation",
        }
    }
}

impl fmt::Display for TransferStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

pub fn transfer_decision(iv: bool, ev: Option<bool>) -> TransferStatus {
    match (iv, ev) {
        (false, _) => TransferStatus::Rejected,
        (true, Some(true)) => TransferStatus::TransferSupported,
        (true, Some(false)) => TransferStatus::ProbeLocal,
        (true, None) => TransferStatus::Pending,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    pub claim_id: String,
    pub iv: bool,
    /// `None` when no real-side contrast was evaluated.
    pub ev: Option<bool>,
    pub status: TransferStatus,
    pub internal: ValidityReport,
    #[serde(default)]
    pub external: Option<ValidityReport>,
}

impl ClaimVerdict {
    /// Evaluates IV, EV (when a real-side result is given) and the transfer
    /// status. Pure in its inputs.
    pub fn evaluate(
        claim_id: &str,
        binding: &ClaimBinding,
        probe: &ContrastResult,
        real: Option<&ContrastResult>,
    ) -> Result<Self> {
        let internal = internal_validity(probe, binding)?;
        let external = real.map(|r| external_validity(r, binding)).transpose()?;
        let iv = internal.passed;
        let ev = external.as_ref().map(|e| e.passed);
        Ok(Self {
            claim_id: claim_id.to_string(),
            iv,
            ev,
            status: transfer_decision(iv, ev),
            internal,
            external,
        })
    }

    /// Status recomputed from `(iv, ev)` matches the stored one.
    pub fn is_consistent(&self) -> bool {
        self.status == transfer_decision(self.iv, self.ev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::claim::{Direction, FalsificationPredicate};
    use crate::protocol::contrast::Summaries;

    fn result(side: Side, mu_a: f64, mu_b: f64, p: f64, lower: f64, signs: Vec<i8>) -> ContrastResult {
        ContrastResult {
            side,
            claim_id: "h".into(),
            mu_a,
            mu_b,
            delta: mu_b - mu_a,
            n_a: 10,
            n_b: 10,
            seeds: vec![0],
            summaries: Summaries {
                direction: Some(Direction::Increase),
                p_value: Some(p),
                directional_lower_bound: Some(lower),
                bound_level: Some(0.05),
                seed_signs: Some(signs),
                permutations: None,
                bootstrap_resamples: None,
            },
            configuration_a: None,
            configuration_b: None,
        }
    }

    fn binding(margin: f64) -> ClaimBinding {
        ClaimBinding::new(Direction::Increase, margin, FalsificationPredicate::standard())
    }

    #[test]
    fn margin_gate() {
        let good = result(Side::Probe, 1.0, 1.5, 0.001, 0.3, vec![1; 10]);
        assert!(internal_validity(&good, &binding(0.1)).unwrap().passed);
        let small = result(Side::Probe, 1.0, 1.05, 0.001, 0.01, vec![1; 10]);
        let r = internal_validity(&small, &binding(0.1)).unwrap();
        assert!(!r.passed);
        assert!(r.predicates.iter().all(|p| p.passed));
    }

    #[test]
    fn ev_direction_gate_is_inclusive() {
        let zero = result(Side::Real, 1.0, 1.0, 0.001, 0.1, vec![1; 10]);
        let r = external_validity(&zero, &binding(0.5)).unwrap();
        assert!(r.direction_passed);
        assert!(r.passed);
        let failing = result(Side::Real, 1.0, 1.2, 0.3, -0.1, vec![1, -1]);
        assert!(!external_validity(&failing, &binding(0.0)).unwrap().passed);
    }

    #[test]
    fn side_mismatch_is_parameter_error() {
        let r = result(Side::Real, 1.0, 1.5, 0.001, 0.3, vec![1]);
        let err = internal_validity(&r, &binding(0.0)).unwrap_err();
        assert_eq!(err.category(), crate::error::ErrorCategory::Parameter);
        let p = result(Side::Probe, 1.0, 1.5, 0.001, 0.3, vec![1]);
        assert!(external_validity(&p, &binding(0.0)).is_err());
    }

    #[test]
    fn truth_table() {
        assert_eq!(transfer_decision(true, Some(true)), TransferStatus::TransferSupported);
        assert_eq!(transfer_decision(true, Some(false)), TransferStatus::ProbeLocal);
        assert_eq!(transfer_decision(false, Some(true)), TransferStatus::Rejected);
        assert_eq!(transfer_decision(false, Some(false)), TransferStatus::Rejected);
        assert_eq!(transfer_decision(false, None), TransferStatus::Rejected);
        assert_eq!(transfer_decision(true, None), TransferStatus::Pending);
    }
}
