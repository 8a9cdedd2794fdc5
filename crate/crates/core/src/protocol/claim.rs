use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::contrast::ContrastResult;
use crate::error::{Error, Result};

/// Directional hypothesis `h = (u, v_a, v_b, m_j)`: moving knob `knob` from
/// `from` to `to` changes diagnostic `diagnostic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub knob: String,
    pub from: String,
    pub to: String,
    pub diagnostic: String,
}

impl Claim {
    pub fn new(
        id: impl Into<String>,
        knob: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
        diagnostic: impl Into<String>,
    ) -> Result<Self> {
        let claim = Self {
            id: id.into(),
            knob: knob.into(),
            from: from.into(),
            to: to.into(),
            diagnostic: diagnostic.into(),
        };
        claim.validate()?;
        Ok(claim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.from == self.to {
            return Err(Error::Validation(format!(
                "claim `{}` contrasts `{}` with itself",
                self.id, self.from
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Direction {
    Decrease,
    Increase,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Decrease => -1.0,
            Direction::Increase => 1.0,
        }
    }
}

impl TryFrom<i8> for Direction {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Direction::Increase),
            -1 => Ok(Direction::Decrease),
            other => Err(format!("direction must be +1 or -1, got {other}")),
        }
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        match d {
            Direction::Decrease => -1,
            Direction::Increase => 1,
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED_QUORUM: f64 = 0.9;

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_quorum() -> f64 {
    DEFAULT_SEED_QUORUM
}

/// Falsification binding `B(h)`: expected direction, probe-side margin,
/// predicates and significance level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimBinding {
    pub direction: Direction,
    #[serde(default)]
    pub margin: f64,
    pub predicates: Vec<FalsificationPredicate>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl ClaimBinding {
    pub fn new(direction: Direction, margin: f64, predicates: Vec<FalsificationPredicate>) -> Self {
        Self {
            direction,
            margin,
            predicates,
            alpha: DEFAULT_ALPHA,
        }
    }

    /// Margin and level ranges. An empty predicate set is reported by the
    /// criteria check rather than rejected here.
    pub fn validate(&self) -> Result<()> {
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::param("margin", format!("must be finite and ≥ 0, got {}", self.margin)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        for p in &self.predicates {
            if let FalsificationPredicate::SeedStability { quorum } = p {
                if !(*quorum > 0.0 && *quorum <= 1.0) {
                    return Err(Error::param("quorum", format!("must lie in (0, 1], got {quorum}")));
                }
            }
        }
        Ok(())
    }
}

/// Built-in falsification predicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FalsificationPredicate {
    /// One-sided permutation p-value below `α`.
    OneSidedPermutation,
    /// Bootstrap lower bound of `s_h·Δ` above zero.
    CiExcludesZero,
    /// At least a `quorum` fraction of seeds show `sign(Δ) = s_h`.
    SeedStability {
        #[serde(default = "default_quorum")]
        quorum: f64,
    },
}

impl FalsificationPredicate {
    pub fn name(&self) -> &'static str {
        match self {
            FalsificationPredicate::OneSidedPermutation => "one_sided_permutation",
            FalsificationPredicate::CiExcludesZero => "ci_excludes_zero",
            FalsificationPredicate::SeedStability { .. } => "seed_stability",
        }
    }

    /// The default set: all three predicates.
    pub fn standard() -> Vec<Self> {
        vec![
            FalsificationPredicate::OneSidedPermutation,
            FalsificationPredicate::CiExcludesZero,
            FalsificationPredicate::SeedStability {
                quorum: DEFAULT_SEED_QUORUM,
            },
        ]
    }

    pub fn evaluate(&self, result: &ContrastResult, binding: &ClaimBinding) -> Result<PredicateOutcome> {
        let z = &result.summaries;
        let mut used = BTreeMap::new();
        let passed = match self {
            FalsificationPredicate::OneSidedPermutation => {
                let p = z.p_value.ok_or(Error::MissingSummary {
                    predicate: self.name(),
                    field: "p_value",
                })?;
                check_direction(self.name(), z.direction, binding)?;
                used.insert("p_value".into(), p);
                used.insert("alpha".into(), binding.alpha);
                p < binding.alpha
            }
            FalsificationPredicate::CiExcludesZero => {
                let lower = z.directional_lower_bound.ok_or(Error::MissingSummary {
                    predicate: self.name(),
                    field: "directional_lower_bound",
                })?;
                check_direction(self.name(), z.direction, binding)?;
                used.insert("directional_lower_bound".into(), lower);
                if let Some(level) = z.bound_level {
                    used.insert("bound_level".into(), level);
                }
                lower > 0.0
            }
            FalsificationPredicate::SeedStability { quorum } => {
                let signs = z.seed_signs.as_ref().ok_or(Error::MissingSummary {
                    predicate: self.name(),
                    field: "seed_signs",
                })?;
                if signs.is_empty() {
                    return Err(Error::MissingSummary {
                        predicate: self.name(),
                        field: "seed_signs",
                    });
                }
                let expected = i8::from(binding.direction);
                let agree = signs.iter().filter(|&&s| s == expected).count() as f64 / signs.len() as f64;
                used.insert("agreement".into(), agree);
                used.insert("quorum".into(), *quorum);
                agree >= *quorum
            }
        };
        Ok(PredicateOutcome {
            predicate: self.name().to_string(),
            passed,
            used,
        })
    }
}

/// p-values and bounds are computed for one direction; refuse to reuse them
/// for the other.
fn check_direction(name: &'static str, stored: Option<Direction>, binding: &ClaimBinding) -> Result<()> {
    match stored {
        Some(d) if d != binding.direction => Err(Error::Validation(format!(
            "`{name}` summary was computed for direction {} but the binding declares {}",
            i8::from(d),
            i8::from(binding.direction)
        ))),
        None => Err(Error::MissingSummary {
            predicate: name,
            field: "direction",
        }),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateOutcome {
    pub predicate: String,
    pub passed: bool,
    /// Numbers the decision was based on.
    pub used: BTreeMap<String, f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claim_needs_distinct_labels() {
        assert!(Claim::new("h", "temperature", "1.0", "1.0", "avg_nll").is_err());
        assert!(Claim::new("h", "temperature", "1.0", "1.5", "avg_nll").is_ok());
    }

    #[test]
    fn direction_serde() {
        assert_eq!(serde_json::to_string(&Direction::Decrease).unwrap(), "-1");
        assert_eq!(serde_json::from_str::<Direction>("1").unwrap(), Direction::Increase);
        assert!(serde_json::from_str::<Direction>("0").is_err());
    }

    #[test]
    fn binding_defaults_and_validation() {
        let b: ClaimBinding =
            serde_json::from_str(r#"{"direction": 1, "predicates": [{"kind": "seed_stability"}]}"#).unwrap();
        assert_eq!(b.alpha, 0.05);
        assert_eq!(b.margin, 0.0);
        assert_eq!(b.predicates, vec![FalsificationPredicate::SeedStability { quorum: 0.9 }]);
        assert!(b.validate().is_ok());
        let mut bad = b.clone();
        bad.alpha = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = b;
        bad.margin = -0.1;
        assert!(bad.validate().is_err());
    }
}
