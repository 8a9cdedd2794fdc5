//! The Markov temperature probe as a protocol process: a fixed sequence model
//! decoded under a configurable temperature and scored against the chain.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::claim::{Claim, ClaimBinding, Direction, FalsificationPredicate};
use super::contrast::{BoundClaim, Diagnostic, Probe, ProbeProcess};
use super::family::{Configuration, Knob, KnobSetting, ParamDomain, ParamSpec, ParamValue, ProcessFamily};
use super::report::CardNarrative;
use crate::error::{Error, Result};
use crate::markov::{sequence_nll, NllMode, StationaryDistribution, Token, TokenSequence, TransitionMatrix};
use crate::model::{decode, Decoding, DecodingConfig, SequenceModel};
use crate::rng::{sample_categorical, ProbeRng};
use crate::typical::{classify, Regime, TypicalSetBand};

pub const DECODING_PARAM: &str = "decoding";
pub const LENGTH_PARAM: &str = "max_new_tokens";
pub const TEMPERATURE_KNOB: &str = "temperature";
pub const GREEDY_LABEL: &str = "greedy";

/// A decoded sequence scored under the known chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSequence {
    pub sequence: TokenSequence,
    pub avg_nll: f64,
    pub regime: Regime,
}

/// Draws a one-token prompt from `π`, decodes with the configured mode, and
/// scores the result by conditional average NLL.
pub struct MarkovDecodingProcess {
    pub model: Arc<dyn SequenceModel>,
    pub matrix: TransitionMatrix,
    pub stationary: StationaryDistribution,
    pub band: TypicalSetBand,
}

impl MarkovDecodingProcess {
    pub fn new(
        model: Arc<dyn SequenceModel>,
        matrix: TransitionMatrix,
        stationary: StationaryDistribution,
        band: TypicalSetBand,
    ) -> Result<Self> {
        if model.vocab_size() != matrix.size() {
            return Err(Error::param(
                "model",
                format!("vocabulary {} does not match chain size {}", model.vocab_size(), matrix.size()),
            ));
        }
        Ok(Self {
            model,
            matrix,
            stationary,
            band,
        })
    }

    pub fn decoding_config(config: &Configuration) -> Result<DecodingConfig> {
        let decoding = match config.get(DECODING_PARAM) {
            Some(ParamValue::Label(l)) if l == GREEDY_LABEL => Decoding::Greedy,
            Some(ParamValue::Number(t)) => Decoding::Sampling { temperature: *t },
            other => {
                return Err(Error::param(
                    "decoding",
                    format!("expected `greedy` or a temperature, got {other:?}"),
                ))
            }
        };
        let len = match config.get(LENGTH_PARAM) {
            Some(ParamValue::Number(x)) if *x >= 1.0 && x.fract() == 0.0 => *x as usize,
            other => {
                return Err(Error::param(
                    "max_new_tokens",
                    format!("expected a positive integer, got {other:?}"),
                ))
            }
        };
        let cfg = DecodingConfig {
            decoding,
            max_new_tokens: len,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ProbeProcess for MarkovDecodingProcess {
    type Sample = ScoredSequence;

    fn sample(&self, config: &Configuration, rng: &mut ProbeRng) -> Result<ScoredSequence> {
        let cfg = Self::decoding_config(config)?;
        let first = sample_categorical(self.stationary.probabilities(), rng) as Token;
        let prompt = TokenSequence::new(vec![first])?;
        let sequence = decode(self.model.as_ref(), &prompt, &cfg, rng)?;
        let avg_nll = sequence_nll(&self.matrix, &self.stationary, &sequence, NllMode::Conditional)?;
        let regime = classify(avg_nll, &self.band)?;
        Ok(ScoredSequence {
            sequence,
            avg_nll,
            regime,
        })
    }
}

/// Temperature knob values: greedy, 1.0, 1.3, 1.5.
pub fn temperature_family(max_new_tokens: usize) -> ProcessFamily {
    let mut baseline = Configuration::new();
    baseline.insert(DECODING_PARAM.into(), ParamValue::Number(1.0));
    baseline.insert(LENGTH_PARAM.into(), ParamValue::Number(max_new_tokens as f64));
    let setting = |label: &str, value: ParamValue| KnobSetting {
        label: label.into(),
        value,
    };
    ProcessFamily {
        params: vec![
            ParamSpec {
                name: DECODING_PARAM.into(),
                domain: ParamDomain::AnyOf {
                    domains: vec![
                        ParamDomain::Labels {
                            labels: vec![GREEDY_LABEL.into()],
                        },
                        ParamDomain::Real {
                            min: Some(0.0),
                            max: None,
                            exclusive_min: true,
                        },
                    ],
                },
            },
            ParamSpec {
                name: LENGTH_PARAM.into(),
                domain: ParamDomain::Integer { min: Some(1), max: None },
            },
        ],
        baseline,
        knobs: vec![Knob {
            name: TEMPERATURE_KNOB.into(),
            param: DECODING_PARAM.into(),
            settings: vec![
                setting(GREEDY_LABEL, ParamValue::Label(GREEDY_LABEL.into())),
                setting("1.0", ParamValue::Number(1.0)),
                setting("1.3", ParamValue::Number(1.3)),
                setting("1.5", ParamValue::Number(1.5)),
            ],
        }],
    }
}

/// `avg_nll`, `regime_score`, `off_support` and `typical`.
pub fn markov_diagnostics() -> Vec<Diagnostic<ScoredSequence>> {
    vec![
        Diagnostic::new("avg_nll", "scored_sequence", |y: &ScoredSequence| y.avg_nll),
        Diagnostic::new("regime_score", "scored_sequence", |y: &ScoredSequence| y.regime.score()),
        Diagnostic::new("off_support", "scored_sequence", |y: &ScoredSequence| {
            f64::from(u8::from(y.avg_nll.is_infinite()))
        }),
        Diagnostic::new("typical", "scored_sequence", |y: &ScoredSequence| {
            f64::from(u8::from(y.regime == Regime::Typical))
        }),
    ]
}

/// Raising the temperature from `from` to `to` increases `diagnostic`.
pub fn temperature_claim(id: &str, from: &str, to: &str, diagnostic: &str, margin: f64) -> Result<BoundClaim> {
    Ok(BoundClaim {
        claim: Claim::new(id, TEMPERATURE_KNOB, from, to, diagnostic)?,
        binding: ClaimBinding::new(Direction::Increase, margin, FalsificationPredicate::standard()),
        narrative: Some(CardNarrative {
            statement: Some(format!(
                "Sampling at temperature {to} instead of {from} raises `{diagnostic}` and shifts decoded \
                 sequences away from the over-conservative regime toward the uncertain one"
            )),
            intervention: Some("temperature over {greedy, 1.0, 1.3, 1.5}".into()),
            diagnostics: Some("average NLL under the known chain and typical-set regime labels".into()),
            real_side: None,
            failure_condition: Some("the declared probe-side shift is absent".into()),
        }),
    })
}

/// Assembles the temperature probe with a single claim.
pub fn temperature_probe(process: MarkovDecodingProcess, claim: BoundClaim, max_new_tokens: usize) -> Probe<MarkovDecodingProcess> {
    Probe {
        family: temperature_family(max_new_tokens),
        process,
        diagnostics: markov_diagnostics(),
        claims: vec![claim],
    }
}
