//! Claim-validation protocol: process families, claims and bindings,
//! probe and real-side contrasts, validity predicates and transfer
//! decisions.

mod claim;
mod contrast;
mod criteria;
pub mod experiment;
pub mod markov;
mod report;
mod family;
mod verdict;

pub use claim::{
    Claim, ClaimBinding, Direction, FalsificationPredicate, PredicateOutcome, DEFAULT_ALPHA, DEFAULT_SEED_QUORUM,
};
pub use contrast::{
    run_probe_contrast, summarize_contrast, BoundClaim, ContrastResult, ContrastSettings, Diagnostic, Probe,
    ProbeProcess, SeedArms, Side, Summaries, DEFAULT_BOOTSTRAP_RESAMPLES, DEFAULT_PERMUTATIONS,
};
pub use criteria::{check_criteria, CriteriaReport, DEFAULT_SMOKE_SAMPLES};
pub use family::{describe, Configuration, Knob, KnobSetting, ParamDomain, ParamSpec, ParamValue, ProcessFamily};
pub use report::{
    emit_claim_card, emit_reduction_record, CardNarrative, ClaimCard, ReductionRecord, ReductionStep, StepStatus,
};
pub use verdict::{external_validity, internal_validity, transfer_decision, ClaimVerdict, TransferStatus, ValidityReport};
