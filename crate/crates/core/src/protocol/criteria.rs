use serde::{Deserialize, Serialize};

use super::contrast::{Probe, ProbeProcess};
use super::family::{describe, Configuration};
use crate::rng::substream;

/// Samples drawn per configuration for the C1 spot check and C3 smoke test.
pub const DEFAULT_SMOKE_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaReport {
    /// Every configuration reachable from the baseline samples.
    pub c1: bool,
    /// Baseline valid, knobs and interventions well formed.
    pub c2: bool,
    /// Every diagnostic evaluates on a smoke sample.
    pub c3: bool,
    /// Every claim has a non-empty predicate set.
    pub c4: bool,
    /// One line per failed check.
    pub notes: Vec<String>,
}

impl CriteriaReport {
    pub fn valid(&self) -> bool {
        self.c1 && self.c2 && self.c3 && self.c4
    }
}

/// Checks C1 to C4 on an assembled probe. Failures are collected in
/// `notes`, never returned as errors.
pub fn check_criteria<P: ProbeProcess>(probe: &Probe<P>, smoke_samples: usize, seed: u64) -> CriteriaReport {
    let family = &probe.family;
    let mut notes = Vec::new();

    let mut c2 = true;
    if let Err(e) = family.validate(&family.baseline) {
        c2 = false;
        notes.push(format!("C2: baseline invalid: {e}"));
    }
    let mut configs: Vec<Configuration> = vec![family.baseline.clone()];
    for knob in &family.knobs {
        if family.param(&knob.param).is_none() {
            c2 = false;
            notes.push(format!("C2: knob `{}` edits undeclared parameter `{}`", knob.name, knob.param));
            continue;
        }
        if knob.settings.is_empty() {
            c2 = false;
            notes.push(format!("C2: knob `{}` has no admissible values", knob.name));
        }
        for s in &knob.settings {
            match family.intervene(&family.baseline, &knob.name, &s.label) {
                Ok(c) => {
                    if !configs.contains(&c) {
                        configs.push(c);
                    }
                }
                Err(e) => {
                    c2 = false;
                    notes.push(format!("C2: knob `{}` value `{}`: {e}", knob.name, s.label));
                }
            }
        }
    }
    for bound in &probe.claims {
        let claim = &bound.claim;
        if let Err(e) = claim.validate() {
            c2 = false;
            notes.push(format!("C2: {e}"));
        }
        match family.knob(&claim.knob) {
            None => {
                c2 = false;
                notes.push(format!("C2: claim `{}` uses unknown knob `{}`", claim.id, claim.knob));
            }
            Some(k) => {
                for label in [&claim.from, &claim.to] {
                    if k.setting(label).is_none() {
                        c2 = false;
                        notes.push(format!(
                            "C2: claim `{}` value `{label}` not admissible for knob `{}`",
                            claim.id, k.name
                        ));
                    }
                }
            }
        }
    }

    let mut c1 = true;
    let mut c3 = true;
    let mut smoke = Vec::new();
    for (i, config) in configs.iter().enumerate() {
        let mut rng = substream(seed, i as u64);
        for _ in 0..smoke_samples.max(1) {
            match probe.process.sample(config, &mut rng) {
                Ok(y) => smoke.push(y),
                Err(e) => {
                    c1 = false;
                    notes.push(format!("C1: sampling {} failed: {e}", describe(config)));
                    break;
                }
            }
        }
    }
    if smoke.is_empty() {
        c3 = false;
        notes.push("C3: no smoke sample available".into());
    }
    for d in &probe.diagnostics {
        if smoke.iter().any(|y| d.evaluate(y).is_nan()) {
            c3 = false;
            notes.push(format!("C3: diagnostic `{}` returned NaN", d.id));
        }
    }
    for bound in &probe.claims {
        if probe.diagnostic(&bound.claim.diagnostic).is_none() {
            c3 = false;
            notes.push(format!(
                "C3: claim `{}` uses undeclared diagnostic `{}`",
                bound.claim.id, bound.claim.diagnostic
            ));
        }
    }

    let mut c4 = true;
    for bound in &probe.claims {
        if bound.binding.predicates.is_empty() {
            c4 = false;
            notes.push(format!("C4: claim `{}` has no falsification predicates", bound.claim.id));
        }
        if let Err(e) = bound.binding.validate() {
            c4 = false;
            notes.push(format!("C4: claim `{}`: {e}", bound.claim.id));
        }
    }

    CriteriaReport { c1, c2, c3, c4, notes }
}
