use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value of one configuration parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Label(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(x) => write!(f, "{x}"),
            ParamValue::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(x: f64) -> Self {
        ParamValue::Number(x)
    }
}

impl From<&str> for ParamValue {
    fn from(s: &str) -> Self {
        ParamValue::Label(s.to_string())
    }
}

/// Admissible values of a parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDomain {
    Real {
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
        #[serde(default)]
        exclusive_min: bool,
    },
    Integer {
        #[serde(default)]
        min: Option<i64>,
        #[serde(default)]
        max: Option<i64>,
    },
    Labels {
        labels: Vec<String>,
    },
    AnyOf {
        domains: Vec<ParamDomain>,
    },
}

impl ParamDomain {
    pub fn admits(&self, value: &ParamValue) -> bool {
        match (self, value) {
            (
                ParamDomain::Real {
                    min,
                    max,
                    exclusive_min,
                },
                ParamValue::Number(x),
            ) => {
                x.is_finite()
                    && min.is_none_or(|lo| if *exclusive_min { *x > lo } else { *x >= lo })
                    && max.is_none_or(|hi| *x <= hi)
            }
            (ParamDomain::Integer { min, max }, ParamValue::Number(x)) => {
                x.is_finite()
                    && x.fract() == 0.0
                    && min.is_none_or(|lo| *x >= lo as f64)
                    && max.is_none_or(|hi| *x <= hi as f64)
            }
            (ParamDomain::Labels { labels }, ParamValue::Label(s)) => labels.contains(s),
            (ParamDomain::AnyOf { domains }, v) => domains.iter().any(|d| d.admits(v)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub domain: ParamDomain,
}

/// A point in the configuration space.
pub type Configuration = BTreeMap<String, ParamValue>;

pub fn describe(config: &Configuration) -> String {
    let parts: Vec<String> = config.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// One admissible knob value: a label and the parameter value it sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnobSetting {
    pub label: String,
    pub value: ParamValue,
}

/// Interpretable control; setting `label` edits parameter `param`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knob {
    pub name: String,
    pub param: String,
    pub settings: Vec<KnobSetting>,
}

impl Knob {
    pub fn setting(&self, label: &str) -> Option<&KnobSetting> {
        self.settings.iter().find(|s| s.label == label)
    }
}

/// Configuration space, baseline configuration and knobs of a known process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessFamily {
    pub params: Vec<ParamSpec>,
    pub baseline: Configuration,
    pub knobs: Vec<Knob>,
}

impl ProcessFamily {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn knob(&self, name: &str) -> Option<&Knob> {
        self.knobs.iter().find(|k| k.name == name)
    }

    /// Every declared parameter present and admissible; no undeclared keys.
    pub fn validate(&self, config: &Configuration) -> Result<()> {
        for spec in &self.params {
            match config.get(&spec.name) {
                None => {
                    return Err(Error::Validation(format!(
                        "configuration {} lacks parameter `{}`",
                        describe(config),
                        spec.name
                    )))
                }
                Some(v) if !spec.domain.admits(v) => {
                    return Err(Error::Validation(format!(
                        "value {v} is not admissible for parameter `{}`",
                        spec.name
                    )))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = config.keys().find(|k| self.param(k).is_none()) {
            return Err(Error::Validation(format!("unknown parameter `{extra}`")));
        }
        Ok(())
    }

    /// Intervention map `I_{knob,label}`: copies `base` and overwrites the
    /// knob's parameter with the setting's value.
    pub fn intervene(&self, base: &Configuration, knob: &str, label: &str) -> Result<Configuration> {
        let k = self
            .knob(knob)
            .ok_or_else(|| Error::Validation(format!("unknown knob `{knob}`")))?;
        let setting = k.setting(label).ok_or_else(|| {
            Error::Validation(format!("`{label}` is not an admissible value of knob `{knob}`"))
        })?;
        let mut out = base.clone();
        out.insert(k.param.clone(), setting.value.clone());
        self.validate(&out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family() -> ProcessFamily {
        ProcessFamily {
            params: vec![ParamSpec {
                name: "decoding".into(),
                domain: ParamDomain::AnyOf {
                    domains: vec![
                        ParamDomain::Labels {
                            labels: vec!["greedy".into()],
                        },
                        ParamDomain::Real {
                            min: Some(0.0),
                            max: None,
                            exclusive_min: true,
                        },
                    ],
                },
            }],
            baseline: [("decoding".to_string(), ParamValue::Number(1.0))].into(),
            knobs: vec![Knob {
                name: "temperature".into(),
                param: "decoding".into(),
                settings: vec![
                    KnobSetting {
                        label: "greedy".into(),
                        value: "greedy".into(),
                    },
                    KnobSetting {
                        label: "1.5".into(),
                        value: 1.5.into(),
                    },
                ],
            }],
        }
    }

    #[test]
    fn domains() {
        let real = ParamDomain::Real {
            min: Some(0.0),
            max: Some(2.0),
            exclusive_min: true,
        };
        assert!(!real.admits(&0.0.into()));
        assert!(real.admits(&2.0.into()));
        assert!(!real.admits(&"x".into()));
        let int = ParamDomain::Integer {
            min: Some(1),
            max: None,
        };
        assert!(int.admits(&3.0.into()));
        assert!(!int.admits(&3.5.into()));
        assert!(!int.admits(&0.0.into()));
    }

    #[test]
    fn intervention_edits_one_param() {
        let f = family();
        let c = f.intervene(&f.baseline, "temperature", "greedy").unwrap();
        assert_eq!(c["decoding"], ParamValue::Label("greedy".into()));
        assert!(f.intervene(&f.baseline, "temperature", "9.9").is_err());
        assert!(f.intervene(&f.baseline, "nope", "greedy").is_err());
    }

    #[test]
    fn validation_catches_missing_unknown_and_inadmissible() {
        let f = family();
        assert!(f.validate(&f.baseline).is_ok());
        assert!(f.validate(&Configuration::new()).is_err());
        let mut extra = f.baseline.clone();
        extra.insert("foo".into(), 1.0.into());
        assert!(f.validate(&extra).is_err());
        let mut bad = f.baseline.clone();
        bad.insert("decoding".into(), (-1.0).into());
        assert!(f.validate(&bad).is_err());
    }

    #[test]
    fn param_value_json_is_untagged() {
        let c: Configuration = serde_json::from_str(r#"{"a": 1.5, "b": "greedy"}"#).unwrap();
        assert_eq!(c["a"], ParamValue::Number(1.5));
        assert_eq!(c["b"], ParamValue::Label("greedy".into()));
    }
}
