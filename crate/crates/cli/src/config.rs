//! Merges a JSON config (or a replayed manifest) over parsed flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Common;
use crate::UsageError;

fn usage(msg: String) -> anyhow::Error {
    UsageError(msg).into()
}

fn read_config(path: &Path, command: &str) -> anyhow::Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::Error::new(e).context(format!("reading config {}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(usage(format!("config {} must be a JSON object", path.display())));
    };
    // a manifest replays its resolved configuration
    if obj.get("tool").and_then(Value::as_str) == Some(crate::manifest::TOOL) {
        let recorded = obj.get("command").and_then(Value::as_str).unwrap_or_default();
        if recorded != command {
            return Err(usage(format!(
                "manifest {} records command `{recorded}`, not `{command}`",
                path.display()
            )));
        }
        return match obj.remove("config") {
            Some(Value::Object(c)) => Ok(c),
            _ => Err(usage(format!("manifest {} has no config object", path.display()))),
        };
    }
    Ok(obj)
}

/// Returns the effective arguments and the resolved configuration recorded in
/// the manifest. Config keys win over flags; unknown keys are usage errors.
pub fn resolve<T: Serialize + DeserializeOwned>(
    command: &str,
    args: T,
    common: &mut Common,
) -> anyhow::Result<(T, Value)> {
    let Value::Object(mut merged) = serde_json::to_value(&args)? else {
        unreachable!("argument structs serialize to objects");
    };
    if let Some(path) = common.config.clone() {
        for (key, value) in read_config(&path, command)? {
            match key.as_str() {
                "seed" => {
                    common.seed = serde_json::from_value(value)
                        .map_err(|e| usage(format!("config field `seed`: {e}")))?
                }
                "threads" => {
                    common.threads = serde_json::from_value(value)
                        .map_err(|e| usage(format!("config field `threads`: {e}")))?
                }
                _ if merged.contains_key(&key) => {
                    merged.insert(key, value);
                }
                _ => return Err(usage(format!("unknown config field `{key}` for `{command}`"))),
            }
        }
    }
    let args: T = serde_json::from_value(Value::Object(merged.clone()))
        .map_err(|e| usage(format!("config for `{command}`: {e}")))?;
    merged.insert("seed".into(), common.seed.into());
    merged.insert("threads".into(), common.threads.into());
    Ok((args, Value::Object(merged)))
}
