//! Run manifests: resolved configuration, seeds and file digests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::UsageError;

pub const TOOL: &str = "dataprobe";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| anyhow::Error::new(e).context(format!("hashing {}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collects the files a command reads and writes.
#[derive(Debug, Default)]
pub struct Recorder {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    pub seeds: Vec<u64>,
    /// Manifest location chosen by the command when `--manifest` is absent.
    pub default_manifest: Option<PathBuf>,
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

impl Recorder {
    pub fn input(&mut self, path: impl Into<PathBuf>) {
        let path = path.into();
        if !self.inputs.contains(&path) {
            self.inputs.push(path);
        }
    }

    /// Registers an output; refuses paths that are also inputs.
    pub fn output(&mut self, path: impl Into<PathBuf>) -> anyhow::Result<PathBuf> {
        let path = path.into();
        if let Some(i) = self.inputs.iter().find(|i| same_file(i, &path)) {
            return Err(UsageError(format!("output {} would overwrite input {}", path.display(), i.display())).into());
        }
        self.outputs.push(path.clone());
        Ok(path)
    }

    /// Explicit default, else `<first output>.manifest.json`.
    pub fn manifest_path(&self) -> Option<PathBuf> {
        self.default_manifest.clone().or_else(|| {
            self.outputs.first().map(|p| {
                let mut s = p.as_os_str().to_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            })
        })
    }

    pub fn finish(self, command: &str, config: Value) -> anyhow::Result<RunManifest> {
        let digest = |paths: &[PathBuf]| -> anyhow::Result<Vec<FileDigest>> {
            paths
                .iter()
                .map(|p| {
                    Ok(FileDigest {
                        path: p.display().to_string(),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect()
        };
        Ok(RunManifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            seeds: self.seeds,
            inputs: digest(&self.inputs)?,
            outputs: digest(&self.outputs)?,
        })
    }
}
