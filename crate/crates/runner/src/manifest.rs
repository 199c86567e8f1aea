//! Per-run manifest, written once as `manifest.json` after all outputs.

use std::path::Path;

use anyhow::Context;
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::output::{sha256_hex, write_atomic};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub protocol: String,
    pub n: usize,
    pub delta: f64,
    pub init: String,
    pub status: String,
    /// Loaded from a checkpoint rather than computed in this run.
    pub resumed: bool,
    pub residual: Option<f64>,
    pub norm_drift: Option<f64>,
    pub energy_drift: Option<f64>,
    pub matvecs: Option<usize>,
    pub seconds: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub started: String,
    pub finished: String,
    pub config: serde_json::Value,
    pub fingerprint: String,
    pub cells: Vec<ManifestCell>,
    pub outputs: Vec<OutputDigest>,
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, config: serde_json::Value, fingerprint: String) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            started: timestamp(),
            finished: String::new(),
            config,
            fingerprint,
            cells: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Writes `bytes` to `dir/name` and records its digest.
    pub fn emit(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        write_atomic(&dir.join(name), bytes)?;
        self.outputs.push(OutputDigest {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Stamps the end time and writes the manifest into `dir`.
    pub fn finish(mut self, dir: &Path) -> anyhow::Result<Self> {
        self.finished = timestamp();
        let text = serde_json::to_string_pretty(&self)?;
        write_atomic(&dir.join(MANIFEST_FILE), format!("{text}\n").as_bytes())?;
        Ok(self)
    }

    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Names of outputs whose content no longer matches the recorded digest.
    pub fn stale_outputs(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|o| std::fs::read(dir.join(&o.file)).map(|b| sha256_hex(&b) != o.sha256).unwrap_or(true))
            .map(|o| o.file.clone())
            .collect()
    }
}
