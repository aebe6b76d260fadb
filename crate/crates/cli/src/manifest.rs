//! Run manifests: what was run, with which parameters, producing which files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::formats::ArtifactRef;

pub const MANIFEST_SCHEMA: &str = "ramsey-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub config_snapshot: RunConfig,
    pub code_version: String,
    /// RFC 3339, UTC. The only field that differs between reruns.
    pub timestamp: String,
    pub parameter_hash: String,
    /// Paths relative to the manifest's directory.
    pub outputs: Vec<String>,
    /// Files read by the command, as given on the command line.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
}

pub fn code_version() -> String {
    concat!("ramsey-cli ", env!("CARGO_PKG_VERSION")).to_string()
}

/// SHA-256 of the canonical JSON form of the resolved configuration.
pub fn parameter_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("configuration always serialises");
    let digest = Sha256::digest(&canonical);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema: MANIFEST_SCHEMA.to_string(),
            command: command.to_string(),
            config_snapshot: config.clone(),
            code_version: code_version(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            parameter_hash: parameter_hash(config),
            outputs: Vec::new(),
            inputs: Vec::new(),
        }
    }

    /// Provenance for an artifact written `depth` directories below the
    /// manifest.
    pub fn artifact_ref(&self, depth: usize) -> ArtifactRef {
        ArtifactRef {
            manifest: format!("{}{MANIFEST_FILE}", "../".repeat(depth)),
            parameter_hash: self.parameter_hash.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")
    }
}
