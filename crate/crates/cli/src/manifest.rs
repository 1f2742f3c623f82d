//! Provenance record written next to every output.

use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// `sha256:<hex>` of the canonical JSON encoding of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    /// RFC 3339, UTC. Taken from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: String,
    /// Effective options of the run, including digests of input files.
    pub config: Value,
    /// Input paths by role. Not hashed, so moving a file keeps the digest.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, seed: u64) -> CliResult<Self> {
        Ok(Self {
            command: command.to_string(),
            config_hash: config_hash(&config),
            seed,
            tool_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            timestamp: timestamp()?,
            config,
            inputs: BTreeMap::new(),
        })
    }

    pub fn with_input(mut self, role: &str, path: &std::path::Path) -> Self {
        self.inputs.insert(role.to_string(), path.display().to_string());
        self
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Objects serialise with sorted keys and floats in shortest round-trip
/// form, so the digest depends only on the values.
pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON values serialise");
    format!("sha256:{}", sha256_hex(&bytes))
}

fn timestamp() -> CliResult<String> {
    let now = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(raw) => {
            let secs: i64 = raw
                .trim()
                .parse()
                .map_err(|_| CliError::input(format!("SOURCE_DATE_EPOCH `{raw}` is not an integer")))?;
            DateTime::<Utc>::from_timestamp(secs, 0)
                .ok_or_else(|| CliError::input(format!("SOURCE_DATE_EPOCH {secs} is out of range")))?
        }
        Err(_) => Utc::now(),
    };
    Ok(now.to_rfc3339_opts(SecondsFormat::Secs, true))
}
