//! Machine-readable report record emitted by every command.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub tool_version: String,
    pub command: String,
    pub model_digest: String,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub outputs: Value,
}

impl ReportRecord {
    pub fn new(
        command: &str,
        digest: &str,
        seed: Option<u64>,
        inputs: Value,
        outputs: Value,
    ) -> ReportRecord {
        ReportRecord {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            model_digest: digest.to_string(),
            seed,
            inputs,
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}
