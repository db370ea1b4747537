//! Structured run reports.
//!
//! Every command emits one JSON report echoing its full configuration,
//! seeds, and table digests, so any run can be reconstructed. A failing
//! check makes the whole run fail.

use std::io;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableDigests {
    pub acs: String,
    pub min_select: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_digests: Option<TableDigests>,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
    pub status: String,
}

impl Report {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Report {
            command: command.to_string(),
            config,
            table_digests: None,
            results: serde_json::Value::Null,
            checks: Vec::new(),
            status: "pass".to_string(),
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), pass, detail: detail.into() });
        if !pass {
            self.status = "fail".to_string();
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    /// One machine-parsable line per failed check, for stderr.
    pub fn failure_records(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                serde_json::json!({
                    "failure": c.name,
                    "command": self.command,
                    "detail": c.detail,
                })
                .to_string()
            })
            .collect()
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
