use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Measured and reported, not asserted.
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub measured: BTreeMap<String, Value>,
    pub thresholds: BTreeMap<String, Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status) -> Self {
        Check {
            name: name.into(),
            status,
            measured: BTreeMap::new(),
            thresholds: BTreeMap::new(),
        }
    }

    pub fn measure(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.measured.insert(key.to_string(), v.into());
        self
    }

    pub fn threshold(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.thresholds.insert(key.to_string(), v.into());
        self
    }
}

/// A machine-readable experiment result. Contains no timing data, so reruns with the
/// same configuration serialize to identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: ExperimentConfig,
    /// Exact constants the checks compare against, as reduced fractions.
    pub constants: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Report {
            command: command.to_string(),
            config: config.clone(),
            constants: BTreeMap::new(),
            notes: Vec::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn constant(&mut self, key: &str, v: impl ToString) {
        self.constants.insert(key.to_string(), v.to_string());
    }

    pub fn push(&mut self, c: Check) {
        if c.status == Status::Fail {
            self.passed = false;
        }
        self.checks.push(c);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
