//! Machine-readable check reports: `{check, params, seed, result, table?}`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    /// Observed quantity the property is judged on.
    pub value: f64,
    /// Threshold the value was compared against.
    pub threshold: f64,
}

impl PropertyResult {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        PropertyResult { name: name.into(), passed: value <= threshold, value, threshold }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        PropertyResult { name: name.into(), passed: value >= threshold, value, threshold }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        PropertyResult { name: name.into(), passed, value: if passed { 1.0 } else { 0.0 }, threshold: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub result: CheckResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<serde_json::Value>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, params: serde_json::Value, seed: u64, properties: Vec<PropertyResult>) -> Self {
        let passed = properties.iter().all(|p| p.passed);
        CheckReport { check: check.into(), params, seed, result: CheckResult { passed, properties }, table: None }
    }

    pub fn with_table(mut self, table: serde_json::Value) -> Self {
        self.table = Some(table);
        self
    }

    pub fn passed(&self) -> bool {
        self.result.passed
    }
}
