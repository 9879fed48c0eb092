//! Structured result records.
//!
//! Every long-running operation returns a [`Report`]: task id, an echo of
//! the parameters, verdicts and witnesses, counts, and elapsed time. Reports
//! serialize to JSON; rationals appear as `"p/q"` strings so a report can be
//! replayed bit-exactly. Serialization is deterministic up to `elapsed_ms`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

/// Result record shared by all subcommands and verifiers.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub task: String,
    pub params: Value,
    /// Human-readable verdict strings, e.g. `"found"` / `"none found within budget"`.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub verdicts: Vec<Value>,
    /// Failure/violation records; an empty list means every assertion held.
    pub failures: Vec<Value>,
    /// Witnesses and certificates that replay through their owning module.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub counts: BTreeMap<String, u64>,
    pub elapsed_ms: u128,
    pub artifact_version: String,
}

impl Report {
    pub fn new(task: impl Into<String>) -> Self {
        Report {
            task: task.into(),
            params: Value::Null,
            verdicts: Vec::new(),
            failures: Vec::new(),
            witnesses: Vec::new(),
            counts: BTreeMap::new(),
            elapsed_ms: 0,
            artifact_version: crate::ARTIFACT_VERSION.to_string(),
        }
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_failures(mut self, failures: Vec<Value>) -> Self {
        self.failures = failures;
        self
    }

    pub fn with_verdict(mut self, verdict: Value) -> Self {
        self.verdicts.push(verdict);
        self
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witnesses.push(witness);
        self
    }

    pub fn with_count(mut self, key: impl Into<String>, value: u64) -> Self {
        self.counts.insert(key.into(), value);
        self
    }

    /// Stamps the elapsed time measured from `start`.
    pub fn finish(mut self, start: Instant) -> Self {
        self.elapsed_ms = start.elapsed().as_millis();
        self
    }

    /// True when no failure was recorded.
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Pretty JSON with a trailing newline, ready to write to disk.
    pub fn to_pretty_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn report_shape() {
        let r = Report::new("demo")
            .with_params(json!({"n": 3}))
            .with_count("trials", 10)
            .finish(Instant::now());
        assert!(r.ok());
        let v = r.to_json();
        assert_eq!(v["task"], "demo");
        assert_eq!(v["params"]["n"], 3);
        assert_eq!(v["counts"]["trials"], 10);
        assert!(v.get("verdicts").is_none());
    }

    #[test]
    fn failures_flip_ok() {
        let r = Report::new("demo").with_failures(vec![json!({"trial": 1})]);
        assert!(!r.ok());
    }
}
