//! Structured experiment reports.

use serde::Serialize;
use serde_json::{Map, Value};

/// One asserted inequality with both sides embedded as numbers.
#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Criterion {
    /// `lhs ≤ rhs` (the tolerance is already folded into `rhs`).
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Criterion {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs <= rhs,
        }
    }

    /// Boolean criterion, rendered as `1 ≤ 1` / `0 ≤ 1` so both sides stay
    /// numeric.
    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Criterion {
            name: name.into(),
            lhs: if pass { 1.0 } else { 0.0 },
            rhs: 1.0,
            pass,
        }
    }
}

/// Report emitted by every experiment: the configuration echo, measured
/// quantities, pass/fail criteria, and the wall-clock duration. Every
/// field except `duration_ms` is a pure function of the configuration and
/// seed.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: Value,
    pub measurements: Map<String, Value>,
    pub criteria: Vec<Criterion>,
    pub duration_ms: u64,
}

impl ExperimentReport {
    pub fn new(config: Value) -> Self {
        ExperimentReport {
            config,
            measurements: Map::new(),
            criteria: Vec::new(),
            duration_ms: 0,
        }
    }

    pub fn record(&mut self, key: &str, value: impl Into<Value>) {
        self.measurements.insert(key.to_string(), value.into());
    }

    pub fn record_f64(&mut self, key: &str, value: f64) {
        let v = if value.is_finite() {
            Value::from(value)
        } else {
            Value::String(value.to_string())
        };
        self.measurements.insert(key.to_string(), v);
    }

    pub fn push(&mut self, criterion: Criterion) {
        self.criteria.push(criterion);
    }

    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the duration zeroed: the deterministic image of the
    /// report, byte-identical across runs with the same config and seed.
    pub fn deterministic_json(&self) -> String {
        let mut clone = self.clone();
        clone.duration_ms = 0;
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }

    /// Flat CSV rendering of the criteria table.
    pub fn criteria_csv(&self) -> String {
        let mut out = String::from("name,lhs,rhs,pass\n");
        for c in &self.criteria {
            out.push_str(&format!("{},{},{},{}\n", c.name, c.lhs, c.rhs, c.pass));
        }
        out
    }

    /// One human-readable line per criterion.
    pub fn summary_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            out.push_str(&format!(
                "[{}] {}: {} <= {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.lhs,
                c.rhs
            ));
        }
        out
    }
}
