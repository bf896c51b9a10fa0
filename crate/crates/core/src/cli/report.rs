use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

/// How a check's value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// Passes iff `value <= tolerance`.
    Le,
    /// Passes iff `value >= tolerance`; used by falsification checks.
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Everything needed to rerun the check.
    pub inputs: Map<String, Value>,
    pub value: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn measured(
        name: &str,
        inputs: Map<String, Value>,
        value: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        let pass = match comparison {
            Comparison::Le => value <= tolerance,
            Comparison::Ge => value >= tolerance,
        };
        Self {
            name: name.to_string(),
            inputs,
            value: value.is_finite().then_some(value),
            tolerance,
            comparison,
            pass,
            error: None,
        }
    }

    pub fn failed(name: &str, inputs: Map<String, Value>, tolerance: f64, error: String) -> Self {
        Self {
            name: name.to_string(),
            inputs,
            value: None,
            tolerance,
            comparison: Comparison::Le,
            pass: false,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn new(name: &str, checks: Vec<Check>) -> Self {
        Self {
            name: name.to_string(),
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

/// Wall-clock milliseconds; the only nondeterministic part of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Timings {
    pub total_ms: f64,
    pub suites: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub config: Value,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
    pub timings: Timings,
}

impl Report {
    pub fn new(suite: &str, config: Value, suites: Vec<SuiteReport>, timings: Timings) -> Self {
        Self {
            schema: 1,
            suite: suite.to_string(),
            config,
            pass: suites.iter().all(|s| s.pass),
            suites,
            timings,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per check.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "suite",
            "check",
            "value",
            "tolerance",
            "comparison",
            "pass",
            "error",
            "inputs",
        ])
        .expect("in-memory write");
        for suite in &self.suites {
            for c in &suite.checks {
                w.write_record([
                    suite.name.as_str(),
                    c.name.as_str(),
                    &c.value.map(|v| format!("{v:e}")).unwrap_or_default(),
                    &format!("{:e}", c.tolerance),
                    match c.comparison {
                        Comparison::Le => "le",
                        Comparison::Ge => "ge",
                    },
                    if c.pass { "true" } else { "false" },
                    c.error.as_deref().unwrap_or(""),
                    &Value::Object(c.inputs.clone()).to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("csv is utf-8")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for suite in &self.suites {
            out.push_str(&format!(
                "[{}] {}\n",
                if suite.pass { "PASS" } else { "FAIL" },
                suite.name
            ));
            for c in &suite.checks {
                let value = c
                    .value
                    .map(|v| format!("{v:.3e}"))
                    .unwrap_or_else(|| "-".into());
                let op = match c.comparison {
                    Comparison::Le => "<=",
                    Comparison::Ge => ">=",
                };
                out.push_str(&format!(
                    "  {} {:<28} {value} {op} {:.1e}",
                    if c.pass { "ok  " } else { "FAIL" },
                    c.name,
                    c.tolerance
                ));
                if let Some(e) = &c.error {
                    out.push_str(&format!("  ({e})"));
                }
                out.push('\n');
            }
        }
        out.push_str(&format!(
            "overall: {} ({:.0} ms)\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.timings.total_ms
        ));
        out
    }
}

/// JSON report with the `timings` field removed, for comparing runs.
pub fn strip_timings(json: &str) -> serde_json::Result<Value> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Some(o) = v.as_object_mut() {
        o.remove("timings");
    }
    Ok(v)
}
