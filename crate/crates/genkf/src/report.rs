//! Machine-readable reports. Every report is a JSON object carrying
//! `schema_version`; checks record the tolerance they were held to and the
//! measured value so a reader can re-judge them.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when measured <= tolerance.
    MaxError,
    /// Passes when measured > tolerance.
    LowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The identity or property being checked.
    pub anchor: String,
    pub kind: CheckKind,
    pub tolerance: f64,
    /// `None` when the computation itself failed.
    pub measured: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    #[must_use]
    pub fn max_error(name: &str, anchor: &str, tolerance: f64, measured: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            kind: CheckKind::MaxError,
            tolerance,
            measured: measured.is_finite().then_some(measured),
            pass: measured.is_finite() && measured <= tolerance,
            note: None,
        }
    }

    #[must_use]
    pub fn lower_bound(name: &str, anchor: &str, bound: f64, measured: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            kind: CheckKind::LowerBound,
            tolerance: bound,
            measured: measured.is_finite().then_some(measured),
            pass: measured.is_finite() && measured > bound,
            note: None,
        }
    }

    /// A check whose computation returned an error: recorded as failed.
    #[must_use]
    pub fn errored(name: &str, anchor: &str, tolerance: f64, err: &crate::Error) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            kind: CheckKind::MaxError,
            tolerance,
            measured: None,
            pass: false,
            note: Some(err.to_string()),
        }
    }

    #[must_use]
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Evaluate a max-error check, turning a library error into a failed check.
pub fn check_error(name: &str, anchor: &str, tol: f64, f: impl FnOnce() -> Result<f64>) -> Check {
    match f() {
        Ok(m) => Check::max_error(name, anchor, tol, m),
        Err(e) => Check::errored(name, anchor, tol, &e),
    }
}

/// Evaluate a lower-bound check, turning a library error into a failed check.
pub fn check_above(name: &str, anchor: &str, bound: f64, f: impl FnOnce() -> Result<f64>) -> Check {
    match f() {
        Ok(m) => Check::lower_bound(name, anchor, bound, m),
        Err(e) => Check { kind: CheckKind::LowerBound, ..Check::errored(name, anchor, bound, &e) },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub checks: Vec<Check>,
    pub summary: Summary,
    /// Command-specific payload.
    #[serde(default)]
    pub data: Value,
}

impl Report {
    #[must_use]
    pub fn new(command: &str, seed: u64, config: Value, checks: Vec<Check>, data: Value) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
        Self { schema_version: SCHEMA_VERSION.into(), command: command.into(), seed, config, checks, summary, data }
    }

    #[must_use]
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    #[must_use]
    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// One line per check, for terminals.
    #[must_use]
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let measured = c.measured.map_or("error".to_string(), |m| format!("{m:.3e}"));
            let rel = match c.kind {
                CheckKind::MaxError => "<=",
                CheckKind::LowerBound => ">",
            };
            out.push_str(&format!(
                "{} {:<44} {} {} {:.1e}{}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                measured,
                rel,
                c.tolerance,
                c.note.as_ref().map_or(String::new(), |n| format!("  ({n})"))
            ));
        }
        out.push_str(&format!(
            "{}: {}/{} checks passed\n",
            self.command, self.summary.passed, self.summary.total
        ));
        out
    }
}

/// Pretty JSON with a trailing newline, the format of every report file.
#[must_use]
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}
