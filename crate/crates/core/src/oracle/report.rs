use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

/// One inequality family checked over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Smallest `rhs − lhs` seen (negative means violated).
    pub worst_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Recorded for reference; does not affect the report verdict.
    pub informational: bool,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, worst_margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            worst_margin,
            tolerance,
            passed: worst_margin >= -tolerance,
            informational: false,
            note: None,
        }
    }

    /// A check whose verdict is decided by the caller rather than the margin.
    pub fn verdict(name: impl Into<String>, worst_margin: f64, passed: bool) -> Self {
        Self { passed, ..Self::new(name, worst_margin, 0.0) }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    /// Adds a note, appending to any existing one.
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        self.note = Some(match self.note.take() {
            Some(prev) => format!("{prev}; {note}"),
            None => note,
        });
        self
    }
}

/// Outcome of a verification routine.
///
/// Runtime is kept out of the serialized form so that JSON reports are
/// byte-identical across reruns; it is shown by [`VerificationReport::text`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub worst_margin: f64,
    pub passed: bool,
    #[serde(skip)]
    pub runtime: Duration,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            worst_margin: f64::INFINITY,
            passed: true,
            runtime: Duration::ZERO,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }

    pub fn push(&mut self, check: Check) {
        if !check.informational {
            self.worst_margin = self.worst_margin.min(check.worst_margin);
            self.passed &= check.passed;
        }
        self.checks.push(check);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn text(&self) -> String {
        let mut s = format!(
            "[{}] {}  worst margin {:.3e}  ({:.3} s)\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst_margin,
            self.runtime.as_secs_f64()
        );
        for c in &self.checks {
            let tag = match (c.informational, c.passed) {
                (true, _) => "info",
                (false, true) => "ok",
                (false, false) => "FAIL",
            };
            let _ = write!(s, "  {tag:<4} {:<40} margin {:+.3e}", c.name, c.worst_margin);
            if let Some(n) = &c.note {
                let _ = write!(s, "  ({n})");
            }
            s.push('\n');
        }
        s
    }
}

/// Runs `f` and stores its wall-clock time in the report.
pub(crate) fn timed(f: impl FnOnce() -> VerificationReport) -> VerificationReport {
    let start = std::time::Instant::now();
    let mut r = f();
    r.runtime = start.elapsed();
    r
}
