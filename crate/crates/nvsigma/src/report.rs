//! Named verification checks: measured values against pinned tolerances,
//! serialized as {check_name: {value, tolerance, pass}}.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// One measured check.  `value` is what was measured, `tolerance` the pinned
/// bound it was held against; how the two were compared is frozen into
/// `pass` at construction time.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CheckResult {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Residual-style check: passes when the value stays at or below the
    /// tolerance.  Non-finite values never pass.
    pub fn below(value: f64, tolerance: f64) -> Self {
        Self {
            value,
            tolerance,
            pass: value.is_finite() && value <= tolerance,
        }
    }

    /// Target-style check: passes when the value lands within tolerance of
    /// the target.  The report records the measured value, not the
    /// deviation.
    pub fn near(value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            value,
            tolerance,
            pass: value.is_finite() && (value - target).abs() <= tolerance,
        }
    }
}

/// Ordered collection of named checks.  Names sort alphabetically, so the
/// JSON output and the terminal listing are deterministic.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(transparent)]
pub struct Report {
    checks: BTreeMap<String, CheckResult>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a named check; a repeated name is a caller bug, not data.
    pub fn add(&mut self, name: impl Into<String>, check: CheckResult) {
        let name = name.into();
        let prev = self.checks.insert(name.clone(), check);
        assert!(prev.is_none(), "duplicate check name {name}");
    }

    pub fn get(&self, name: &str) -> Option<CheckResult> {
        self.checks.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report maps always serialize")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(Error::from)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, c) in &self.checks {
            writeln!(
                f,
                "{} {:<44} value={:<13.6e} tol={:.1e}",
                if c.pass { "PASS" } else { "FAIL" },
                name,
                c.value,
                c.tolerance
            )?;
        }
        Ok(())
    }
}
