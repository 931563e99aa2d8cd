//! Verification results and the JSON-lines report format.

use serde::Serialize;
use serde_json::Value;

use crate::linalg::Residual;

/// One identity instance evaluated at fixed parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub identity: String,
    pub anchor: String,
    pub residual: Residual,
    pub tol: f64,
    /// A threshold that tolerance overrides leave alone.
    #[serde(skip)]
    pub pinned: bool,
}

impl Check {
    pub fn new(identity: impl Into<String>, anchor: impl Into<String>, residual: Residual, tol: f64) -> Self {
        Check {
            identity: identity.into(),
            anchor: anchor.into(),
            residual,
            tol,
            pinned: false,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual.relative.is_finite() && self.residual.relative <= self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn pinned(mut self) -> Self {
        self.pinned = true;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, identity: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.identity == identity)
    }

    /// Largest relative residual over all checks.
    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .max_by(|a, b| a.residual.relative.total_cmp(&b.residual.relative))
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }
}

impl From<Vec<Check>> for VerificationReport {
    fn from(checks: Vec<Check>) -> Self {
        VerificationReport { checks }
    }
}

impl IntoIterator for VerificationReport {
    type Item = Check;
    type IntoIter = std::vec::IntoIter<Check>;

    fn into_iter(self) -> Self::IntoIter {
        self.checks.into_iter()
    }
}

/// One line of the JSON-lines report.
#[derive(Clone, Debug, Serialize)]
pub struct ReportLine {
    pub identity: String,
    pub anchor: String,
    pub params: Value,
    pub residual: Residual,
    pub tol: f64,
    pub pass: bool,
    pub ms: Option<f64>,
}

impl ReportLine {
    pub fn from_check(check: &Check, params: Value, ms: Option<f64>) -> Self {
        ReportLine {
            identity: check.identity.clone(),
            anchor: check.anchor.clone(),
            params,
            residual: check.residual,
            tol: check.tol,
            pass: check.passed(),
            ms,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report lines are always serializable")
    }
}
