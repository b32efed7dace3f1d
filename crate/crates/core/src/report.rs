//! Machine-readable outcome of a verification suite.

use serde::{Deserialize, Serialize};

/// One named check inside a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    /// Residual or measured quantity, when the check is numeric.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn exact(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            pass,
            value: None,
            threshold: None,
            detail: Some(detail.into()),
        }
    }

    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            pass: value <= threshold,
            value: Some(value),
            threshold: Some(threshold),
            detail: None,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            pass: value >= threshold,
            value: Some(value),
            threshold: Some(threshold),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Inputs needed to replay a failed trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub seed: u64,
    pub message: String,
    /// Configuration JSON, when the trial had one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub configuration: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub genus: usize,
    pub group: String,
    pub seed: u64,
    pub trials: usize,
    pub h: Option<f64>,
    pub max_residual: Option<f64>,
    pub calibrated_mu: Option<f64>,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub failures: Vec<FailureRecord>,
}

impl VerificationReport {
    pub fn new(suite: &str, genus: usize, group: &str, seed: u64, trials: usize) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            genus,
            group: group.to_string(),
            seed,
            trials,
            h: None,
            max_residual: None,
            calibrated_mu: None,
            pass: false,
            checks: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    /// Sets `pass` from the checks. Failure records are replay data; a
    /// suite that tolerates some failed trials says so in its checks.
    pub fn finish(mut self) -> Self {
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}
