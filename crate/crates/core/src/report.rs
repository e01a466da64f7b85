//! Structured verdicts produced by sequence- and subgroup-level checkers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// A notable data point supporting a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<Vec<i32>>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Witness {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            word: None,
            value,
            detail: String::new(),
        }
    }

    pub fn with_word(mut self, word: Vec<i32>) -> Self {
        self.word = Some(word);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Margin-carrying verdict of a checker. Every threshold that influenced the
/// verdict is recorded next to the fitted constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub verdict: Verdict,
    /// Sub-verdicts, e.g. `undistorted` and `uniformly_regular` for URU.
    #[serde(default)]
    pub checks: BTreeMap<String, Verdict>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
    #[serde(default)]
    pub series: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub witnesses: Vec<Witness>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PropertyReport {
    pub fn new(property: impl Into<String>) -> Self {
        Self {
            property: property.into(),
            verdict: Verdict::Inconclusive,
            checks: BTreeMap::new(),
            constants: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            series: BTreeMap::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
            seed: None,
        }
    }

    pub fn check(&mut self, name: &str, ok: bool) -> &mut Self {
        self.checks.insert(name.to_string(), Verdict::from_bool(ok));
        self
    }

    pub fn constant(&mut self, name: &str, value: f64) -> &mut Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn threshold(&mut self, name: &str, value: f64) -> &mut Self {
        self.thresholds.insert(name.to_string(), value);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Sets the overall verdict to the conjunction of the recorded checks.
    pub fn conclude(&mut self) -> &mut Self {
        self.verdict = if self.checks.is_empty() {
            Verdict::Inconclusive
        } else if self.checks.values().all(|v| v.passed()) {
            Verdict::Pass
        } else if self.checks.values().any(|v| *v == Verdict::Fail) {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn check_passed(&self, name: &str) -> bool {
        self.checks.get(name).is_some_and(|v| v.passed())
    }
}
