//! Suite and case records shared by the verification drivers.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Measured and recorded, no pass criterion attached.
    Report,
    /// Search-type case that exhausted its budget without a verdict.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseRecord {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Complex values as [re, im].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    /// What the case is checked against (closed form, cross-method, frozen
    /// rational, search certificate).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CaseRecord {
    pub fn new(name: &str, status: Status) -> Self {
        CaseRecord {
            name: String::from(name),
            status,
            residual: None,
            tolerance: None,
            value: None,
            expected: None,
            error_estimate: None,
            oracle: None,
            note: None,
        }
    }

    /// Pass/fail on a residual against a tolerance.
    pub fn residual_case(name: &str, residual: f64, tolerance: f64) -> Self {
        let status = if residual.is_finite() && residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        let mut c = CaseRecord::new(name, status);
        c.residual = Some(residual);
        c.tolerance = Some(tolerance);
        c
    }

    /// Pass/fail on |value - expected| against a tolerance.
    pub fn value_case(name: &str, value: Complex64, expected: Complex64, tolerance: f64) -> Self {
        let residual = (value - expected).norm();
        let mut c = CaseRecord::residual_case(name, residual, tolerance);
        c.value = Some([value.re, value.im]);
        c.expected = Some([expected.re, expected.im]);
        c
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(String::from(note));
        self
    }

    pub fn with_oracle(mut self, oracle: &str) -> Self {
        self.oracle = Some(String::from(oracle));
        self
    }

    pub fn with_value(mut self, value: Complex64) -> Self {
        self.value = Some([value.re, value.im]);
        self
    }

    pub fn with_expected(mut self, expected: Complex64) -> Self {
        self.expected = Some([expected.re, expected.im]);
        self
    }

    pub fn with_error(mut self, err: f64) -> Self {
        self.error_estimate = Some(err);
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub seed: u64,
    pub cases: Vec<CaseRecord>,
}

impl Suite {
    pub fn new(name: &str, seed: u64) -> Self {
        Suite {
            name: String::from(name),
            seed,
            cases: Vec::new(),
        }
    }

    pub fn push(&mut self, case: CaseRecord) {
        self.cases.push(case);
    }

    /// Sort cases by name; call once after the last push.
    pub fn finalize(mut self) -> Self {
        self.cases.sort_by(|a, b| a.name.cmp(&b.name));
        self
    }

    pub fn failures(&self) -> usize {
        self.cases
            .iter()
            .filter(|c| c.status == Status::Fail)
            .count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}
