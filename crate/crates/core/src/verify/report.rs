use std::collections::BTreeMap;

use serde::Serialize;

use crate::params::CalibrationParams;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionResult {
    pub pass: bool,
    /// Worst value of the checked quantity (a margin or a residual, see `kind`).
    pub margin: f64,
    pub kind: MarginKind,
    pub tolerance: f64,
    /// Coordinates of the worst sample.
    pub witness: Vec<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginKind {
    /// Pass iff `margin >= -tolerance`.
    LowerBound,
    /// Pass iff `margin <= tolerance`.
    Residual,
}

impl ConditionResult {
    pub fn residual(value: f64, tolerance: f64, witness: Vec<f64>, samples: usize) -> Self {
        Self {
            pass: value <= tolerance,
            margin: value,
            kind: MarginKind::Residual,
            tolerance,
            witness,
            samples,
            details: BTreeMap::new(),
        }
    }

    pub fn lower_bound(value: f64, tolerance: f64, witness: Vec<f64>, samples: usize) -> Self {
        Self {
            pass: value >= -tolerance,
            margin: value,
            kind: MarginKind::LowerBound,
            tolerance,
            witness,
            samples,
            details: BTreeMap::new(),
        }
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

/// Comparison of a computed quantity with its closed form.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    /// Relative tolerance when `relative`, absolute otherwise.
    pub tolerance: f64,
    pub relative: bool,
    pub pass: bool,
}

impl OracleResult {
    pub fn relative(name: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Self {
        let pass = (computed - expected).abs() <= tol * expected.abs();
        Self { name: name.into(), computed, expected, tolerance: tol, relative: true, pass }
    }

    pub fn absolute(name: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Self {
        let pass = (computed - expected).abs() <= tol;
        Self { name: name.into(), computed, expected, tolerance: tol, relative: false, pass }
    }

    /// Sign check: passes iff `computed` has the sign of `expected`.
    pub fn sign(name: impl Into<String>, computed: f64, expected: f64) -> Self {
        let pass = computed.signum() == expected.signum() && computed != 0.0;
        Self { name: name.into(), computed, expected, tolerance: 0.0, relative: false, pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub params: CalibrationParams,
    pub u_radius: f64,
    pub conditions: BTreeMap<String, ConditionResult>,
    pub oracles: Vec<OracleResult>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl VerificationReport {
    pub fn new(params: &CalibrationParams) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            params: *params,
            u_radius: params.u_radius,
            conditions: BTreeMap::new(),
            oracles: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.conditions.values().all(|c| c.pass) && self.oracles.iter().all(|o| o.pass)
    }
}
