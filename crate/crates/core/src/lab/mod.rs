//! Empirical verifiers for the hardness constructions. Every verifier
//! returns a structured [`Report`] whose checks name the oracle behind each
//! side of the comparison.

mod gap;
mod verify;

pub use gap::{check_gap_inequalities, gap_expression, GapEvaluation, GAP_GRID_POINTS};
pub use verify::{
    lipschitz_experiment, verify_buckingham, verify_clique_encoding, verify_determinant_min,
    verify_pairwise_equivalence, verify_supermodular_dichotomy, verify_twosat_dichotomy,
};

use crate::io::Real;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: Real,
    pub rhs: Real,
    pub tol: Real,
    pub pass: bool,
    pub lhs_oracle: String,
    pub rhs_oracle: String,
}

impl Check {
    /// `|lhs - rhs| <= tol`.
    pub fn eq(name: &str, lhs: f64, lhs_oracle: &str, rhs: f64, rhs_oracle: &str, tol: f64) -> Self {
        let pass = lhs == rhs || (lhs - rhs).abs() <= tol;
        Self::build(name, lhs, lhs_oracle, rhs, rhs_oracle, tol, pass)
    }

    /// `lhs <= rhs + tol`.
    pub fn le(name: &str, lhs: f64, lhs_oracle: &str, rhs: f64, rhs_oracle: &str, tol: f64) -> Self {
        let pass = lhs <= rhs + tol;
        Self::build(name, lhs, lhs_oracle, rhs, rhs_oracle, tol, pass)
    }

    /// A boolean claim, recorded as `1 == 1`.
    pub fn holds(name: &str, value: bool, oracle: &str) -> Self {
        Self::build(name, f64::from(u8::from(value)), oracle, 1.0, "expected", 0.0, value)
    }

    fn build(name: &str, lhs: f64, lo: &str, rhs: f64, ro: &str, tol: f64, pass: bool) -> Self {
        Check {
            name: name.into(),
            lhs: Real(lhs),
            rhs: Real(rhs),
            tol: Real(tol),
            pass,
            lhs_oracle: lo.into(),
            rhs_oracle: ro.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub construction: String,
    pub instance_digest: String,
    pub checks: Vec<Check>,
    pub seed: Option<u64>,
    /// Headline quantities (optimum, flags, measured ratios).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, serde_json::Value>,
    /// Report-only inequality evaluations; they do not affect `passed`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub evaluations: Vec<GapEvaluation>,
}

impl Report {
    pub fn new(construction: &str, instance_digest: String, seed: Option<u64>) -> Self {
        Report {
            construction: construction.into(),
            instance_digest,
            checks: Vec::new(),
            seed,
            values: BTreeMap::new(),
            evaluations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn value(&mut self, key: &str, v: impl Into<serde_json::Value>) {
        self.values.insert(key.into(), v.into());
    }

    pub fn real(&mut self, key: &str, v: f64) {
        self.value(key, Real::format(v));
    }
}
