//! The universal record produced by every verification operation.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default relative slack used when comparing `lhs <= rhs`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Outcome of checking one inequality instance `lhs <= rhs`.
///
/// `margin` is `rhs - lhs`; `pass` holds iff `lhs <= rhs * (1 + tol)` with the
/// tolerance recorded in `params["tol"]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lemma_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub params: BTreeMap<String, f64>,
}

impl LemmaCheck {
    /// Compare `lhs <= rhs` with relative slack `tol`.
    pub fn le(lemma_id: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let pass = lhs <= rhs * (1.0 + tol) + f64::MIN_POSITIVE && lhs.is_finite() && rhs.is_finite();
        let mut params = BTreeMap::new();
        params.insert("tol".to_string(), tol);
        LemmaCheck {
            lemma_id: lemma_id.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            pass,
            params,
        }
    }

    /// Compare `|lhs - rhs| <= tol * max(1, |rhs|)` (identity check).
    pub fn eq(lemma_id: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let pass = (lhs - rhs).abs() <= tol * rhs.abs().max(1.0) && lhs.is_finite();
        let mut params = BTreeMap::new();
        params.insert("tol".to_string(), tol);
        LemmaCheck {
            lemma_id: lemma_id.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            pass,
            params,
        }
    }

    /// Compare `|lhs - rhs| <= tol` with an absolute tolerance (ledger values
    /// quoted to fixed decimals).
    pub fn eq_abs(lemma_id: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let pass = (lhs - rhs).abs() <= tol && lhs.is_finite();
        let mut params = BTreeMap::new();
        params.insert("abs_tol".to_string(), tol);
        LemmaCheck {
            lemma_id: lemma_id.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            pass,
            params,
        }
    }

    /// Record an extra named parameter.
    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Mark the check as failed regardless of the numeric comparison.
    pub fn failed(mut self) -> Self {
        self.pass = false;
        self
    }
}
