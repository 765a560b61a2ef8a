use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents and load parameter of the system
///
/// ```text
/// -u'' = lambda * (v+)^r + (v+)^p
/// -v'' = |u|^(q-1) u
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl ProblemParams {
    pub fn new(lambda: f64, p: f64, q: f64, r: f64) -> Result<Self> {
        let params = ProblemParams { lambda, p, q, r };
        params.validate()?;
        Ok(params)
    }

    /// The exponent triple used throughout the numerical experiments:
    /// p = 3, q = 1.5, r = 1/3.
    pub fn reference(lambda: f64) -> Self {
        ProblemParams {
            lambda,
            p: 3.0,
            q: 1.5,
            r: 1.0 / 3.0,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        ProblemParams { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("lambda", self.lambda), ("p", self.p), ("q", self.q), ("r", self.r)] {
            if !value.is_finite() {
                return Err(Error::domain(format!("{name} must be finite, got {value}")));
            }
        }
        if self.lambda < 0.0 {
            return Err(Error::domain(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.q <= 0.0 {
            return Err(Error::domain(format!("q must be > 0, got {}", self.q)));
        }
        Ok(())
    }

    /// Checks the exponent hypotheses under which the two-solution theory
    /// holds: 0 < r < 1/q and p > max{1, 1/q}.
    pub fn check_regime(&self) -> Result<()> {
        self.validate()?;
        regime(self.p, self.q, self.r)
    }
}

pub(crate) fn regime(p: f64, q: f64, r: f64) -> Result<()> {
    if !(p.is_finite() && q.is_finite() && r.is_finite()) || q <= 0.0 {
        return Err(Error::domain(format!(
            "exponents must be finite with q > 0 (p = {p}, q = {q}, r = {r})"
        )));
    }
    if !(r > 0.0 && q * r < 1.0) {
        return Err(Error::domain(format!("need 0 < r < 1/q, got r = {r}, q = {q}")));
    }
    if !(p > 1.0 && p * q > 1.0) {
        return Err(Error::domain(format!("need p > max(1, 1/q), got p = {p}, q = {q}")));
    }
    Ok(())
}
