//! Closed-form lambda thresholds below which two nonnegative solutions are
//! guaranteed.
//!
//! With h(t) = q/(q+1) t^(1/q - r) - t^(p - r) / (2^(p+1) (p+1)), the energy is
//! bounded below on the sphere of radius T = argmax h by a positive constant
//! whenever lambda < lambda0 = 2^(r+1) (r+1) h(T). Bounding the L^(r+1) term
//! through the embedding constant K_emb instead gives
//! lambda0' = (r+1) / K_emb^(r+1) * h(T).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gamma::gamma_fn;
use crate::error::{Error, Result};
use crate::ode::regime;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "hT")]
    pub h_t: f64,
    pub lambda0_basic: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    #[serde(rename = "K_emb")]
    pub k_emb: f64,
    pub lambda0_improved: f64,
}

/// h(t) for t >= 0.
pub fn h_profile(t: f64, p: f64, q: f64, r: f64) -> f64 {
    q / (q + 1.0) * t.powf(1.0 / q - r) - t.powf(p - r) / (2f64.powf(p + 1.0) * (p + 1.0))
}

/// The positive critical point of h, its global maximum.
pub fn threshold_t(p: f64, q: f64, r: f64) -> Result<f64> {
    regime(p, q, r)?;
    let base = 2f64.powf(p + 1.0) * (1.0 - q * r) * (p + 1.0) / ((q + 1.0) * (p - r));
    Ok(base.powf(q / (p * q - 1.0)))
}

pub fn lambda0_basic(p: f64, q: f64, r: f64) -> Result<f64> {
    let t = threshold_t(p, q, r)?;
    Ok(2f64.powf(r + 1.0) * (r + 1.0) * h_profile(t, p, q, r))
}

/// gamma = (q+1)/q and its conjugate exponent gamma' = gamma/(gamma-1).
pub fn conjugate_exponents(q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::domain(format!("q must be positive and finite, got {q}")));
    }
    let gamma = (q + 1.0) / q;
    // gamma / (gamma - 1) simplifies to q + 1
    Ok((gamma, q + 1.0))
}

/// Upper bound on the embedding constant of X into L^((q+1)/q).
pub fn k_emb(q: f64) -> Result<f64> {
    let (g, gp) = conjugate_exponents(q)?;
    let term = |e: f64| -> Result<f64> {
        let ratio = PI.sqrt() * gamma_fn(e)? / gamma_fn(e + 0.5)?;
        Ok((ratio - 1.0 / e).powf(1.0 / e))
    };
    Ok(0.25 / 2.0 * term(g)?.min(term(gp)?))
}

pub fn lambda0_improved(p: f64, q: f64, r: f64) -> Result<f64> {
    let t = threshold_t(p, q, r)?;
    let k = k_emb(q)?;
    Ok((r + 1.0) / k.powf(r + 1.0) * h_profile(t, p, q, r))
}

pub fn thresholds(p: f64, q: f64, r: f64) -> Result<ThresholdReport> {
    let t = threshold_t(p, q, r)?;
    let h_t = h_profile(t, p, q, r);
    let (gamma, gamma_prime) = conjugate_exponents(q)?;
    let k = k_emb(q)?;
    Ok(ThresholdReport {
        t,
        h_t,
        lambda0_basic: 2f64.powf(r + 1.0) * (r + 1.0) * h_t,
        gamma,
        gamma_prime,
        k_emb: k,
        lambda0_improved: (r + 1.0) / k.powf(r + 1.0) * h_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: f64 = 3.0;
    const Q: f64 = 1.5;
    const R: f64 = 1.0 / 3.0;

    #[test]
    fn reference_values() {
        let rep = thresholds(P, Q, R).unwrap();
        assert!((rep.t - 1.9588).abs() < 1e-3, "{rep:?}");
        assert!(rep.h_t > 0.0);
        assert!((rep.lambda0_basic - 2.21).abs() < 0.01, "{rep:?}");
        assert!((rep.lambda0_improved - 16.02).abs() < 0.05, "{rep:?}");
        assert!((rep.k_emb - 0.1131).abs() < 1e-4, "{rep:?}");
        assert!(rep.lambda0_improved >= rep.lambda0_basic);
        assert_eq!(rep.lambda0_basic, lambda0_basic(P, Q, R).unwrap());
        assert_eq!(rep.lambda0_improved, lambda0_improved(P, Q, R).unwrap());
    }

    #[test]
    fn critical_point_of_h() {
        let t = threshold_t(P, Q, R).unwrap();
        let d = 1e-5;
        let slope = (h_profile(t + d, P, Q, R) - h_profile(t - d, P, Q, R)) / (2.0 * d);
        assert!(slope.abs() < 1e-9, "h'(T) = {slope}");
    }

    #[test]
    fn conjugate_exponents_sum() {
        for q in [0.3, 1.0, 1.5, 4.0] {
            let (g, gp) = conjugate_exponents(q).unwrap();
            assert!((1.0 / g + 1.0 / gp - 1.0).abs() < 1e-15);
        }
        let (g, gp) = conjugate_exponents(1.0).unwrap();
        assert_eq!((g, gp), (2.0, 2.0));
    }

    #[test]
    fn outside_regime_is_a_domain_error() {
        assert!(threshold_t(3.0, 1.5, 0.7).is_err()); // qr >= 1
        assert!(threshold_t(0.5, 1.5, 0.3).is_err()); // p <= 1
        assert!(lambda0_basic(3.0, 1.5, -0.1).is_err());
        assert!(k_emb(0.0).is_err());
    }
}
