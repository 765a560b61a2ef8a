use serde::{Deserialize, Serialize};

use super::params::ProblemParams;
use crate::error::{Error, Result};

/// (u, v, w, z) with w = u' and z = v'.
pub type State = [f64; 4];

/// One point of a trajectory of the first-order system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootState {
    pub x: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub z: f64,
}

impl ShootState {
    pub fn new(x: f64, y: State) -> Self {
        ShootState {
            x,
            u: y[0],
            v: y[1],
            w: y[2],
            z: y[3],
        }
    }

    pub fn state(&self) -> State {
        [self.u, self.v, self.w, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.state().iter().all(|c| c.is_finite())
    }
}

/// A right-hand side y' = f(x, y) on the 4-dimensional shooting state.
///
/// The concave-convex system is the production implementation; tests plug
/// in manufactured systems with known roots.
pub trait FirstOrderSystem: Sync {
    fn derivative(&self, x: f64, y: &State) -> State;

    /// State components at whose zero crossings the right-hand side loses
    /// smoothness. The integrator resolves such crossings with short steps
    /// because the embedded error estimate cannot see them.
    fn kink_components(&self) -> &[usize] {
        &[]
    }
}

/// t+^e, with 0 for t <= 0.
#[inline]
pub(crate) fn pos_pow(t: f64, e: f64) -> f64 {
    if t > 0.0 {
        if e == 3.0 {
            t * t * t
        } else if e == 1.0 {
            t
        } else {
            t.powf(e)
        }
    } else {
        0.0
    }
}

/// |t|^(e-1) t
#[inline]
pub(crate) fn signed_pow(t: f64, e: f64) -> f64 {
    let a = t.abs();
    let m = if e == 1.5 {
        a * a.sqrt()
    } else if e == 1.0 {
        a
    } else {
        a.powf(e)
    };
    m.copysign(t)
}

impl FirstOrderSystem for ProblemParams {
    #[inline]
    fn derivative(&self, _x: f64, y: &State) -> State {
        let [u, v, w, z] = *y;
        [
            w,
            z,
            -self.lambda * pos_pow(v, self.r) - pos_pow(v, self.p),
            -signed_pow(u, self.q),
        ]
    }

    /// v+^r with r < 1 has an infinite derivative where v crosses zero, and
    /// |u|^(q-1) u with 1 < q < 2 an infinite second derivative where u does.
    fn kink_components(&self) -> &[usize] {
        let u_kink = self.q > 1.0 && self.q < 2.0;
        let v_kink = self.r < 1.0;
        match (u_kink, v_kink) {
            (true, true) => &[0, 1],
            (true, false) => &[0],
            (false, true) => &[1],
            (false, false) => &[],
        }
    }
}

/// Checked evaluation of the right-hand side at a single state.
pub fn rhs(state: &ShootState, params: &ProblemParams) -> Result<State> {
    if !state.is_finite() {
        return Err(Error::domain(format!("non-finite state {state:?}")));
    }
    params.validate()?;
    Ok(params.derivative(state.x, &state.state()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(u: f64, v: f64, w: f64, z: f64) -> ShootState {
        ShootState { x: 0.3, u, v, w, z }
    }

    #[test]
    fn vanishes_at_origin_of_u_v() {
        for lambda in [0.0, 1.0, 10.0] {
            let f = rhs(&st(0.0, 0.0, 0.7, -1.2), &ProblemParams::reference(lambda)).unwrap();
            assert_eq!(f, [0.7, -1.2, 0.0, 0.0]);
        }
    }

    #[test]
    fn unit_state() {
        let params = ProblemParams::new(10.0, 3.0, 1.5, 1.0 / 3.0).unwrap();
        let f = rhs(&st(1.0, 1.0, 0.0, 0.0), &params).unwrap();
        assert_eq!(f, [0.0, 0.0, -11.0, -1.0]);
    }

    #[test]
    fn negative_v_switches_off_source() {
        let params = ProblemParams::new(1.0, 3.0, 1.5, 1.0 / 3.0).unwrap();
        let f = rhs(&st(4.0, -1.0, 0.0, 0.0), &params).unwrap();
        assert_eq!(f[2], 0.0);
        assert_eq!(f[3], -8.0);
        // odd extension in u
        let g = rhs(&st(-4.0, -1.0, 0.0, 0.0), &params).unwrap();
        assert_eq!(g[3], 8.0);
    }

    #[test]
    fn general_exponents_match_powf() {
        let params = ProblemParams::new(2.0, 2.5, 0.8, 0.4).unwrap();
        let f = rhs(&st(-0.7, 1.3, 0.0, 0.0), &params).unwrap();
        assert!((f[2] + 2.0 * 1.3f64.powf(0.4) + 1.3f64.powf(2.5)).abs() < 1e-15);
        assert!((f[3] - 0.7f64.powf(0.8)).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        let params = ProblemParams::reference(1.0);
        assert!(rhs(&st(f64::NAN, 0.0, 0.0, 0.0), &params).is_err());
        assert!(rhs(&st(0.0, f64::INFINITY, 0.0, 0.0), &params).is_err());
    }
}
