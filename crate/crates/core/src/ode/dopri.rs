//! Dormand–Prince 5(4) initial-value solver on [0, 1].
//!
//! Step control follows Hairer, Nørsett & Wanner (PI controller, FSAL). Two
//! drivers share the stepping loop: a free-running one that only reports the
//! terminal state (used by the shooting map, where speed matters), and one
//! that lands exactly on every node of a uniform grid so the trajectory can be
//! sampled without interpolation.

use serde::{Deserialize, Serialize};

use super::system::{FirstOrderSystem, ShootState, State};
use crate::error::{Error, FailureKind, IntegrationFailure, Result};

/// Components larger than this in magnitude abort the solve.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// Number of uniform intervals in a trajectory's sample grid.
pub const DEFAULT_SAMPLE_INTERVALS: usize = 512;

const MAX_STEPS: usize = 200_000;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Relative and absolute local-error tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-8, abs: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        let tol = Tolerance { rel, abs };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel > 0.0 && self.abs > 0.0 && self.rel.is_finite() && self.abs.is_finite()) {
            return Err(Error::domain(format!(
                "tolerances must be positive and finite, got rel = {}, abs = {}",
                self.rel, self.abs
            )));
        }
        Ok(())
    }

    /// Both components scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerance {
            rel: self.rel * factor,
            abs: self.abs * factor,
        }
    }
}

/// Bookkeeping from one solve.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Estimated global error at the end point: the largest component of
    /// each step's embedded local error estimate, carried forward with the
    /// Gronwall factor exp(h L), where L is the secant Lipschitz estimate
    /// |f(y_new) - f(y)| / |y_new - y| of the step.
    pub error_estimate: f64,
}

/// Terminal state of a free-running solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub state: State,
    pub stats: IntegrationStats,
}

/// Solution of the initial-value problem on [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Uniform samples x_i = i / n, i = 0..=n.
    pub samples: Vec<ShootState>,
    /// Every accepted step endpoint, including x = 0.
    pub steps: Vec<ShootState>,
    pub tol: Tolerance,
    pub stats: IntegrationStats,
}

impl Trajectory {
    /// Number of uniform intervals.
    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    pub fn last(&self) -> &ShootState {
        self.samples.last().expect("trajectory has at least two samples")
    }

    pub fn u_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.u).collect()
    }

    pub fn v_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.v).collect()
    }

    /// Checks the structural invariants: uniform grid from 0 to 1, strictly
    /// increasing, finite.
    pub fn check(&self) -> Result<()> {
        let n = self.samples.len();
        if n < 2 {
            return Err(Error::domain("trajectory needs at least two samples"));
        }
        if self.samples[0].x != 0.0 || self.samples[n - 1].x != 1.0 {
            return Err(Error::domain(format!(
                "trajectory must span [0, 1], got [{}, {}]",
                self.samples[0].x,
                self.samples[n - 1].x
            )));
        }
        for pair in self.samples.windows(2).chain(self.steps.windows(2)) {
            if !(pair[1].x > pair[0].x) {
                return Err(Error::domain("trajectory positions must increase strictly"));
            }
        }
        if !self.samples.iter().all(ShootState::is_finite) {
            return Err(Error::domain("trajectory contains non-finite values"));
        }
        Ok(())
    }
}

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for i in 0..4 {
        let mut acc = 0.0;
        for &(c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// max_i |f_i(y1) - f_i(y0)| / max_i |y1_i - y0_i|, 0 for a stationary step.
#[inline]
fn secant_lipschitz(y0: &State, y1: &State, f0: &State, f1: &State) -> f64 {
    let dy = (0..4).fold(0.0_f64, |m, i| m.max((y1[i] - y0[i]).abs()));
    let df = (0..4).fold(0.0_f64, |m, i| m.max((f1[i] - f0[i]).abs()));
    if dy > 0.0 {
        df / dy
    } else {
        0.0
    }
}

#[inline]
fn err_norm(y: &State, y_new: &State, err: &State, tol: &Tolerance) -> f64 {
    let mut sum = 0.0;
    for i in 0..4 {
        let sc = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
        let e = err[i] / sc;
        sum += e * e;
    }
    (sum / 4.0).sqrt()
}

fn initial_step<S: FirstOrderSystem + ?Sized>(
    sys: &S,
    y0: &State,
    f0: &State,
    tol: &Tolerance,
) -> (f64, usize) {
    // Hairer's starting-step heuristic for a method of order 5.
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..4 {
        let sc = tol.abs + tol.rel * y0[i].abs();
        d0 += (y0[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let d0 = (d0 / 4.0).sqrt();
    let d1 = (d1 / 4.0).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(1.0);
    let y1 = axpy(y0, h, &[(1.0, f0)]);
    let f1 = sys.derivative(h, &y1);
    let mut d2 = 0.0;
    for i in 0..4 {
        let sc = tol.abs + tol.rel * y0[i].abs();
        d2 += ((f1[i] - f0[i]) / sc).powi(2);
    }
    let d2 = (d2 / 4.0).sqrt() / h;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(1.0 / 5.0)
    };
    ((100.0 * h).min(h1).min(H_START_MAX), 1)
}

/// Upper bound on the first step. The trajectory starts at v = 0, where the
/// sublinear term v+^r is not Lipschitz: v^r grows like x^r, and a large
/// first step is accepted by the embedded error estimate (both orders miss
/// the x^r behaviour alike) while committing a global error far above the
/// tolerance. Starting small lets the controller resolve the layer.
const H_START_MAX: f64 = 1e-7;

/// Longest step allowed to carry a kink component across zero. Longer steps
/// that straddle a crossing are retried ten times shorter, so the crossing
/// is passed with a step no longer than this and the controller then grows
/// the step back out of the layer, as it does from x = 0.
const H_CROSS: f64 = 1e-8;

/// Shared stepping loop. `nodes` = Some(n) forces steps to land on i/n;
/// `observe` sees every accepted step endpoint with a flag telling whether it
/// is a grid node.
fn drive<S, F>(
    sys: &S,
    y0: State,
    tol: &Tolerance,
    nodes: Option<usize>,
    mut observe: F,
) -> Result<(State, IntegrationStats), IntegrationFailure>
where
    S: FirstOrderSystem + ?Sized,
    F: FnMut(f64, &State, bool),
{
    const SAFE: f64 = 0.9;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;
    const BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - BETA * 0.75;
    const H_MAX: f64 = 0.25;

    let mut stats = IntegrationStats::default();
    let mut x = 0.0_f64;
    let mut y = y0;
    let mut k1 = sys.derivative(x, &y);
    stats.rhs_evals += 1;
    let (h0, evals) = initial_step(sys, &y, &k1, tol);
    stats.rhs_evals += evals;
    let mut h = h0.min(H_MAX);
    let mut fac_old = 1e-4_f64;
    let mut last_rejected = false;
    let mut next_node = 1usize;

    observe(0.0, &y, true);

    while x < 1.0 {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(IntegrationFailure {
                kind: FailureKind::TooManySteps,
                x,
                state: y,
            });
        }
        let target = match nodes {
            Some(n) => next_node as f64 / n as f64,
            None => 1.0,
        };
        let mut landing = false;
        let mut h_try = h;
        if x + h_try >= target - 1e-13 {
            h_try = target - x;
            landing = true;
        }
        if h_try <= 16.0 * f64::EPSILON * x.abs().max(1.0) {
            return Err(IntegrationFailure {
                kind: FailureKind::StepUnderflow,
                x,
                state: y,
            });
        }

        let k2 = sys.derivative(x + C2 * h_try, &axpy(&y, h_try, &[(A21, &k1)]));
        let k3 = sys.derivative(x + C3 * h_try, &axpy(&y, h_try, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.derivative(
            x + C4 * h_try,
            &axpy(&y, h_try, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = sys.derivative(
            x + C5 * h_try,
            &axpy(&y, h_try, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = sys.derivative(
            x + h_try,
            &axpy(
                &y,
                h_try,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h_try,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = sys.derivative(x + h_try, &y_new);
        stats.rhs_evals += 6;

        let mut err = [0.0; 4];
        for i in 0..4 {
            err[i] = h_try
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let finite = y_new.iter().chain(k7.iter()).all(|c| c.is_finite());
        let e = if finite {
            err_norm(&y, &y_new, &err, tol)
        } else {
            f64::INFINITY
        };

        let kinks = sys.kink_components();
        let straddles = h_try > H_CROSS
            && kinks.iter().any(|&c| (y[c] > 0.0) != (y_new[c] > 0.0));

        if e <= 1.0 && !straddles {
            stats.accepted += 1;
            let local = err.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            stats.error_estimate = stats.error_estimate * (h_try * secant_lipschitz(&y, &y_new, &k1, &k7)).exp() + local;
            if y_new.iter().any(|c| c.abs() > OVERFLOW_GUARD) {
                return Err(IntegrationFailure {
                    kind: FailureKind::Overflow,
                    x: x + h_try,
                    state: y_new,
                });
            }
            let fac11 = e.powf(EXPO);
            let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h_try / fac;
            if last_rejected {
                h_new = h_new.min(h_try);
            }
            fac_old = e.max(1e-4);
            x = if landing { target } else { x + h_try };
            y = y_new;
            k1 = k7;
            observe(x, &y, landing && nodes.is_some());
            if landing {
                next_node += 1;
                // a landing step is usually truncated; do not let it shrink
                // the controller's proposal
                h = h_new.max(h).min(H_MAX);
            } else {
                h = h_new.min(H_MAX);
            }
            last_rejected = false;
        } else {
            stats.rejected += 1;
            if e <= 1.0 {
                // accurate by the estimate, but across a kink
                h = (0.1 * h_try).max(H_CROSS);
                last_rejected = true;
                continue;
            }
            let shrink = if e.is_finite() {
                (e.powf(EXPO) / SAFE).min(1.0 / FAC_MIN)
            } else {
                10.0
            };
            h = h_try / shrink;
            last_rejected = true;
        }
    }

    Ok((y, stats))
}

fn initial_state(du0: f64, dv0: f64) -> Result<State> {
    if !(du0.is_finite() && dv0.is_finite()) {
        return Err(Error::domain(format!("initial slopes must be finite, got ({du0}, {dv0})")));
    }
    Ok([0.0, 0.0, du0, dv0])
}

/// Integrates from (u, v, w, z)(0) = (0, 0, du0, dv0) to x = 1 and returns
/// only the terminal state.
pub fn terminal_state<S: FirstOrderSystem + ?Sized>(
    sys: &S,
    du0: f64,
    dv0: f64,
    tol: &Tolerance,
) -> Result<Endpoint> {
    tol.validate()?;
    let y0 = initial_state(du0, dv0)?;
    let (state, stats) = drive(sys, y0, tol, None, |_, _, _| {})?;
    Ok(Endpoint { state, stats })
}

/// Integrates on [0, 1] and records `intervals + 1` uniform samples.
pub fn integrate_uniform<S: FirstOrderSystem + ?Sized>(
    sys: &S,
    du0: f64,
    dv0: f64,
    tol: &Tolerance,
    intervals: usize,
) -> Result<Trajectory> {
    tol.validate()?;
    if intervals < 2 {
        return Err(Error::domain("need at least two sample intervals"));
    }
    let y0 = initial_state(du0, dv0)?;
    let mut samples = Vec::with_capacity(intervals + 1);
    let mut steps = Vec::with_capacity(intervals + 1);
    let (_, stats) = drive(sys, y0, tol, Some(intervals), |x, y, node| {
        let s = ShootState::new(x, *y);
        if node {
            samples.push(s);
        }
        steps.push(s);
    })?;
    debug_assert_eq!(samples.len(), intervals + 1);
    Ok(Trajectory {
        samples,
        steps,
        tol: *tol,
        stats,
    })
}

/// [`integrate_uniform`] on the default 512-interval grid.
pub fn integrate<S: FirstOrderSystem + ?Sized>(
    sys: &S,
    du0: f64,
    dv0: f64,
    tol: &Tolerance,
) -> Result<Trajectory> {
    integrate_uniform(sys, du0, dv0, tol, DEFAULT_SAMPLE_INTERVALS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::ProblemParams;

    struct Harmonic;

    impl FirstOrderSystem for Harmonic {
        fn derivative(&self, _x: f64, y: &State) -> State {
            // u'' = -u, v'' = -4v
            [y[2], y[3], -y[0], -4.0 * y[1]]
        }
    }

    #[test]
    fn harmonic_endpoint_matches_closed_form() {
        let tol = Tolerance::new(1e-11, 1e-13).unwrap();
        let end = terminal_state(&Harmonic, 1.0, 2.0, &tol).unwrap();
        assert!((end.state[0] - 1f64.sin()).abs() < 1e-10);
        assert!((end.state[1] - 2f64.sin()).abs() < 1e-10);
        assert!((end.state[2] - 1f64.cos()).abs() < 1e-10);
        assert!((end.state[3] - 2.0 * 2f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn uniform_samples_land_on_nodes() {
        let traj = integrate(&Harmonic, 1.0, 0.5, &Tolerance::default()).unwrap();
        traj.check().unwrap();
        assert_eq!(traj.samples.len(), DEFAULT_SAMPLE_INTERVALS + 1);
        for (i, s) in traj.samples.iter().enumerate() {
            assert_eq!(s.x, i as f64 / 512.0);
        }
        let mid = traj.samples[256];
        assert!((mid.u - 0.5f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let traj = integrate(&ProblemParams::reference(10.0), 0.0, 0.0, &Tolerance::default()).unwrap();
        assert!(traj.samples.iter().all(|s| s.state() == [0.0; 4]));
    }

    #[test]
    fn blow_up_is_reported_with_last_state() {
        // u'' = u^3-ish growth through the convex term with negative u feeding v
        let params = ProblemParams::reference(0.0);
        let err = terminal_state(&params, -50.0, 200.0, &Tolerance::default()).unwrap_err();
        match err {
            Error::Integration(f) => {
                assert!(f.x < 1.0);
                assert!(f.state.iter().all(|c| c.is_finite()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let params = ProblemParams::reference(1.0);
        assert!(terminal_state(&params, f64::NAN, 0.0, &Tolerance::default()).is_err());
        assert!(terminal_state(&params, 0.0, 0.0, &Tolerance { rel: 0.0, abs: 1e-9 }).is_err());
    }
}
