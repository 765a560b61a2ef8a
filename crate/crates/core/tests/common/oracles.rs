//! Independent reference computations used to cross-check the library:
//! a fixed-step classical Runge-Kutta integrator and a golden-section
//! maximizer. Shared by the core integration tests and the acceptance run.

#![allow(dead_code)]

use cc_shoot::ode::{FirstOrderSystem, State};

/// Classical fourth-order Runge-Kutta from (0, 0, du0, dv0) to x = 1 with
/// `steps` equal steps.
pub fn rk4_endpoint<S: FirstOrderSystem + ?Sized>(sys: &S, du0: f64, dv0: f64, steps: usize) -> State {
    let h = 1.0 / steps as f64;
    let mut y: State = [0.0, 0.0, du0, dv0];
    let axpy = |y: &State, k: &State, a: f64| -> State {
        [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]]
    };
    for n in 0..steps {
        let x = n as f64 * h;
        let k1 = sys.derivative(x, &y);
        let k2 = sys.derivative(x + 0.5 * h, &axpy(&y, &k1, 0.5 * h));
        let k3 = sys.derivative(x + 0.5 * h, &axpy(&y, &k2, 0.5 * h));
        let k4 = sys.derivative(x + h, &axpy(&y, &k3, h));
        for c in 0..4 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }
    y
}

/// h(t) = a t^alpha - b t^beta, the shape of the threshold profile.
#[derive(Debug, Clone, Copy)]
pub struct TwoPower {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
}

impl TwoPower {
    /// The threshold profile for exponents (p, q, r).
    pub fn threshold_profile(p: f64, q: f64, r: f64) -> Self {
        TwoPower {
            a: q / (q + 1.0),
            alpha: 1.0 / q - r,
            b: 1.0 / (2f64.powf(p + 1.0) * (p + 1.0)),
            beta: p - r,
        }
    }

    /// h(s) - h(t) for s, t > 0 without cancellation: each power difference
    /// is t^e expm1(e ln(s/t)).
    pub fn difference(&self, s: f64, t: f64) -> f64 {
        let l = (s / t).ln();
        self.a * t.powf(self.alpha) * (self.alpha * l).exp_m1()
            - self.b * t.powf(self.beta) * (self.beta * l).exp_m1()
    }
}

/// Golden-section search for the maximizer of a unimodal `f` on [lo, hi].
/// Points are compared through `diff(s, t) = f(s) - f(t)` so the comparison
/// stays meaningful on the flat top where f itself has no digits to spare.
pub fn golden_section_argmax(diff: impl Fn(f64, f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    while (hi - lo) > rel_tol * (lo.abs() + hi.abs()) / 2.0 {
        if diff(c, d) > 0.0 {
            hi = d;
            d = c;
            c = hi - g * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + g * (hi - lo);
        }
    }
    (lo + hi) / 2.0
}

/// u'' = -v - alpha, v'' = -u - beta: an affine system whose shooting map
/// has a single root known in closed form.
#[derive(Debug, Clone, Copy)]
pub struct AffineSystem {
    pub alpha: f64,
    pub beta: f64,
}

impl FirstOrderSystem for AffineSystem {
    fn derivative(&self, _x: f64, y: &State) -> State {
        [y[2], y[3], -y[1] - self.alpha, -y[0] - self.beta]
    }
}

impl AffineSystem {
    /// With s = u + v and d = u - v the system decouples into
    /// s'' = -s - (alpha + beta) and d'' = d - (alpha - beta); imposing
    /// s(1) = d(1) = 0 fixes s'(0) and d'(0).
    pub fn exact_root(&self) -> (f64, f64) {
        let s = (self.alpha + self.beta) * (1.0 - 1f64.cos()) / 1f64.sin();
        let d = (self.alpha - self.beta) * (1f64.cosh() - 1.0) / 1f64.sinh();
        ((s + d) / 2.0, (s - d) / 2.0)
    }
}
