use serde::{Deserialize, Serialize};

use crate::ode::{FirstOrderSystem, ProblemParams, Trajectory};

/// Reflection symmetry about x = 1/2 and critical-point structure of a
/// solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// max_i |v(x_i) - v(1 - x_i)|
    pub v_sym_defect: f64,
    pub u_sym_defect: f64,
    pub v_max_location: f64,
    pub u_max_location: f64,
    /// Sign changes of v' on (0, 1).
    pub critical_point_count: usize,
    /// Sign changes of u' on (0, 1).
    pub u_critical_point_count: usize,
}

impl SymmetryReport {
    /// v_sym_defect / max |v|, zero for the zero trajectory.
    pub fn relative_v_defect(&self, sup_v: f64) -> f64 {
        if sup_v > 0.0 {
            self.v_sym_defect / sup_v
        } else {
            0.0
        }
    }
}

fn reflection_defect(values: &[f64]) -> f64 {
    let n = values.len();
    (0..n)
        .map(|i| (values[i] - values[n - 1 - i]).abs())
        .fold(0.0, f64::max)
}

/// Position of the largest sample; among equal maxima the one nearest the
/// midpoint wins.
fn argmax_location(values: &[f64], h: f64) -> f64 {
    let mid = 0.5 * (values.len() - 1) as f64;
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        let b = values[best];
        if v > b || (v == b && (i as f64 - mid).abs() < (best as f64 - mid).abs()) {
            best = i;
        }
    }
    best as f64 * h
}

fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0_f64;
    let mut count = 0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

pub fn verify_symmetry(traj: &Trajectory) -> SymmetryReport {
    let h = traj.spacing();
    let u = traj.u_values();
    let v = traj.v_values();
    let n = traj.samples.len();
    let interior = || traj.samples[1..n - 1].iter();
    SymmetryReport {
        v_sym_defect: reflection_defect(&v),
        u_sym_defect: reflection_defect(&u),
        v_max_location: argmax_location(&v, h),
        u_max_location: argmax_location(&u, h),
        critical_point_count: sign_changes(interior().map(|s| s.z)),
        u_critical_point_count: sign_changes(interior().map(|s| s.w)),
    }
}

/// Pointwise defect of the second-order equations, measured with centred
/// second differences on the uniform samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Max over all interior samples.
    pub max_defect: f64,
    /// Max over samples in [1/8, 7/8]. Near the endpoints v+^r with r < 1
    /// is only Hölder continuous, so second differences there converge at a
    /// fractional rate; this restricted maximum shows the second-order rate.
    pub interior_defect: f64,
    pub u_defect: f64,
    pub v_defect: f64,
}

pub const RESIDUAL_INTERIOR: (f64, f64) = (0.125, 0.875);

pub fn verify_residual(traj: &Trajectory, params: &ProblemParams) -> ResidualReport {
    let h = traj.spacing();
    let s = &traj.samples;
    let mut rep = ResidualReport {
        max_defect: 0.0,
        interior_defect: 0.0,
        u_defect: 0.0,
        v_defect: 0.0,
    };
    for i in 1..s.len().saturating_sub(1) {
        let d2u = (s[i - 1].u - 2.0 * s[i].u + s[i + 1].u) / (h * h);
        let d2v = (s[i - 1].v - 2.0 * s[i].v + s[i + 1].v) / (h * h);
        let f = params.derivative(s[i].x, &s[i].state());
        let du = (d2u - f[2]).abs();
        let dv = (d2v - f[3]).abs();
        let d = du.max(dv);
        rep.u_defect = rep.u_defect.max(du);
        rep.v_defect = rep.v_defect.max(dv);
        rep.max_defect = rep.max_defect.max(d);
        let x = s[i].x;
        if x >= RESIDUAL_INTERIOR.0 && x <= RESIDUAL_INTERIOR.1 {
            rep.interior_defect = rep.interior_defect.max(d);
        }
    }
    rep
}
