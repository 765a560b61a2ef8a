//! A posteriori checks of a computed solution: boundary residue, symmetry
//! about x = 1/2, second-order consistency of the discrete equations, and
//! nonnegativity.

use serde::{Deserialize, Serialize};

use super::energy::energy;
use super::symmetry::{verify_residual, verify_symmetry};
use crate::error::Result;
use crate::ode::{integrate_uniform, ProblemParams, Tolerance, DEFAULT_SAMPLE_INTERVALS};

/// Pass thresholds for [`check_solution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckLimits {
    /// max(|u(1)|, |v(1)|) must be below this.
    pub eps: f64,
    /// v_sym_defect / sup v must be below this.
    pub symmetry: f64,
    /// Smallest accepted observed order of the interior residual.
    pub min_order: f64,
    /// u and v must stay above -nonnegativity.
    pub nonnegativity: f64,
}

impl Default for CheckLimits {
    fn default() -> Self {
        CheckLimits {
            eps: 1e-6,
            symmetry: 1e-4,
            min_order: 1.8,
            nonnegativity: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionChecks {
    pub lambda: f64,
    pub du0: f64,
    pub dv0: f64,
    pub residue: f64,
    pub sup_v: f64,
    pub relative_symmetry_defect: f64,
    pub v_max_location: f64,
    /// Sample spacing of the trajectory the location was read from.
    pub sample_spacing: f64,
    pub critical_points: usize,
    /// Interior residual at n/2, n and 2n intervals.
    pub residual_defects: [f64; 3],
    /// log2 of successive residual ratios.
    pub residual_orders: [f64; 2],
    pub min_u: f64,
    pub min_v: f64,
    pub energy: f64,
    pub residue_ok: bool,
    pub symmetry_ok: bool,
    pub max_location_ok: bool,
    pub single_critical_point: bool,
    pub residual_order_ok: bool,
    pub nonnegative: bool,
}

impl SolutionChecks {
    pub fn passed(&self) -> bool {
        self.residue_ok
            && self.symmetry_ok
            && self.max_location_ok
            && self.single_critical_point
            && self.residual_order_ok
            && self.nonnegative
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.residue_ok, "residue"),
            (self.symmetry_ok, "symmetry"),
            (self.max_location_ok, "max_location"),
            (self.single_critical_point, "critical_points"),
            (self.residual_order_ok, "residual_order"),
            (self.nonnegative, "nonnegativity"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

/// Integrates from slopes (du0, dv0) and runs every check.
pub fn check_solution(
    params: &ProblemParams,
    du0: f64,
    dv0: f64,
    tol: &Tolerance,
    limits: &CheckLimits,
) -> Result<SolutionChecks> {
    let n = DEFAULT_SAMPLE_INTERVALS;
    let traj = integrate_uniform(params, du0, dv0, tol, n)?;
    let end = traj.last();
    let residue = end.u.abs().max(end.v.abs());
    let sym = verify_symmetry(&traj);
    let sup_v = traj.samples.iter().fold(0.0f64, |m, s| m.max(s.v.abs()));
    let min_u = traj.samples.iter().fold(f64::INFINITY, |m, s| m.min(s.u));
    let min_v = traj.samples.iter().fold(f64::INFINITY, |m, s| m.min(s.v));
    let mut defects = [0.0; 3];
    for (k, m) in [n / 2, n, 2 * n].into_iter().enumerate() {
        let t = integrate_uniform(params, du0, dv0, tol, m)?;
        defects[k] = verify_residual(&t, params).interior_defect;
    }
    let order = |a: f64, b: f64| if b > 0.0 { (a / b).log2() } else { f64::INFINITY };
    let orders = [order(defects[0], defects[1]), order(defects[1], defects[2])];
    let h = traj.spacing();
    let rel_sym = sym.relative_v_defect(sup_v);
    Ok(SolutionChecks {
        lambda: params.lambda,
        du0,
        dv0,
        residue,
        sup_v,
        relative_symmetry_defect: rel_sym,
        v_max_location: sym.v_max_location,
        sample_spacing: h,
        critical_points: sym.critical_point_count,
        residual_defects: defects,
        residual_orders: orders,
        min_u,
        min_v,
        energy: energy(&traj, params)?.total,
        residue_ok: residue < limits.eps,
        symmetry_ok: rel_sym < limits.symmetry,
        max_location_ok: (sym.v_max_location - 0.5).abs() <= h * (1.0 + 1e-9),
        single_critical_point: sym.critical_point_count == 1,
        residual_order_ok: orders.iter().all(|&o| o >= limits.min_order),
        nonnegative: min_u > -limits.nonnegativity && min_v > -limits.nonnegativity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_solution_at_ten_passes() {
        let params = ProblemParams::reference(10.0);
        let c = check_solution(
            &params,
            0.9856019452203532,
            0.04183376178108574,
            &Tolerance::default(),
            &CheckLimits::default(),
        )
        .unwrap();
        assert!(c.passed(), "{:?} {c:?}", c.failures());
    }

    #[test]
    fn off_root_slopes_fail_the_residue_check() {
        let params = ProblemParams::reference(10.0);
        let c = check_solution(&params, 1.2, 0.05, &Tolerance::default(), &CheckLimits::default())
            .unwrap();
        assert!(!c.residue_ok);
        assert!(c.failures().contains(&"residue"));
    }
}
