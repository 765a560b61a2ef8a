use serde::{Deserialize, Serialize};

use super::quadrature::simpson;
use crate::error::Result;
use crate::ode::{pos_pow, ProblemParams, Trajectory};

/// The three terms of the energy functional
///
/// ```text
/// J(v) = q/(q+1) int |v''|^((q+1)/q) - lambda/(r+1) int v+^(r+1) - 1/(p+1) int v+^(p+1)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub bending: f64,
    pub concave: f64,
    pub convex: f64,
    pub total: f64,
}

/// Integrands of the three energy terms at each uniform sample, without the
/// constant prefactors.
pub fn energy_integrands(traj: &Trajectory, params: &ProblemParams) -> [Vec<f64>; 3] {
    let ProblemParams { p, q, r, .. } = *params;
    let mut bend = Vec::with_capacity(traj.samples.len());
    let mut conc = Vec::with_capacity(traj.samples.len());
    let mut conv = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        // along the flow v'' = -|u|^(q-1) u, so |v''|^((q+1)/q) = |u|^(q+1)
        bend.push(s.u.abs().powf(q + 1.0));
        conc.push(pos_pow(s.v, r + 1.0));
        conv.push(pos_pow(s.v, p + 1.0));
    }
    [bend, conc, conv]
}

/// Evaluates J on the uniform samples of `traj` by composite Simpson.
pub fn energy(traj: &Trajectory, params: &ProblemParams) -> Result<EnergyBreakdown> {
    traj.check()?;
    let h = traj.spacing();
    let [bend, conc, conv] = energy_integrands(traj, params);
    let ProblemParams { lambda, p, q, r } = *params;
    let bending = q / (q + 1.0) * simpson(&bend, h);
    let concave = lambda / (r + 1.0) * simpson(&conc, h);
    let convex = simpson(&conv, h) / (p + 1.0);
    Ok(EnergyBreakdown {
        bending,
        concave,
        convex,
        total: bending - concave - convex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, Tolerance};

    #[test]
    fn zero_trajectory_has_zero_energy() {
        let params = ProblemParams::reference(10.0);
        let traj = integrate(&params, 0.0, 0.0, &Tolerance::default()).unwrap();
        let e = energy(&traj, &params).unwrap();
        assert_eq!(e, EnergyBreakdown { bending: 0.0, concave: 0.0, convex: 0.0, total: 0.0 });
    }

    #[test]
    fn terms_are_nonnegative_and_total_is_consistent() {
        let params = ProblemParams::reference(3.0);
        let traj = integrate(&params, 2.0, 0.5, &Tolerance::default()).unwrap();
        let e = energy(&traj, &params).unwrap();
        assert!(e.bending >= 0.0 && e.concave >= 0.0 && e.convex >= 0.0);
        assert_eq!(e.total, e.bending - e.concave - e.convex);
    }
}
