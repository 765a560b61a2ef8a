use serde::{Deserialize, Serialize};

use super::polish::Root;
use crate::analysis::{energy, verify_symmetry, EnergyBreakdown, SymmetryReport};
use crate::error::Result;
use crate::ode::{integrate, ProblemParams, Tolerance, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchLabel {
    Lower,
    Upper,
    Unlabeled,
}

impl BranchLabel {
    pub fn name(&self) -> &'static str {
        match self {
            BranchLabel::Lower => "lower",
            BranchLabel::Upper => "upper",
            BranchLabel::Unlabeled => "unlabeled",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [BranchLabel::Lower, BranchLabel::Upper, BranchLabel::Unlabeled]
            .into_iter()
            .find(|b| b.name() == name)
    }
}

/// A converged solution together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub lambda: f64,
    pub du0: f64,
    pub dv0: f64,
    /// max |v| over the uniform samples.
    pub sup_v: f64,
    pub sup_u: f64,
    pub min_u: f64,
    pub min_v: f64,
    /// Total energy J.
    pub energy: f64,
    pub residue_u1: f64,
    pub residue_v1: f64,
    pub branch: BranchLabel,
    /// Reflection defect of v relative to sup_v.
    pub symmetry_defect: f64,
    pub iterations: usize,
}

/// A record plus the trajectory and full reports it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionDetail {
    pub record: SolutionRecord,
    pub trajectory: Trajectory,
    pub energy: EnergyBreakdown,
    pub symmetry: SymmetryReport,
}

impl SolutionRecord {
    pub fn residue_max(&self) -> f64 {
        self.residue_u1.abs().max(self.residue_v1.abs())
    }

    pub fn slopes(&self) -> (f64, f64) {
        (self.du0, self.dv0)
    }
}

/// Re-integrates a polished root on the uniform grid and evaluates energy and
/// symmetry diagnostics.
pub fn describe_root(root: &Root, params: &ProblemParams, tol: &Tolerance) -> Result<SolutionDetail> {
    let trajectory = integrate(params, root.du0, root.dv0, tol)?;
    let energy = energy(&trajectory, params)?;
    let symmetry = verify_symmetry(&trajectory);
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&crate::ode::ShootState) -> f64| {
        trajectory.samples.iter().map(pick).fold(init, f)
    };
    let sup_v = fold(f64::max, 0.0, |s| s.v.abs());
    let sup_u = fold(f64::max, 0.0, |s| s.u.abs());
    let min_u = fold(f64::min, f64::INFINITY, |s| s.u);
    let min_v = fold(f64::min, f64::INFINITY, |s| s.v);
    let record = SolutionRecord {
        lambda: params.lambda,
        du0: root.du0,
        dv0: root.dv0,
        sup_v,
        sup_u,
        min_u,
        min_v,
        energy: energy.total,
        residue_u1: root.residue.u1,
        residue_v1: root.residue.v1,
        branch: BranchLabel::Unlabeled,
        symmetry_defect: symmetry.relative_v_defect(sup_v),
        iterations: root.iterations,
    };
    Ok(SolutionDetail {
        record,
        trajectory,
        energy,
        symmetry,
    })
}
