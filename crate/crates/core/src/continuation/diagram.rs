use serde::{Deserialize, Serialize};

use super::branch::Branch;
use crate::shooting::BranchLabel;

/// One point of the bifurcation diagram: sup over [0,1] of v against lambda.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub lambda: f64,
    pub branch: BranchLabel,
    pub sup_v: f64,
}

/// Flattens branches into diagram points ordered by lambda, then branch.
pub fn emit_bifurcation_data(branches: &[&Branch]) -> Vec<BifurcationPoint> {
    let mut out: Vec<BifurcationPoint> = branches
        .iter()
        .flat_map(|b| {
            b.records.iter().map(|r| BifurcationPoint {
                lambda: r.lambda,
                branch: b.label,
                sup_v: r.sup_v,
            })
        })
        .collect();
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.branch.cmp(&b.branch)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::SolutionRecord;

    fn rec(lambda: f64, sup_v: f64) -> SolutionRecord {
        SolutionRecord {
            lambda,
            du0: 1.0,
            dv0: 1.0,
            sup_v,
            sup_u: 0.0,
            min_u: 0.0,
            min_v: 0.0,
            energy: 0.0,
            residue_u1: 0.0,
            residue_v1: 0.0,
            branch: BranchLabel::Unlabeled,
            symmetry_defect: 0.0,
            iterations: 0,
        }
    }

    #[test]
    fn points_interleave_by_lambda() {
        let mut lo = Branch::new(BranchLabel::Lower);
        let mut up = Branch::new(BranchLabel::Upper);
        for l in [1.0, 2.0] {
            lo.insert(rec(l, 0.1 * l));
            up.insert(rec(l, 5.0 - l));
        }
        let pts = emit_bifurcation_data(&[&up, &lo]);
        let order: Vec<_> = pts.iter().map(|p| (p.lambda, p.branch)).collect();
        assert_eq!(
            order,
            vec![
                (1.0, BranchLabel::Lower),
                (1.0, BranchLabel::Upper),
                (2.0, BranchLabel::Lower),
                (2.0, BranchLabel::Upper)
            ]
        );
        assert!(emit_bifurcation_data(&[]).is_empty());
    }
}
