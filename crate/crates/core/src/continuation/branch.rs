use serde::{Deserialize, Serialize};

use crate::shooting::{BranchLabel, SolutionRecord};

/// Two records whose sup_v differ by at most this are treated as tied.
pub const SUP_V_TIE: f64 = 1e-9;

/// One solution branch, ordered by lambda.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub label: BranchLabel,
    pub records: Vec<SolutionRecord>,
}

impl Branch {
    pub fn new(label: BranchLabel) -> Self {
        Branch {
            label,
            records: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn at(&self, lambda: f64) -> Option<&SolutionRecord> {
        self.records.iter().find(|r| r.lambda == lambda)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.lambda).collect()
    }

    /// Inserts keeping lambda strictly increasing; a record at an existing
    /// lambda replaces the old one.
    pub fn insert(&mut self, mut record: SolutionRecord) {
        record.branch = self.label;
        match self
            .records
            .binary_search_by(|r| r.lambda.total_cmp(&record.lambda))
        {
            Ok(k) => self.records[k] = record,
            Err(k) => self.records.insert(k, record),
        }
    }
}

/// Previous roots of the two branches, used to label a lone record by
/// continuity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BranchMemory {
    pub lower: Option<(f64, f64)>,
    pub upper: Option<(f64, f64)>,
}

/// Assigns branch labels to the records found at one lambda.
///
/// With two or more records the smallest sup_v is the lower branch and the
/// largest the upper one (ties within [`SUP_V_TIE`] go to the smaller du0);
/// any records in between stay unlabeled for manual review. A single record
/// takes the label of the nearest previous root, or stays unlabeled when
/// there is none.
pub fn label_branches(records: &[SolutionRecord], memory: &BranchMemory) -> Vec<SolutionRecord> {
    let mut out: Vec<SolutionRecord> = records.to_vec();
    for r in &mut out {
        r.branch = BranchLabel::Unlabeled;
    }
    match out.len() {
        0 => {}
        1 => {
            let r = &mut out[0];
            let d = |p: Option<(f64, f64)>| p.map(|p| relative_distance(p, (r.du0, r.dv0)));
            r.branch = match (d(memory.lower), d(memory.upper)) {
                (Some(a), Some(b)) if a <= b => BranchLabel::Lower,
                (Some(_), Some(_)) => BranchLabel::Upper,
                (Some(_), None) => BranchLabel::Lower,
                (None, Some(_)) => BranchLabel::Upper,
                (None, None) => BranchLabel::Unlabeled,
            };
        }
        _ => {
            out.sort_by(|a, b| {
                if (a.sup_v - b.sup_v).abs() <= SUP_V_TIE {
                    a.du0.total_cmp(&b.du0)
                } else {
                    a.sup_v.total_cmp(&b.sup_v)
                }
            });
            let last = out.len() - 1;
            out[0].branch = BranchLabel::Lower;
            out[last].branch = BranchLabel::Upper;
        }
    }
    out
}

/// Distance between slope pairs, measured relative to their size so that the
/// small lower-branch roots and the large upper-branch roots compare fairly.
pub(crate) fn relative_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    rel(a.0, b.0).hypot(rel(a.1, b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(du0: f64, dv0: f64, sup_v: f64) -> SolutionRecord {
        SolutionRecord {
            lambda: 10.0,
            du0,
            dv0,
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
    fn pair_is_ordered_by_sup_v() {
        let out = label_branches(
            &[rec(43.7, 16.4, 5.6), rec(0.98, 0.04, 0.014)],
            &BranchMemory::default(),
        );
        assert_eq!(out[0].branch, BranchLabel::Lower);
        assert_eq!(out[0].du0, 0.98);
        assert_eq!(out[1].branch, BranchLabel::Upper);
    }

    #[test]
    fn equal_sup_v_breaks_tie_by_du0() {
        let out = label_branches(
            &[rec(2.0, 1.0, 1.0), rec(1.0, 1.0, 1.0 + 1e-10)],
            &BranchMemory::default(),
        );
        assert_eq!((out[0].du0, out[0].branch), (1.0, BranchLabel::Lower));
        assert_eq!((out[1].du0, out[1].branch), (2.0, BranchLabel::Upper));
    }

    #[test]
    fn single_record_follows_continuity() {
        let mem = BranchMemory {
            lower: Some((1.0, 0.04)),
            upper: Some((43.0, 16.0)),
        };
        let out = label_branches(&[rec(1.1, 0.05, 0.02)], &mem);
        assert_eq!(out[0].branch, BranchLabel::Lower);
        let out = label_branches(&[rec(42.0, 15.5, 5.0)], &mem);
        assert_eq!(out[0].branch, BranchLabel::Upper);
        let out = label_branches(&[rec(1.1, 0.05, 0.02)], &BranchMemory::default());
        assert_eq!(out[0].branch, BranchLabel::Unlabeled);
    }

    #[test]
    fn extra_records_are_left_for_review() {
        let out = label_branches(
            &[rec(5.0, 1.0, 1.0), rec(1.0, 0.1, 0.1), rec(40.0, 10.0, 5.0)],
            &BranchMemory::default(),
        );
        let labels: Vec<_> = out.iter().map(|r| r.branch).collect();
        assert_eq!(
            labels,
            vec![BranchLabel::Lower, BranchLabel::Unlabeled, BranchLabel::Upper]
        );
    }

    #[test]
    fn branch_insert_keeps_lambda_increasing() {
        let mut b = Branch::new(BranchLabel::Lower);
        for l in [3.0, 1.0, 2.0, 2.0] {
            b.insert(SolutionRecord { lambda: l, ..rec(1.0, 1.0, 1.0) });
        }
        assert_eq!(b.lambdas(), vec![1.0, 2.0, 3.0]);
        assert!(b.records.iter().all(|r| r.branch == BranchLabel::Lower));
    }
}
