//! CSV tables (RFC 4180, LF line endings). Floats use Rust's shortest
//! round-trip formatting, so identical inputs give identical bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Trajectory;
use crate::shooting::{BranchLabel, ColorGrid, SolutionRecord};

/// Column order of `bifurcation.csv`.
pub const BIFURCATION_COLUMNS: [&str; 10] = [
    "lambda",
    "branch",
    "du0",
    "dv0",
    "sup_v",
    "sup_u",
    "energy",
    "residue_u1",
    "residue_v1",
    "symmetry_defect",
];

/// Column order of grid tables.
pub const GRID_COLUMNS: [&str; 5] = ["du0", "dv0", "u1", "v1", "quadrant"];

/// Column order of profile tables.
pub const PROFILE_COLUMNS: [&str; 5] = ["x", "u", "v", "du", "dv"];

/// One row of `bifurcation.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub lambda: f64,
    pub branch: BranchLabel,
    pub du0: f64,
    pub dv0: f64,
    pub sup_v: f64,
    pub sup_u: f64,
    pub energy: f64,
    pub residue_u1: f64,
    pub residue_v1: f64,
    pub symmetry_defect: f64,
}

impl From<&SolutionRecord> for BifurcationRow {
    fn from(r: &SolutionRecord) -> Self {
        BifurcationRow {
            lambda: r.lambda,
            branch: r.branch,
            du0: r.du0,
            dv0: r.dv0,
            sup_v: r.sup_v,
            sup_u: r.sup_u,
            energy: r.energy,
            residue_u1: r.residue_u1,
            residue_v1: r.residue_v1,
            symmetry_defect: r.symmetry_defect,
        }
    }
}

#[derive(Serialize)]
struct GridRow<'a> {
    du0: f64,
    dv0: f64,
    u1: f64,
    v1: f64,
    quadrant: &'a str,
}

#[derive(Serialize)]
struct ProfileRow {
    x: f64,
    u: f64,
    v: f64,
    du: f64,
    dv: f64,
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serde(e.to_string());
    w.write_record(header).map_err(ser)?;
    for row in rows {
        w.serialize(row).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serde(e.to_string()))
}

/// Bifurcation table ordered by lambda, then branch (lower, upper,
/// unlabeled), then du0.
pub fn bifurcation_csv(records: &[SolutionRecord]) -> Result<String> {
    let mut rows: Vec<BifurcationRow> = records.iter().map(BifurcationRow::from).collect();
    rows.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then(a.branch.cmp(&b.branch))
            .then(a.du0.total_cmp(&b.du0))
    });
    to_csv(rows, &BIFURCATION_COLUMNS)
}

pub fn parse_bifurcation_csv(text: &str) -> Result<Vec<BifurcationRow>> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Serde(e.to_string()))?;
    if header.iter().ne(BIFURCATION_COLUMNS.iter().copied()) {
        return Err(Error::Serde(format!(
            "unexpected bifurcation header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Serde(e.to_string())))
        .collect()
}

/// Evaluated vertices of `grid` in row-major order; masked vertices are
/// omitted.
pub fn grid_csv(grid: &ColorGrid) -> Result<String> {
    let rows = grid.vertices().iter().map(|v| GridRow {
        du0: v.du0,
        dv0: v.dv0,
        u1: v.residue.u1,
        v1: v.residue.v1,
        quadrant: v.quadrant.name(),
    });
    to_csv(rows, &GRID_COLUMNS)
}

/// Uniform samples of a trajectory: x, u, v, u', v'.
pub fn profile_csv(traj: &Trajectory) -> Result<String> {
    let rows = traj.samples.iter().map(|s| ProfileRow {
        x: s.x,
        u: s.u,
        v: s.v,
        du: s.w,
        dv: s.z,
    });
    to_csv(rows, &PROFILE_COLUMNS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(lambda: f64, branch: BranchLabel, sup_v: f64) -> SolutionRecord {
        SolutionRecord {
            lambda,
            du0: 1.0 / 3.0,
            dv0: 0.25,
            sup_v,
            sup_u: 0.5,
            min_u: 0.0,
            min_v: 0.0,
            energy: -1.5,
            residue_u1: 1e-12,
            residue_v1: -2e-13,
            branch,
            symmetry_defect: 3e-9,
            iterations: 4,
        }
    }

    #[test]
    fn bifurcation_rows_round_trip_and_sort() {
        let recs = [
            rec(2.0, BranchLabel::Upper, 4.0),
            rec(1.0, BranchLabel::Upper, 5.0),
            rec(1.0, BranchLabel::Lower, 0.1),
        ];
        let text = bifurcation_csv(&recs).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), BIFURCATION_COLUMNS.join(","));
        assert!(lines.next().unwrap().starts_with("1.0,lower,0.3333333333333333,"));
        assert!(!text.contains('\r'));
        let rows = parse_bifurcation_csv(&text).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2], BifurcationRow::from(&recs[0]));
        assert_eq!(bifurcation_csv(&recs).unwrap(), text);
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(
            bifurcation_csv(&[]).unwrap(),
            format!("{}\n", BIFURCATION_COLUMNS.join(","))
        );
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(parse_bifurcation_csv("lambda,sup_v\n1,2\n").is_err());
    }
}
