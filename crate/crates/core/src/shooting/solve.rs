use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{refine_to_dense, scan_grid, ColorGrid, ScanWindow, Spacing};
use super::meeting::{cluster_meeting_cells, find_meeting_points, MeetingCell, DEFAULT_MAX_MEETING_K, DEFAULT_MEETING_K};
use super::polish::{polish_root, PolishSettings, Root};
use super::record::{describe_root, SolutionDetail, SolutionRecord};
use crate::error::Result;
use crate::ode::{FirstOrderSystem, ProblemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    pub meeting_k: usize,
    /// Largest block side tried when no `meeting_k` block shows all four
    /// colours. Near a root the red and green sectors are often thin wedges
    /// that only show up together at a larger scale.
    pub max_meeting_k: usize,
    /// Meeting blocks tried per cluster before the cluster is given up.
    pub attempts_per_cluster: usize,
    pub polish: PolishSettings,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            meeting_k: DEFAULT_MEETING_K,
            max_meeting_k: DEFAULT_MAX_MEETING_K,
            attempts_per_cluster: 3,
            polish: PolishSettings::default(),
        }
    }
}

/// Everything produced while searching one window.
#[derive(Debug, Clone)]
pub struct WindowSearch {
    pub coarse: ColorGrid,
    pub dense: ColorGrid,
    pub meetings: Vec<MeetingCell>,
    pub roots: Vec<Root>,
}

/// Coarse scan, dense refinement near colour boundaries, four-colour meeting
/// detection and polishing. Roots are deduplicated and returned sorted by
/// (du0, dv0).
pub fn search_window<S: FirstOrderSystem + ?Sized>(
    window: &ScanWindow,
    dense: Spacing,
    sys: &S,
    settings: &SolveSettings,
) -> Result<WindowSearch> {
    let tol = settings.polish.tol;
    let coarse = scan_grid(window, sys, &tol)?;
    let dense = refine_to_dense(&coarse, dense, sys, &tol)?;
    let mut meetings = escalating_meetings(&dense, settings);
    if meetings.is_empty() {
        // a root straddling the dense pass's blank area can still show up at
        // coarse resolution
        meetings = escalating_meetings(&coarse, settings);
    }
    let roots = polish_clusters(&meetings, sys, settings);
    Ok(WindowSearch {
        coarse,
        dense,
        meetings,
        roots,
    })
}

/// Meeting blocks at the smallest side k = meeting_k, 2 meeting_k - 1, ...
/// (capped at `max_meeting_k`) that yields any.
pub fn escalating_meetings(grid: &ColorGrid, settings: &SolveSettings) -> Vec<MeetingCell> {
    let mut k = settings.meeting_k.max(2);
    loop {
        let found = find_meeting_points(grid, k);
        if !found.is_empty() || k >= settings.max_meeting_k {
            return found;
        }
        k = (2 * k - 1).min(settings.max_meeting_k);
    }
}

/// Polishes one representative per cluster of meeting blocks.
pub fn polish_clusters<S: FirstOrderSystem + ?Sized>(
    meetings: &[MeetingCell],
    sys: &S,
    settings: &SolveSettings,
) -> Vec<Root> {
    let clusters = cluster_meeting_cells(meetings);
    let found: Vec<Option<Root>> = clusters
        .par_iter()
        .map(|group| {
            group
                .iter()
                .take(settings.attempts_per_cluster.max(1))
                .find_map(|cell| polish_root(cell, sys, &settings.polish))
        })
        .collect();
    dedup_roots(found.into_iter().flatten().collect())
}

/// Two roots closer than this (relative to their magnitude) are the same.
const SAME_ROOT: f64 = 1e-6;

pub fn dedup_roots(mut roots: Vec<Root>) -> Vec<Root> {
    roots.sort_by(|a, b| a.du0.total_cmp(&b.du0).then(a.dv0.total_cmp(&b.dv0)));
    let mut out: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        let dup = out.iter_mut().find(|o| {
            (o.du0 - r.du0).abs() <= SAME_ROOT * (1.0 + r.du0.abs())
                && (o.dv0 - r.dv0).abs() <= SAME_ROOT * (1.0 + r.dv0.abs())
        });
        match dup {
            Some(o) if r.residue.max_abs() < o.residue.max_abs() => *o = r,
            Some(_) => {}
            None => out.push(r),
        }
    }
    out
}

/// Result of solving the boundary-value problem over one window.
#[derive(Debug, Clone)]
pub struct WindowSolve {
    pub search: WindowSearch,
    pub solutions: Vec<SolutionDetail>,
}

impl WindowSolve {
    pub fn records(&self) -> Vec<SolutionRecord> {
        self.solutions.iter().map(|s| s.record).collect()
    }
}

/// [`search_window`] for the concave-convex system, with every root turned
/// into a [`SolutionDetail`].
pub fn solve_window(
    window: &ScanWindow,
    dense: Spacing,
    params: &ProblemParams,
    settings: &SolveSettings,
) -> Result<WindowSolve> {
    params.validate()?;
    let search = search_window(window, dense, params, settings)?;
    let solutions = search
        .roots
        .iter()
        .map(|r| describe_root(r, params, &settings.polish.tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowSolve { search, solutions })
}
