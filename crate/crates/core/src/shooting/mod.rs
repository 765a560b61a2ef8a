//! The shooting map, its four-colour sign picture over the slope plane, and
//! localization of its zeros.

mod grid;
mod meeting;
mod polish;
mod record;
mod residue;
mod solve;

pub use grid::{refine_to_dense, scan_grid, ColorGrid, GridVertex, ScanWindow, Spacing};
pub use meeting::{cluster_meeting_cells, find_meeting_points, MeetingCell, DEFAULT_MAX_MEETING_K, DEFAULT_MEETING_K};
pub use polish::{polish_root, PolishMethod, PolishSettings, Root, DEFAULT_EPS};
pub use record::{describe_root, BranchLabel, SolutionDetail, SolutionRecord};
pub use residue::{classify, shoot, Quadrant, Residue, ResidueStatus, ZERO_GUARD};
pub use solve::{
    dedup_roots, escalating_meetings, polish_clusters, search_window, solve_window, SolveSettings, WindowSearch,
    WindowSolve,
};
