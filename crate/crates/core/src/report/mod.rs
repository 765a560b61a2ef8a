//! Configuration, CSV and SVG output, and the run manifest.

mod config;
mod persist;
mod svg;
mod tables;

pub use config::{
    GridSection, IvpSection, OutputSection, PolishSection, ProblemSection, RunConfig,
    SweepSection, WindowSection,
};
pub use persist::{
    lambda_tag, persist_step, persist_sweep_result, read_manifest, sha256_hex, verify_manifest,
    EmitFlags, EntryStatus, FileEntry, LambdaEntry, RunManifest, RunWriter, BIFURCATION_CSV,
    BIFURCATION_SVG, MANIFEST_FILE,
};
pub use svg::{quadrant_color, render_bifurcation, render_color_diagram, render_profile};
pub use tables::{
    bifurcation_csv, grid_csv, parse_bifurcation_csv, profile_csv, BifurcationRow,
    BIFURCATION_COLUMNS, GRID_COLUMNS, PROFILE_COLUMNS,
};
