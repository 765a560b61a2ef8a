//! Diagnostics on computed solutions and the analytical lambda thresholds.

mod checks;
mod energy;
mod gamma;
pub mod quadrature;
mod symmetry;
mod thresholds;

pub use checks::{check_solution, CheckLimits, SolutionChecks};
pub use energy::{energy, energy_integrands, EnergyBreakdown};
pub use gamma::gamma_fn;
pub use symmetry::{
    verify_residual, verify_symmetry, ResidualReport, SymmetryReport, RESIDUAL_INTERIOR,
};
pub use thresholds::{
    conjugate_exponents, h_profile, k_emb, lambda0_basic, lambda0_improved, threshold_t,
    thresholds, ThresholdReport,
};
