//! Continuation of the two solution branches in lambda and detection of the
//! fold where they meet.

mod branch;
mod diagram;
mod sweep;

pub use branch::{label_branches, Branch, BranchMemory, SUP_V_TIE};
pub use diagram::{emit_bifurcation_data, BifurcationPoint};
pub use sweep::{trace_branches, FoldBracket, LambdaOutcome, SweepConfig, SweepResult, SweepStep};
