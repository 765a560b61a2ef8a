//! The first-order system and its initial-value solver.

mod dopri;
mod params;
mod system;

pub use dopri::{
    integrate, integrate_uniform, terminal_state, Endpoint, IntegrationStats, Tolerance,
    Trajectory, DEFAULT_SAMPLE_INTERVALS, OVERFLOW_GUARD,
};
pub use params::ProblemParams;
pub(crate) use params::regime;
pub use system::{rhs, FirstOrderSystem, ShootState, State};
pub(crate) use system::pos_pow;
