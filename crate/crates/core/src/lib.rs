//! Nonnegative solutions of the concave-convex Hamiltonian system
//!
//! ```text
//! -u'' = lambda * (v+)^r + (v+)^p,   -v'' = |u|^(q-1) u,   u = v = 0 at x = 0, 1
//! ```
//!
//! found by shooting over the initial slopes (u'(0), v'(0)). Roots of the
//! shooting map are localized where the four sign quadrants of its output
//! meet, polished, and continued in lambda to trace the lower and upper
//! solution branches up to their fold.

pub mod analysis;
pub mod continuation;
mod error;
pub mod ode;
pub mod report;
pub mod shooting;

pub use error::{Error, FailureKind, IntegrationFailure, Result};
