//! Two two-level atoms coupled symmetrically to a single-mode vacuum cavity:
//! closed-form and numerical dynamics, entanglement and Bell-violation
//! measures, and reference frontiers in the concurrence / linear-entropy plane.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod frontier;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod trajectory;

pub use error::{Error, Result};
