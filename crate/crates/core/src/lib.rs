//! Controlled invariant convex sets for continuous-time linear systems.
//!
//! Sets are described by their support functions (ellipsoids, polysets and
//! piecewise semi-ellipsoids). Invariance conditions are compiled into conic
//! programs, solved, and the resulting sets are checked by sampling.

pub mod conditions;
pub mod conic;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod parallel;
pub mod polynomials;
pub mod sampling;
pub mod synthesis;
pub mod systems;
pub mod templates;

pub use error::{Error, Result};
pub use parallel::Execution;
