//! Helicoidal constant mean curvature surfaces ("twizzlers") in the
//! Euclidean space, the round 3-sphere and hyperbolic 3-space.

pub mod cli;
pub mod conservation;
pub mod curve;
pub mod error;
pub mod interp;
pub mod io;
pub mod quadrature;
pub mod solver;
pub mod spaceform;
pub mod treadmill;
pub mod twizzler;

pub use error::{Error, Result};
