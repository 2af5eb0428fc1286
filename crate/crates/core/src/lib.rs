//! Uncrowded hypervolume gradient ascent for bi-objective optimization.

pub mod error;
pub mod gradient;
pub mod hypervolume;
pub mod metrics;
pub mod optimizers;
pub mod problems;

pub use error::{Error, Result};

/// Objective values `(f0, f1)` of one solution; both are minimized.
pub type Objectives = [f64; 2];
