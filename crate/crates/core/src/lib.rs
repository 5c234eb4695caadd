//! Estimation of fractional (box-counting and variation) dimensions of
//! dynamical-system trajectories, plus a random-search policy trainer whose
//! reward postprocessors shape closed-loop behavior toward low-dimensional
//! limit cycles.
//!
//! The crate is organized around the pipeline:
//!
//! * [`trajectory`] — state/trajectory types and streaming normalization stats
//! * [`mesh`] — hash-keyed box meshes and the lower/upper mesh dimensions
//! * [`variation`] — madogram/variogram power-variation estimators
//! * [`fractal`] — synthetic point sets with known dimension (test oracles)
//! * [`postprocess`] — clipped-dimension reward shaping
//! * [`env`] — seedable desk-scale control environments with disturbances
//! * [`ars`] — augmented random search over linear policies
//! * [`eval`] — dimension reports, failure rates, disturbance calibration

pub mod ars;
pub mod env;
mod error;
pub mod eval;
pub mod fractal;
pub mod mesh;
pub mod postprocess;
pub mod trajectory;
pub mod variation;

pub use error::{Error, Result};

pub(crate) mod seeding;

#[cfg(feature = "test-fixtures")]
pub mod fixtures;
