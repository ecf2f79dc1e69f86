//! Lotka-Volterra prey-predator dynamics and the time-power-series
//! perturbation schemes commonly applied to it.
//!
//! The crate builds the truncated series produced by the Taylor recurrence,
//! Adomian decomposition, homotopy perturbation and variational iteration,
//! integrates the model with an adaptive Dormand-Prince 5(4) pair, and
//! measures how badly each truncated series describes the dynamics:
//! divergence from the reference, drift of the first integral, and
//! self-crossing of the phase curve.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod methods;
pub mod model;
pub mod poly;
pub mod preset;
pub mod series;
pub mod svg;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use model::{ModelParams, PopulationState};
pub use series::{InitialValueProblem, SeriesSolution};
pub use trajectory::Trajectory;
