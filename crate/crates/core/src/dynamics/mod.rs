//! Data-driven vehicle dynamics: reference plant trials, piecewise-quadratic
//! envelope fits and slip limits.

pub mod fit;
pub mod profile;
pub mod trials;

pub use fit::{fit_piecewise_quadratic, fit_samples, PiecewiseQuadratic};
pub use profile::{build_profile, fit_report, DynamicsProfile, FitReport};
pub use trials::{collect_trials, PlantModel, TrialField, TrialLog, TrialSample, Trials};

/// Gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.81;
