//! Arc-guided maneuver planning for a single ego vehicle.
//!
//! The pipeline per planning cycle: sample lane waypoints, fit a guiding arc
//! that yields a target speed and steering, sample candidate controls around
//! it, discard those that violate the fitted dynamics envelopes or hit a
//! predicted neighbor, and pick the cheapest survivor. [`sim`] closes the loop
//! in a deterministic fixed-step world.

pub mod benchmarks;
pub mod cli;
pub mod collision;
pub mod cost;
pub mod dynamics;
pub mod geom;
pub mod guiding;
pub mod road;
pub mod sim;
pub mod timing;
pub mod vehicle;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("no route to goal")]
    NoRoute,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geom(#[from] geom::GeomError),
}
