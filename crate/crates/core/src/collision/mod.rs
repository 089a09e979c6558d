//! Candidate sampling, trajectory rollout and collision checking against
//! predicted neighbors.

mod candidates;
mod check;
mod planner;
mod predict;

pub use candidates::{generate_candidates, CandidateControl, CandidateRequest, CandidateSource, PlannerConfig, TrajSample};
pub use check::{check_trajectory, clearance_for, dense_collision_free, is_collision_free, rollout, CheckOutcome};
pub use planner::{plan, PlanInput, PlanOutcome, PlanStats};
pub use predict::{ctra, predict_neighbor, travel_distance, Forecast, NeighborState, NeighborType, PredictedPose};
