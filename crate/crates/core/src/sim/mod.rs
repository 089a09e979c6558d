//! Closed-loop simulation of the ego and scripted agents.

pub mod agent;
pub mod ego;
pub mod junction;
pub mod log;
pub mod pid;
pub mod scenario;
pub mod world;

pub use agent::{Agent, AgentSpec, LaneAction, LaneEvent, MotionSpec, Trigger};
pub use log::{Metrics, RunOutcome, TrajectoryLog, LOG_COLUMNS};
pub use pid::{PidController, PidGains, PidPair};
pub use scenario::{EgoSpec, LaneRef, PidConfig, Scenario, StartSpec, VehicleChoice, PHYSICS_DT};
pub use world::{scenario_profile, PlanTiming, World, WorldOptions, COST_DUMP_HEADER};

use crate::dynamics::DynamicsProfile;
use crate::Error;

/// Result of [`run_scenario`].
pub struct RunResult {
    pub log: TrajectoryLog,
    pub metrics: Metrics,
    pub cost_dump: String,
    pub timings: Vec<PlanTiming>,
}

/// Runs `scenario` to completion, collision or timeout.
pub fn run_scenario(scenario: &Scenario, profile: Option<DynamicsProfile>, options: WorldOptions) -> Result<RunResult, Error> {
    let mut world = World::new(scenario, profile, options)?;
    world.run();
    Ok(RunResult {
        metrics: world.metrics(),
        log: std::mem::take(&mut world.log),
        cost_dump: std::mem::take(&mut world.cost_dump),
        timings: std::mem::take(&mut world.timings),
    })
}
