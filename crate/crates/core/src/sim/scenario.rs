//! Scenario file format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::agent::AgentSpec;
use super::pid::PidGains;
use crate::collision::PlannerConfig;
use crate::cost::CostWeights;
use crate::geom::Vec2;
use crate::road::{LanePosition, MapSpec, RoadNetwork};
use crate::vehicle::VehicleParams;
use crate::Error;

pub const PHYSICS_DT: f64 = 1.0 / 60.0;

/// A point on the map named by road id, lane index and arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneRef {
    pub road: String,
    #[serde(default)]
    pub lane: usize,
    #[serde(default)]
    pub s: f64,
}

impl LaneRef {
    pub fn new(road: &str, lane: usize, s: f64) -> Self {
        Self { road: road.into(), lane, s }
    }

    pub fn resolve(&self, net: &RoadNetwork) -> Result<LanePosition, Error> {
        let lane = net
            .road_lane(&self.road, self.lane)
            .ok_or_else(|| Error::Invalid(format!("no lane {} on road '{}'", self.lane, self.road)))?;
        let len = net.lanes[lane].length();
        if !(0.0..=len).contains(&self.s) {
            return Err(Error::Invalid(format!(
                "s = {} is outside lane {} of road '{}' (length {len:.1})",
                self.s, self.lane, self.road
            )));
        }
        Ok(LanePosition { lane, s: self.s })
    }
}

/// A vehicle preset by name or a full parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VehicleChoice {
    Preset(String),
    Custom(VehicleParams),
}

impl VehicleChoice {
    pub fn params(&self) -> Result<VehicleParams, Error> {
        match self {
            VehicleChoice::Preset(n) => {
                VehicleParams::preset(n).ok_or_else(|| Error::Invalid(format!("unknown vehicle preset '{n}'")))
            }
            VehicleChoice::Custom(p) => {
                p.validate()?;
                Ok(p.clone())
            }
        }
    }
}

impl Default for VehicleChoice {
    fn default() -> Self {
        VehicleChoice::Preset("hatchback".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Lane(LaneRef),
    Pose { position: Vec2, heading: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoSpec {
    #[serde(default)]
    pub vehicle: VehicleChoice,
    /// Plant preset profiled for the ego; defaults to the vehicle preset.
    #[serde(default)]
    pub plant: Option<String>,
    /// Overrides the plant's friction coefficient.
    #[serde(default)]
    pub friction: Option<f64>,
    pub start: StartSpec,
    #[serde(default)]
    pub speed: f64,
    /// Visited in order; the run completes at the last one.
    #[serde(default)]
    pub goals: Vec<LaneRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidConfig {
    pub speed: PidGains,
    pub steering: PidGains,
}

impl Default for PidConfig {
    fn default() -> Self {
        Self { speed: PidGains::speed(), steering: PidGains::steering() }
    }
}

fn default_dt() -> f64 {
    PHYSICS_DT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    /// Simulated seconds before the run counts as a timeout.
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub map: Option<MapSpec>,
    pub ego: EgoSpec,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub weights: CostWeights,
    #[serde(default)]
    pub pid: PidConfig,
}

impl Scenario {
    /// Parses JSON; errors carry the line and column of the problem.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, Error> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("{origin}:{}:{}: {}", e.line(), e.column(), strip_position(&e.to_string()))))?;
        s.validate().map_err(|e| Error::Invalid(format!("{origin}: {e}")))?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::Invalid(m));
        if !(self.duration > 0.0) {
            return bad("duration must be positive".into());
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive".into());
        }
        let ratio = self.planner.dt_plan / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 || ratio.round() < 1.0 {
            return bad(format!("dt {} must divide the planner period {}", self.dt, self.planner.dt_plan));
        }
        self.planner.validate()?;
        self.ego.vehicle.params()?;
        let mut ids = std::collections::BTreeSet::new();
        for a in &self.agents {
            if !ids.insert(&a.id) {
                return bad(format!("duplicate agent id '{}'", a.id));
            }
        }
        if self.map.is_none() && (matches!(self.ego.start, StartSpec::Lane(_)) || !self.ego.goals.is_empty()) {
            return bad("lane start and goals need a map".into());
        }
        Ok(())
    }

    /// Physics ticks per planning cycle.
    pub fn ticks_per_plan(&self) -> u64 {
        (self.planner.dt_plan / self.dt).round() as u64
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
