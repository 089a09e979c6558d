//! Per-tick trajectory log (CSV) and run summary (JSON).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cost::CostBreakdown;
use crate::road::BehaviorLabel;

/// CSV column order. Plan wall time is kept out of the log so that logs
/// are byte-identical across runs; it is reported in [`Metrics`].
pub const LOG_COLUMNS: [&str; 30] = [
    "t",
    "x",
    "y",
    "heading",
    "speed",
    "steering",
    "throttle",
    "steer_input",
    "behavior",
    "lane",
    "target_speed",
    "target_steering",
    "guide_speed",
    "guide_steering",
    "tau",
    "emergency",
    "min_neighbor_dist",
    "cost_total",
    "cost_vel",
    "cost_drift",
    "cost_prog",
    "cost_accel",
    "cost_yawr",
    "cost_lane",
    "cost_mdist",
    "cost_prox",
    "candidates",
    "safe_candidates",
    "neighbors",
    "collision",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub steering: f64,
    pub throttle: f64,
    pub steer_input: f64,
    pub behavior: BehaviorLabel,
    /// Lane the ego is located in, `-1` when off the map.
    pub lane: i64,
    pub target_speed: f64,
    pub target_steering: f64,
    pub guide_speed: f64,
    pub guide_steering: f64,
    pub tau: f64,
    pub emergency: bool,
    pub min_neighbor_dist: f64,
    pub costs: CostBreakdown,
    pub candidates: usize,
    pub safe_candidates: usize,
    pub neighbors: usize,
    pub collision: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    pub rows: Vec<LogRow>,
}

fn num(out: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(out, "{v}");
    } else if v > 0.0 {
        out.push_str("inf");
    } else {
        out.push_str("nan");
    }
}

impl TrajectoryLog {
    pub fn to_csv(&self) -> String {
        let mut out = LOG_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let c = &r.costs;
            let floats = [r.t, r.x, r.y, r.heading, r.speed, r.steering, r.throttle, r.steer_input];
            for v in floats {
                num(&mut out, v);
                out.push(',');
            }
            let _ = write!(out, "{},{},", r.behavior.as_str(), r.lane);
            for v in [r.target_speed, r.target_steering, r.guide_speed, r.guide_steering, r.tau] {
                num(&mut out, v);
                out.push(',');
            }
            let _ = write!(out, "{},", r.emergency as u8);
            for v in [r.min_neighbor_dist, c.total, c.vel, c.drift, c.prog, c.accel, c.yawr, c.lane, c.mdist, c.prox] {
                num(&mut out, v);
                out.push(',');
            }
            let _ = writeln!(out, "{},{},{},{}", r.candidates, r.safe_candidates, r.neighbors, r.collision as u8);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneChangeRecord {
    pub t: f64,
    pub position: [f64; 2],
    pub from_lane: i64,
    pub to_lane: i64,
    pub direction: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub t: f64,
    pub position: [f64; 2],
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Completed,
    Collision,
    Timeout,
}

/// Sampling-soundness bookkeeping against the dense reference check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub checked: usize,
    pub false_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scenario: String,
    pub vehicle: String,
    pub seed: u64,
    pub outcome: RunOutcome,
    pub completed: bool,
    pub collisions: usize,
    pub collision_with: Option<String>,
    pub sim_time: f64,
    pub distance: f64,
    /// Smallest footprint distance to each neighbor type seen.
    pub min_clearance: BTreeMap<String, f64>,
    pub lane_changes: Vec<LaneChangeRecord>,
    pub stops: Vec<StopRecord>,
    pub plan_cycles: usize,
    pub emergency_cycles: usize,
    pub plan_time_mean_ms: f64,
    pub plan_time_max_ms: f64,
    pub behavior_timeline: Vec<(f64, BehaviorLabel)>,
    /// Lowest speed while the ego path curvature exceeds 1/60 m⁻¹.
    pub min_cornering_speed: Option<f64>,
    /// Cycles where the ego braked and steered away from the guide at once.
    pub brake_and_steer_cycles: usize,
    /// Largest gap between the executed and the planned position over one
    /// planning period.
    pub max_tracking_error: f64,
    pub max_abs_accel: f64,
    /// Largest amount by which the measured v̇ left the profile's
    /// acceleration or braking envelope at the current speed.
    pub max_envelope_excess: f64,
    pub reroutes: usize,
    pub soundness: Option<SoundnessReport>,
}

impl Metrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_row_width() {
        let row = LogRow {
            t: 0.0,
            x: 1.0,
            y: 2.0,
            heading: 0.0,
            speed: 0.0,
            steering: 0.0,
            throttle: 0.0,
            steer_input: 0.0,
            behavior: BehaviorLabel::DrivingStraight,
            lane: -1,
            target_speed: 0.0,
            target_steering: 0.0,
            guide_speed: 0.0,
            guide_steering: 0.0,
            tau: 4.0,
            emergency: false,
            min_neighbor_dist: f64::INFINITY,
            costs: CostBreakdown::default(),
            candidates: 0,
            safe_candidates: 0,
            neighbors: 0,
            collision: false,
        };
        let csv = TrajectoryLog { rows: vec![row] }.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0].split(',').count(), LOG_COLUMNS.len());
        assert_eq!(lines[1].split(',').count(), LOG_COLUMNS.len());
    }
}
