use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::road::{BehaviorOverride, LaneChangeDirection};
use crate::vehicle::VehicleParams;

/// Lateral reach (m) that bounds the speed-scaled steering span.
const LATERAL_REACH: f64 = 7.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Planning horizons tried in order until one yields a safe candidate.
    pub tau_schedule: Vec<f64>,
    /// Replanning period.
    pub dt_plan: f64,
    /// Trajectory samples per candidate, including `t = 0`.
    pub samples: usize,
    /// RK4 substeps between consecutive samples.
    pub substeps: usize,
    pub waypoints: usize,
    pub grid_speed: usize,
    pub grid_steer: usize,
    pub speed_span: f64,
    pub steer_span: f64,
    /// Shrink the steering span at speed so the widest candidate moves at
    /// most a couple of lanes sideways over the horizon.
    pub speed_scaled_steering: bool,
    pub prior_grid: usize,
    pub brake_row: bool,
    pub bisection_iters: usize,
    /// Minimum footprint clearance per neighbor type.
    pub clearance_vehicle: f64,
    pub clearance_pedestrian: f64,
    pub clearance_cyclist: f64,
    pub clearance_obstruction: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            tau_schedule: vec![4.0, 2.0, 1.0, 0.5],
            dt_plan: 0.1,
            samples: 20,
            substeps: 10,
            waypoints: 7,
            grid_speed: 9,
            grid_steer: 9,
            speed_span: 3.0,
            steer_span: 0.15,
            speed_scaled_steering: true,
            prior_grid: 3,
            brake_row: true,
            bisection_iters: 8,
            clearance_vehicle: 0.3,
            clearance_pedestrian: 2.2,
            clearance_cyclist: 1.2,
            clearance_obstruction: 0.3,
        }
    }
}

impl PlannerConfig {
    pub fn tau(&self) -> f64 {
        self.tau_schedule[0]
    }

    pub fn validate(&self) -> Result<(), crate::Error> {
        let bad = |m: &str| Err(crate::Error::Invalid(format!("planner: {m}")));
        if self.tau_schedule.is_empty() || self.tau_schedule.iter().any(|t| !(*t > 0.0)) {
            return bad("tau_schedule must be non-empty and positive");
        }
        if !(self.dt_plan > 0.0) {
            return bad("dt_plan must be positive");
        }
        if self.samples < 2 || self.substeps == 0 {
            return bad("samples must be at least 2 and substeps at least 1");
        }
        if self.waypoints < 3 || self.waypoints.is_multiple_of(2) {
            return bad("waypoints must be odd and at least 3");
        }
        if self.grid_speed == 0 || self.grid_steer == 0 {
            return bad("grid dimensions must be positive");
        }
        Ok(())
    }

    /// Steering half-span at speed `v` for horizon `tau`.
    pub fn steering_span(&self, params: &VehicleParams, v: f64, tau: f64) -> f64 {
        if !self.speed_scaled_steering {
            return self.steer_span;
        }
        let d = v.max(3.0) * tau;
        let scaled = (params.wheelbase() * 2.0 * LATERAL_REACH / (d * d)).atan();
        self.steer_span.min(scaled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Grid,
    Prior,
    LaneKeep,
    Brake,
    Emergency,
}

/// State of a candidate rollout at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajSample {
    pub t: f64,
    pub position: Vec2,
    pub heading: f64,
    pub speed: f64,
    pub steering: f64,
    pub accel: f64,
    pub yaw_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateControl {
    pub target_speed: f64,
    pub target_steering: f64,
    pub source: CandidateSource,
    pub feasible: bool,
    pub collision_free: bool,
    pub trajectory: Vec<TrajSample>,
    pub cost: Option<f64>,
    pub breakdown: Option<crate::cost::CostBreakdown>,
    pub lane_change: Option<LaneChangeDirection>,
}

impl CandidateControl {
    pub fn new(target_speed: f64, target_steering: f64, source: CandidateSource) -> Self {
        Self {
            target_speed,
            target_steering,
            source,
            feasible: false,
            collision_free: false,
            trajectory: Vec::new(),
            cost: None,
            breakdown: None,
            lane_change: None,
        }
    }
}

/// Inputs of one candidate-set generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateRequest {
    pub target_speed: f64,
    pub target_steering: f64,
    pub prior: Option<(f64, f64)>,
    pub lane_keep_speed: Option<f64>,
    /// Half-span of the steering grid before behavior scaling.
    pub steer_span: f64,
    /// Base speed and steering half-span of extra rows sampled when the
    /// previous choice lies below the grid, so that a slowed ego can still
    /// steer around a blockage.
    pub slow_rows: Option<(f64, f64)>,
    pub max_speed: f64,
    pub max_steering: f64,
    /// Sign of the active turn, if any.
    pub turn_sign: f64,
}

fn offsets(n: usize, half: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| half * (2.0 * i as f64 / (n - 1) as f64 - 1.0)).collect()
}

/// Grid around the guide's target, a finer grid around the previous choice,
/// the lane-keep candidate and an optional brake row. Duplicates after
/// clamping are dropped.
pub fn generate_candidates(req: &CandidateRequest, cfg: &PlannerConfig, ov: &BehaviorOverride) -> Vec<CandidateControl> {
    let span = req.steer_span * ov.steering_span_scale;
    let keep_side = |d: f64| !ov.steer_toward_turn_only || req.turn_sign == 0.0 || d * req.turn_sign >= -1e-12;
    let clamp_v = |v: f64| v.clamp(0.0, req.max_speed);
    let clamp_phi = |p: f64| p.clamp(-req.max_steering, req.max_steering);

    let mut out: Vec<CandidateControl> = Vec::new();
    let push = |v: f64, phi: f64, src: CandidateSource, out: &mut Vec<CandidateControl>| {
        let (v, phi) = (clamp_v(v), clamp_phi(phi));
        if out.iter().any(|c| (c.target_speed - v).abs() < 1e-9 && (c.target_steering - phi).abs() < 1e-9) {
            return;
        }
        out.push(CandidateControl::new(v, phi, src));
    };

    let dv = offsets(cfg.grid_speed, cfg.speed_span);
    let dphi: Vec<f64> = offsets(cfg.grid_steer, span).into_iter().filter(|d| keep_side(*d)).collect();
    for &a in &dv {
        for &b in &dphi {
            push(req.target_speed + a, req.target_steering + b, CandidateSource::Grid, &mut out);
        }
    }
    if let Some((pv, pphi)) = req.prior {
        if cfg.prior_grid > 0 {
            let hv = if cfg.grid_speed > 1 { cfg.speed_span / (cfg.grid_speed - 1) as f64 } else { cfg.speed_span };
            let hp = if cfg.grid_steer > 1 { span / (cfg.grid_steer - 1) as f64 } else { span };
            let n = cfg.prior_grid;
            let half = |h: f64| if n > 1 { h * (n - 1) as f64 / 2.0 } else { 0.0 };
            for a in offsets(n, half(hv)) {
                for b in offsets(n, half(hp)) {
                    push(pv + a, pphi + b, CandidateSource::Prior, &mut out);
                }
            }
        }
    }
    if let Some((base, slow_span)) = req.slow_rows {
        let hv = if cfg.grid_speed > 1 { cfg.speed_span / (cfg.grid_speed - 1) as f64 } else { cfg.speed_span };
        let offs: Vec<f64> =
            offsets(cfg.grid_steer, slow_span * ov.steering_span_scale).into_iter().filter(|d| keep_side(*d)).collect();
        for k in 0..3 {
            for &b in &offs {
                push(base + k as f64 * hv, req.target_steering + b, CandidateSource::Prior, &mut out);
            }
        }
    }
    if let Some(v) = req.lane_keep_speed {
        push(v, req.target_steering, CandidateSource::LaneKeep, &mut out);
    }
    if cfg.brake_row {
        for &b in &dphi {
            push(0.0, req.target_steering + b, CandidateSource::Brake, &mut out);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req() -> CandidateRequest {
        CandidateRequest {
            target_speed: 10.0,
            target_steering: 0.0,
            prior: Some((20.0, 0.3)),
            lane_keep_speed: Some(7.77),
            steer_span: 0.15,
            slow_rows: None,
            max_speed: 50.0,
            max_steering: 0.6,
            turn_sign: 0.0,
        }
    }

    #[test]
    fn counts_disjoint_sets() {
        let cfg = PlannerConfig { brake_row: false, ..Default::default() };
        let c = generate_candidates(&req(), &cfg, &BehaviorOverride::default());
        assert_eq!(c.len(), 81 + 9 + 1);
        let mut cfg = cfg;
        cfg.brake_row = true;
        let c = generate_candidates(&req(), &cfg, &BehaviorOverride::default());
        assert_eq!(c.len(), 81 + 9 + 1 + 9);
    }

    #[test]
    fn grid_spans() {
        let cfg = PlannerConfig { brake_row: false, ..Default::default() };
        let mut r = req();
        r.prior = None;
        r.lane_keep_speed = None;
        let c = generate_candidates(&r, &cfg, &BehaviorOverride::default());
        let max_dv = c.iter().map(|c| (c.target_speed - 10.0).abs()).fold(0.0, f64::max);
        let max_dphi = c.iter().map(|c| c.target_steering.abs()).fold(0.0, f64::max);
        assert!((max_dv - 3.0).abs() < 1e-12);
        assert!((max_dphi - 0.15).abs() < 1e-12);
        let turning = BehaviorOverride {
            steer_toward_turn_only: false,
            ..BehaviorOverride::for_label(crate::road::BehaviorLabel::TurningLeft)
        };
        let c = generate_candidates(&r, &cfg, &turning);
        let half = c.iter().map(|c| c.target_steering.abs()).fold(0.0, f64::max);
        assert!((half - 0.075).abs() < 1e-12);
    }

    #[test]
    fn clamped_duplicates_removed() {
        let cfg = PlannerConfig::default();
        let mut r = req();
        r.target_speed = 0.0;
        r.prior = None;
        r.lane_keep_speed = None;
        let c = generate_candidates(&r, &cfg, &BehaviorOverride::default());
        assert!(c.iter().all(|c| c.target_speed >= 0.0));
        assert_eq!(c.len(), 5 * 9);
    }

    #[test]
    fn slow_rows_use_their_own_span() {
        let cfg = PlannerConfig { brake_row: false, prior_grid: 0, ..Default::default() };
        let mut r = req();
        r.prior = None;
        r.lane_keep_speed = None;
        r.steer_span = 0.01;
        r.slow_rows = Some((1.0, 0.2));
        let c = generate_candidates(&r, &cfg, &BehaviorOverride::default());
        assert_eq!(c.len(), 81 + 27);
        let slow: Vec<_> = c.iter().filter(|c| c.source == CandidateSource::Prior).collect();
        assert!(slow.iter().all(|c| c.target_speed <= 2.5));
        assert!((slow.iter().map(|c| c.target_steering).fold(0.0, f64::max) - 0.2).abs() < 1e-12);
    }
}
