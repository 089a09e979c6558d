//! Scoring of collision-free candidates.

use serde::{Deserialize, Serialize};

use crate::collision::{CandidateControl, Forecast, NeighborType, TrajSample};
use crate::geom::Vec2;
use crate::guiding::GuidingArc;
use crate::road::{BehaviorOverride, LaneChangeDirection, LaneId, RoadId, RoadNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    pub w_vel: f64,
    pub w_drift: f64,
    pub w_prog: f64,
    pub w_accel: f64,
    pub w_yawr: f64,
    pub w_lane: f64,
    pub w_mdist: f64,
    pub w_prox: f64,
    pub c_vehicle: f64,
    pub c_cyclist: f64,
    pub c_pedestrian: f64,
    pub c_obstruction: f64,
    /// Floor on the distance in the maneuver term.
    pub epsilon: f64,
    /// Extra drift per squared meter a sample lies outside every lane.
    pub w_offroad: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            w_vel: 0.5,
            w_drift: 0.2,
            w_prog: 2.0,
            w_accel: 0.1,
            w_yawr: 0.3,
            w_lane: 1.0,
            w_mdist: 100.0,
            w_prox: 1.0,
            c_vehicle: 1.0,
            c_cyclist: 3.0,
            c_pedestrian: 5.0,
            c_obstruction: 1.0,
            epsilon: 0.5,
            w_offroad: 1.0,
        }
    }
}

impl CostWeights {
    pub fn type_weight(&self, kind: NeighborType) -> f64 {
        match kind {
            NeighborType::Vehicle => self.c_vehicle,
            NeighborType::Cyclist => self.c_cyclist,
            NeighborType::Pedestrian => self.c_pedestrian,
            NeighborType::Obstruction => self.c_obstruction,
        }
    }

    /// Weights with the behavior state's multipliers applied.
    pub fn with_override(&self, ov: &BehaviorOverride) -> Self {
        Self { w_drift: self.w_drift * ov.drift_scale, w_mdist: self.w_mdist * ov.mdist_scale, ..*self }
    }
}

/// Weighted contributions of each term; `total` is their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub vel: f64,
    pub drift: f64,
    pub prog: f64,
    pub accel: f64,
    pub yawr: f64,
    pub lane: f64,
    pub mdist: f64,
    pub prox: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn path(&self) -> f64 {
        self.vel + self.drift + self.prog
    }

    pub fn comfort(&self) -> f64 {
        self.accel + self.yawr
    }

    pub fn maneuver(&self) -> f64 {
        self.lane + self.mdist
    }
}

/// Upcoming road transition as seen by the cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverTarget {
    pub source_road: RoadId,
    pub source_lanes: Vec<LaneId>,
    pub point: Vec2,
}

/// Everything the cost needs besides the trajectory.
#[derive(Debug, Clone, Copy)]
pub struct CostContext<'a> {
    pub net: Option<&'a RoadNetwork>,
    /// Lanes considered when assigning samples to lanes.
    pub lanes: &'a [LaneId],
    /// Lane the ego is meant to be in; leaving it counts as a lane change.
    pub reference_lane: Option<LaneId>,
    pub maneuver: Option<&'a ManeuverTarget>,
    pub target_speed: f64,
    pub tau: f64,
    pub guide: &'a GuidingArc,
    pub forecasts: &'a [Forecast],
    pub weights: CostWeights,
}

/// Per-sample lane assignment and the lateral offset from it.
fn governing(ctx: &CostContext, s: &TrajSample) -> Option<(LaneId, f64)> {
    let net = ctx.net?;
    net.locate_in(ctx.lanes, s.position, s.heading).map(|(l, pr)| (l, pr.distance))
}

fn drift_fallback(ctx: &CostContext, p: Vec2) -> f64 {
    // Off every lane: distance to the closest candidate centerline.
    let Some(net) = ctx.net else { return 0.0 };
    ctx.lanes.iter().map(|&l| net.lanes[l].centerline.project(p).distance).fold(f64::INFINITY, f64::min).min(50.0)
}

/// Slack past the lane edge before the off-road term starts.
pub const OFFROAD_SLACK: f64 = 1.0;

/// Distance past the edge of the nearest candidate lane beyond
/// [`OFFROAD_SLACK`], zero inside any.
fn offroad_distance(ctx: &CostContext, p: Vec2) -> f64 {
    let Some(net) = ctx.net else { return 0.0 };
    let e = ctx
        .lanes
        .iter()
        .map(|&l| (net.lanes[l].centerline.project(p).distance - 0.5 * net.lanes[l].width - OFFROAD_SLACK).max(0.0))
        .fold(f64::INFINITY, f64::min);
    if e.is_finite() {
        e.min(50.0)
    } else {
        0.0
    }
}

fn lane_change_dir(ctx: &CostContext, lane: LaneId) -> Option<LaneChangeDirection> {
    let net = ctx.net?;
    let r = &net.lanes[ctx.reference_lane?];
    let l = &net.lanes[lane];
    if r.road.is_none() || l.road != r.road || l.index == r.index {
        return None;
    }
    Some(if l.index > r.index { LaneChangeDirection::Left } else { LaneChangeDirection::Right })
}

/// Displacement from tracking the guide at the target speed for the horizon.
pub fn target_displacement(ctx: &CostContext, origin: Vec2) -> Vec2 {
    let len = ctx.guide.geometry.length();
    ctx.guide.point_at((ctx.target_speed * ctx.tau).min(len)) - origin
}

/// Shortfall of the final displacement projected onto the target direction,
/// relative to the target displacement.
pub fn progress_cost(achieved: Vec2, target: Vec2) -> f64 {
    let n = target.norm();
    if n < 1e-9 {
        return 0.0;
    }
    let u = target * (1.0 / n);
    (target - u * achieved.dot(u)).norm() / n
}

/// Velocity, drift and progress terms, weighted.
pub fn path_cost(traj: &[TrajSample], ctx: &CostContext) -> (f64, f64, f64) {
    let w = &ctx.weights;
    let mut vel = 0.0;
    let mut drift = 0.0;
    let mut offroad = 0.0;
    for s in traj {
        vel += (ctx.target_speed - s.speed).powi(2);
        let d = governing(ctx, s).map_or_else(|| drift_fallback(ctx, s.position), |(_, d)| d);
        drift += d * d;
        offroad += offroad_distance(ctx, s.position).powi(2);
    }
    let origin = traj[0].position;
    let prog = progress_cost(traj[traj.len() - 1].position - origin, target_displacement(ctx, origin));
    (w.w_vel * vel, w.w_drift * drift + w.w_offroad * offroad, w.w_prog * prog)
}

/// Acceleration and yaw-rate magnitudes, weighted.
pub fn comfort_cost(traj: &[TrajSample], w: &CostWeights) -> (f64, f64) {
    let a: f64 = traj.iter().map(|s| s.accel.abs()).sum();
    let y: f64 = traj.iter().map(|s| s.yaw_rate.abs()).sum();
    (w.w_accel * a, w.w_yawr * y)
}

/// Lane-change indicator and inverse distance to the maneuver point while in
/// a lane that cannot make it, weighted. Also reports the direction of the
/// first lane change along the trajectory.
pub fn maneuver_cost(traj: &[TrajSample], ctx: &CostContext) -> (f64, f64, Option<LaneChangeDirection>) {
    let w = &ctx.weights;
    let mut lane = 0.0;
    let mut mdist = 0.0;
    let mut first = None;
    for s in traj {
        let Some((l, _)) = governing(ctx, s) else { continue };
        if let Some(dir) = lane_change_dir(ctx, l) {
            lane += 1.0;
            first.get_or_insert(dir);
        }
        if let (Some(m), Some(net)) = (ctx.maneuver, ctx.net) {
            if net.lanes[l].road == Some(m.source_road) && !m.source_lanes.contains(&l) {
                mdist += 1.0 / s.position.distance(m.point).max(w.epsilon);
            }
        }
    }
    (w.w_lane * lane, w.w_mdist * mdist, first)
}

/// Type-weighted exponential proximity to predicted neighbors, weighted.
pub fn proximity_cost(traj: &[TrajSample], ctx: &CostContext) -> f64 {
    let w = &ctx.weights;
    let mut sum = 0.0;
    for f in ctx.forecasts {
        let c = w.type_weight(f.neighbor.kind);
        for s in traj {
            let d = s.position.distance(f.pose_at(s.t).position);
            if d < 30.0 {
                sum += c * (-d).exp();
            }
        }
    }
    w.w_prox * sum
}

pub fn evaluate_cost(traj: &[TrajSample], ctx: &CostContext) -> (CostBreakdown, Option<LaneChangeDirection>) {
    let (vel, drift, prog) = path_cost(traj, ctx);
    let (accel, yawr) = comfort_cost(traj, &ctx.weights);
    let (lane, mdist, dir) = maneuver_cost(traj, ctx);
    let prox = proximity_cost(traj, ctx);
    let total = vel + drift + prog + accel + yawr + lane + mdist + prox;
    (CostBreakdown { vel, drift, prog, accel, yawr, lane, mdist, prox, total }, dir)
}

/// Index of the cheapest safe candidate. Ties go to the smaller steering
/// deviation from `φ′`, then the smaller speed deviation from `v′`.
pub fn select_best(cands: &[CandidateControl], v_target: f64, phi_target: f64) -> Option<usize> {
    cands
        .iter()
        .enumerate()
        .filter(|(_, c)| c.feasible && c.collision_free && c.cost.is_some())
        .min_by(|(_, a), (_, b)| {
            let key = |c: &CandidateControl| {
                (c.cost.unwrap(), (c.target_steering - phi_target).abs(), (c.target_speed - v_target).abs())
            };
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.total_cmp(&kb.2))
        })
        .map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CandidateSource;

    fn safe(v: f64, phi: f64, cost: f64) -> CandidateControl {
        CandidateControl {
            feasible: true,
            collision_free: true,
            cost: Some(cost),
            ..CandidateControl::new(v, phi, CandidateSource::Grid)
        }
    }

    #[test]
    fn progress_examples() {
        let t = Vec2::new(10.0, 0.0);
        assert_eq!(progress_cost(t, t), 0.0);
        assert!((progress_cost(Vec2::new(5.0, 3.0), t) - 0.5).abs() < 1e-12);
        assert_eq!(progress_cost(Vec2::new(5.0, 0.0), Vec2::ZERO), 0.0);
    }

    #[test]
    fn tie_break_order() {
        let c = vec![safe(10.0, 0.1, 1.0), safe(9.0, 0.0, 1.0), safe(10.0, 0.0, 1.0), safe(1.0, 0.0, 0.5)];
        assert_eq!(select_best(&c, 10.0, 0.0), Some(3));
        assert_eq!(select_best(&c[..3], 10.0, 0.0), Some(2));
        let mut unsafe_only = c.clone();
        unsafe_only.iter_mut().for_each(|c| c.collision_free = false);
        assert_eq!(select_best(&unsafe_only, 10.0, 0.0), None);
    }

    #[test]
    fn override_scales() {
        let w = CostWeights::default();
        let t = w.with_override(&BehaviorOverride::for_label(crate::road::BehaviorLabel::TurningRight));
        assert_eq!(t.w_drift, 4.0 * w.w_drift);
        assert_eq!(t.w_mdist, 4.0 * w.w_mdist);
        assert_eq!(t.w_vel, w.w_vel);
    }
}
