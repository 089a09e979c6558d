//! Guiding arcs from lane waypoints, and traffic-rule shaping of the target
//! speed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsProfile;
use crate::geom::{circle_through, ArcOrLine, GeomError, TurnDirection, Vec2};
use crate::road::{LanePath, RoadNetwork, SignalColor};
use crate::vehicle::{arc_steering, VehicleParams};
use crate::Error;

/// Comfortable deceleration used to slow ahead of curves and speed limits.
pub const COMFORT_DECEL: f64 = 2.5;
/// Deceleration the ego must be able to use to stop for an amber light.
pub const AMBER_STOP_DECEL: f64 = 4.0;
/// Below this distance the stop-point target speed snaps to zero.
pub const STOP_SNAP_DISTANCE: f64 = 0.5;
/// Floor on the intended speed used to space waypoints.
pub const MIN_WAYPOINT_SPEED: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointSet {
    pub points: Vec<Vec2>,
    pub horizon: f64,
    /// The lane chain ended before the horizon; trailing points sit at its end.
    pub truncated: bool,
}

impl WaypointSet {
    /// The median waypoint `w_{(k+1)/2}`.
    pub fn median(&self) -> Vec2 {
        self.points[self.points.len().div_ceil(2) - 1]
    }

    pub fn last(&self) -> Vec2 {
        *self.points.last().unwrap()
    }
}

/// `k` waypoints spaced `τ·speed/k` apart along `path`, starting ahead of
/// the closest path point to `p`.
pub fn sample_waypoints(path: &LanePath, p: Vec2, tau: f64, k: usize, intended_speed: f64) -> Result<WaypointSet, Error> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::Invalid(format!("waypoint count must be odd and at least 3, got {k}")));
    }
    let s0 = path.project(p).arclength.max(0.0);
    let reach = tau * intended_speed.max(MIN_WAYPOINT_SPEED);
    let end = path.length();
    let mut truncated = path.truncated && s0 + reach > end;
    let points = (1..=k)
        .map(|i| {
            let s = s0 + reach * i as f64 / k as f64;
            if s > end {
                truncated = true;
            }
            path.line.point_at(s.min(end))
        })
        .collect();
    Ok(WaypointSet { points, horizon: tau, truncated })
}

/// Linear blend from the departure lane waypoints to the destination lane:
/// `w_i = (1 - α_i) w_i^from + α_i w_i^to`, default `α_i = i/k`.
pub fn blend_waypoints(from: &WaypointSet, to: &WaypointSet, alphas: Option<&[f64]>) -> Result<WaypointSet, Error> {
    let k = from.points.len();
    if to.points.len() != k {
        return Err(Error::Invalid("waypoint sets differ in length".into()));
    }
    let default: Vec<f64> = (1..=k).map(|i| i as f64 / k as f64).collect();
    let alphas = alphas.unwrap_or(&default);
    if alphas.len() != k {
        return Err(Error::Invalid("blend weights must match the waypoint count".into()));
    }
    Ok(WaypointSet {
        points: from.points.iter().zip(&to.points).zip(alphas).map(|((a, b), &t)| a.lerp(*b, t)).collect(),
        horizon: from.horizon,
        truncated: from.truncated || to.truncated,
    })
}

/// Waypoints for a lane change from the first lane of `from` to the
/// adjacent first lane of `to`.
#[allow(clippy::too_many_arguments)]
pub fn blend_lane_change_waypoints(
    net: &RoadNetwork,
    from: &LanePath,
    to: &LanePath,
    p: Vec2,
    tau: f64,
    k: usize,
    intended_speed: f64,
    alphas: Option<&[f64]>,
) -> Result<WaypointSet, Error> {
    let (a, b) = (from.lanes[0], to.lanes[0]);
    let la = &net.lanes[a];
    if la.left != Some(b) && la.right != Some(b) {
        return Err(Error::Invalid(format!("lanes {a} and {b} are not adjacent")));
    }
    let wf = sample_waypoints(from, p, tau, k, intended_speed)?;
    let wt = sample_waypoints(to, p, tau, k, intended_speed)?;
    blend_waypoints(&wf, &wt, alphas)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidingArc {
    pub geometry: ArcOrLine,
    pub target_speed: f64,
    pub target_steering: f64,
    pub reflected: bool,
}

impl GuidingArc {
    /// Point reached after `s` meters along the guide.
    pub fn point_at(&self, s: f64) -> Vec2 {
        match self.geometry {
            ArcOrLine::Line { start, end } if start.distance(end) < 1e-9 => start,
            g => g.point_at(s),
        }
    }
}

/// Reflection of `q` about the line through `a` and `b`.
fn reflect(q: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let d = (b - a).normalized();
    let rel = q - a;
    let along = d * rel.dot(d);
    a + along * 2.0 - rel
}

/// An arc is usable when it sweeps at most a half circle and leaves `p`
/// heading forward, i.e. it stays in the two forward quadrants of the
/// vehicle frame.
pub fn arc_within_forward_quadrants(g: &ArcOrLine, heading: f64) -> bool {
    match g {
        ArcOrLine::Line { .. } => true,
        ArcOrLine::Arc { .. } => g.central_angle() <= PI && g.start_tangent().dot(Vec2::from_angle(heading)) >= 0.0,
    }
}

/// Circle through `p`, the median waypoint and the final waypoint. When the
/// arc leaves the forward quadrants the median point is reflected about the
/// `p`-`w_k` axis; if that also fails the guide falls back to the chord.
pub fn compute_guiding_arc(
    p: Vec2,
    heading: f64,
    wp: &WaypointSet,
    params: &VehicleParams,
    profile: &DynamicsProfile,
    speed_limit: f64,
) -> GuidingArc {
    let (mid, end) = (wp.median(), wp.last());
    let through = |m: Vec2| match circle_through(p, m, end) {
        Ok(g) => g,
        Err(GeomError::DuplicatePoints) | Err(_) => ArcOrLine::Line { start: p, end },
    };
    let mut geometry = through(mid);
    let mut reflected = false;
    if !arc_within_forward_quadrants(&geometry, heading) {
        reflected = true;
        geometry = through(reflect(mid, p, end));
        if !arc_within_forward_quadrants(&geometry, heading) {
            geometry = ArcOrLine::Line { start: p, end };
        }
    }
    let (steer, curve_speed) = match geometry {
        ArcOrLine::Arc { radius, direction, .. } => (arc_steering(radius, direction, params), profile.max_safe_speed(radius)),
        ArcOrLine::Line { .. } => (arc_steering(f64::INFINITY, TurnDirection::Straight, params), profile.max_speed),
    };
    GuidingArc { geometry, target_speed: speed_limit.min(curve_speed).max(0.0), target_steering: steer, reflected }
}

/// Highest speed from which the ego can slow at [`COMFORT_DECEL`] to meet
/// every speed limit and curve-speed limit within `lookahead` meters.
pub fn lookahead_speed_cap(net: &RoadNetwork, path: &LanePath, from_s: f64, lookahead: f64, profile: &DynamicsProfile) -> f64 {
    let mut cap = f64::INFINITY;
    let step = 2.0;
    let n = (lookahead / step).ceil() as usize;
    for i in 0..=n {
        let d = i as f64 * step;
        let s = from_s + d;
        if s > path.length() {
            break;
        }
        let (lane, _) = path.lane_at(s);
        let curvature = path.line.curvature_at(s, 4.0);
        let mut v = net.lanes[lane].speed_limit;
        if curvature > 1e-4 {
            v = v.min(profile.max_safe_speed(1.0 / curvature));
        }
        cap = cap.min((v * v + 2.0 * COMFORT_DECEL * d).sqrt());
    }
    cap
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproachControl {
    Stoplight,
    AllWayStop,
    Yield,
}

/// What the sensing oracle reports about the next controlled junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionApproach {
    pub control: ApproachControl,
    pub stop_point: Vec2,
    /// Path distance from the ego to the stop point.
    pub distance: f64,
    pub signal: Option<SignalColor>,
    /// Position in the all-way-stop arrival queue, 0 at the head; `None`
    /// until the ego has stopped at the line.
    pub queue_position: Option<usize>,
    /// Another vehicle is inside the junction box.
    pub box_occupied: bool,
    /// The ego's path through the junction is free of crossing traffic.
    pub cross_traffic_clear: bool,
    /// The ego must give way here (yield roads and unprotected left turns).
    pub must_yield: bool,
}

fn approach_speed(distance: f64, tau: f64) -> f64 {
    if distance < STOP_SNAP_DISTANCE {
        0.0
    } else {
        distance / tau
    }
}

/// Caps `v_target` so the ego stops at the stop point whenever the junction
/// control requires it.
pub fn apply_traffic_rules(v_target: f64, approach: &IntersectionApproach, speed: f64, tau: f64) -> f64 {
    let stop = v_target.min(approach_speed(approach.distance.max(0.0), tau));
    let yield_hold = approach.must_yield && !approach.cross_traffic_clear;
    match approach.control {
        ApproachControl::Stoplight => match approach.signal {
            Some(SignalColor::Red) => stop,
            Some(SignalColor::Amber) => {
                // Past the point of a comfortable stop, clear the junction.
                let needed = speed * speed / (2.0 * AMBER_STOP_DECEL);
                if approach.distance > needed || yield_hold {
                    stop
                } else {
                    v_target
                }
            }
            _ if yield_hold => stop,
            _ => v_target,
        },
        ApproachControl::AllWayStop => {
            if approach.queue_position == Some(0) && !approach.box_occupied && !yield_hold {
                v_target
            } else {
                stop
            }
        }
        ApproachControl::Yield => {
            if yield_hold {
                stop
            } else {
                v_target
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_profile, PlantModel};
    use crate::geom::Polyline;

    fn profile() -> DynamicsProfile {
        build_profile(&PlantModel::hatchback(), &VehicleParams::hatchback()).unwrap().0
    }

    fn straight_path() -> LanePath {
        LanePath {
            lanes: vec![0],
            starts: vec![0.0],
            line: Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(500.0, 0.0)]).unwrap(),
            truncated: false,
        }
    }

    #[test]
    fn arithmetic_spacing() {
        let w = sample_waypoints(&straight_path(), Vec2::ZERO, 3.0, 7, 10.0).unwrap();
        for (i, p) in w.points.iter().enumerate() {
            assert!((p.x - 30.0 / 7.0 * (i + 1) as f64).abs() < 1e-9);
        }
        assert!(sample_waypoints(&straight_path(), Vec2::ZERO, 3.0, 6, 10.0).is_err());
    }

    #[test]
    fn circular_lane_waypoints_on_circle() {
        let line = Polyline::arc(Vec2::ZERO, 50.0, -PI / 2.0, PI, 0.05).unwrap();
        let path = LanePath { lanes: vec![0], starts: vec![0.0], line, truncated: false };
        let w = sample_waypoints(&path, Vec2::new(0.0, -50.0), 4.0, 7, 10.0).unwrap();
        for p in &w.points {
            assert!((p.norm() - 50.0).abs() < 1e-3);
        }
    }

    #[test]
    fn centerline_gives_line() {
        let params = VehicleParams::hatchback();
        let w = sample_waypoints(&straight_path(), Vec2::ZERO, 4.0, 7, 10.0).unwrap();
        let g = compute_guiding_arc(Vec2::ZERO, 0.0, &w, &params, &profile(), 13.0);
        assert!(matches!(g.geometry, ArcOrLine::Line { .. }));
        assert_eq!(g.target_steering, 0.0);
        assert_eq!(g.target_speed, 13.0);
    }

    #[test]
    fn reflection_engages_on_backward_tangent() {
        let params = VehicleParams::hatchback();
        let end = Vec2::new(10.0, 8.0);
        let wp = |mid: Vec2| WaypointSet {
            points: vec![Vec2::ZERO, Vec2::ZERO, Vec2::ZERO, mid, Vec2::ZERO, Vec2::ZERO, end],
            horizon: 4.0,
            truncated: false,
        };
        // Inscribed-angle oracle: the arc through m sweeps 2(π - ∠p m end),
        // leaving p at half that angle off the chord.
        let oracle = |m: Vec2| {
            let (a, b) = (Vec2::ZERO - m, end - m);
            let inscribed = (a.dot(b) / (a.norm() * b.norm())).acos();
            let sweep = 2.0 * (PI - inscribed);
            let side = if end.cross(m) > 0.0 { 1.0 } else { -1.0 };
            let tangent = end.angle() + side * sweep / 2.0;
            sweep <= PI && tangent.cos() >= 0.0
        };
        let ok_mid = Vec2::new(6.0, 3.9);
        assert!(oracle(ok_mid));
        let g = compute_guiding_arc(Vec2::ZERO, 0.0, &wp(ok_mid), &params, &profile(), 20.0);
        assert!(!g.reflected);

        let bad_mid = Vec2::new(2.2, 7.5);
        assert!(!oracle(bad_mid));
        let g = compute_guiding_arc(Vec2::ZERO, 0.0, &wp(bad_mid), &params, &profile(), 20.0);
        assert!(g.reflected);
        assert!(arc_within_forward_quadrants(&g.geometry, 0.0));
        assert!(matches!(g.geometry, ArcOrLine::Arc { .. }));
        assert_eq!(g.geometry.start(), Vec2::ZERO);
        assert_eq!(g.geometry.end(), end);
    }

    #[test]
    fn red_light_recurrence() {
        let mut a = IntersectionApproach {
            control: ApproachControl::Stoplight,
            stop_point: Vec2::new(20.0, 0.0),
            distance: 20.0,
            signal: Some(SignalColor::Red),
            queue_position: None,
            box_occupied: false,
            cross_traffic_clear: true,
            must_yield: false,
        };
        assert!((apply_traffic_rules(15.0, &a, 10.0, 4.0) - 5.0).abs() < 1e-12);
        a.distance = 0.3;
        assert_eq!(apply_traffic_rules(15.0, &a, 0.1, 4.0), 0.0);
        a.signal = Some(SignalColor::Green);
        assert_eq!(apply_traffic_rules(15.0, &a, 0.1, 4.0), 15.0);
    }

    #[test]
    fn all_way_stop_queue() {
        let mut a = IntersectionApproach {
            control: ApproachControl::AllWayStop,
            stop_point: Vec2::ZERO,
            distance: 0.2,
            signal: None,
            queue_position: Some(1),
            box_occupied: false,
            cross_traffic_clear: true,
            must_yield: false,
        };
        assert_eq!(apply_traffic_rules(10.0, &a, 0.0, 4.0), 0.0);
        a.queue_position = Some(0);
        assert_eq!(apply_traffic_rules(10.0, &a, 0.0, 4.0), 10.0);
        a.box_occupied = true;
        assert_eq!(apply_traffic_rules(10.0, &a, 0.0, 4.0), 0.0);
    }
}
