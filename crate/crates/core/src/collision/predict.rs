use serde::{Deserialize, Serialize};

use crate::geom::{wrap_angle, ConvexPolygon, Vec2};
use crate::road::{LaneId, LanePath, RoadNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborType {
    Vehicle,
    Pedestrian,
    Cyclist,
    Obstruction,
}

impl NeighborType {
    pub const ALL: [NeighborType; 4] =
        [NeighborType::Vehicle, NeighborType::Pedestrian, NeighborType::Cyclist, NeighborType::Obstruction];

    pub fn as_str(self) -> &'static str {
        match self {
            NeighborType::Vehicle => "vehicle",
            NeighborType::Pedestrian => "pedestrian",
            NeighborType::Cyclist => "cyclist",
            NeighborType::Obstruction => "obstruction",
        }
    }
}

/// What the ego observes about one neighbor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborState {
    pub id: usize,
    /// Body-frame footprint.
    pub shape: ConvexPolygon,
    pub position: Vec2,
    pub heading: f64,
    pub velocity: Vec2,
    pub lane: Option<LaneId>,
    pub accel: f64,
    pub turn_rate: f64,
    pub kind: NeighborType,
}

impl NeighborState {
    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn footprint(&self) -> ConvexPolygon {
        self.shape.transformed(self.position, self.heading)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedPose {
    pub position: Vec2,
    pub heading: f64,
}

/// Distance covered in `t` from speed `v` under constant `a`, never reversing.
pub fn travel_distance(v: f64, a: f64, t: f64) -> f64 {
    if a < 0.0 {
        let stop = v / -a;
        if t >= stop {
            return v * v / (-2.0 * a);
        }
    }
    (v * t + 0.5 * a * t * t).max(0.0)
}

/// Constant turn rate and acceleration motion from the origin pose.
pub fn ctra(position: Vec2, heading: f64, v: f64, a: f64, omega: f64, t: f64) -> PredictedPose {
    // Stop once speed reaches zero; the pose then stays put.
    let t = if a < 0.0 { t.min(v / -a) } else { t };
    if omega.abs() < 1e-9 {
        let d = v * t + 0.5 * a * t * t;
        return PredictedPose { position: position + Vec2::from_angle(heading) * d, heading };
    }
    let th = heading + omega * t;
    let vt = v + a * t;
    let w2 = omega * omega;
    let dx = (vt * omega * th.sin() + a * th.cos() - v * omega * heading.sin() - a * heading.cos()) / w2;
    let dy = (-vt * omega * th.cos() + a * th.sin() + v * omega * heading.cos() - a * heading.sin()) / w2;
    PredictedPose { position: position + Vec2::new(dx, dy), heading: th }
}

/// A neighbor's motion model, prepared once per planning cycle.
#[derive(Debug, Clone)]
pub struct Forecast {
    pub neighbor: NeighborState,
    path: Option<(LanePath, f64, f64)>,
    /// Radius of the footprint around the reference point.
    pub radius: f64,
}

impl Forecast {
    /// Lane-bound when the neighbor sits within half a lane width of its
    /// lane's centerline, laneless otherwise.
    pub fn new(n: &NeighborState, net: Option<&RoadNetwork>, horizon: f64) -> Self {
        let mut path = None;
        if let (Some(lane), Some(net)) = (n.lane, net) {
            let l = &net.lanes[lane];
            let pr = l.centerline.project(n.position);
            if pr.distance < 0.5 * l.width {
                let reach = travel_distance(n.speed(), n.accel, horizon) + 1.0;
                let p = LanePath::follow(net, None, lane, pr.arclength, reach);
                path = Some((p, pr.arclength, pr.lateral));
            }
        }
        Self { neighbor: n.clone(), path, radius: n.shape.circumradius() }
    }

    pub fn is_lane_bound(&self) -> bool {
        self.path.is_some()
    }

    pub fn pose_at(&self, t: f64) -> PredictedPose {
        let n = &self.neighbor;
        match &self.path {
            Some((path, s0, lateral)) => {
                let s = s0 + travel_distance(n.speed(), n.accel, t);
                let base = path.line.point_at(s);
                let heading = path.line.heading_at(s);
                // Keep the observed lateral offset and body-to-lane angle.
                let offset = Vec2::from_angle(heading).perp() * *lateral;
                let dh = wrap_angle(n.heading - path.line.heading_at(*s0));
                PredictedPose { position: base + offset, heading: heading + dh }
            }
            None => {
                let v = n.speed();
                let dir = if v > 1e-9 { n.velocity.angle() } else { n.heading };
                let p = ctra(n.position, dir, v, n.accel, n.turn_rate, t);
                PredictedPose { position: p.position, heading: n.heading + (p.heading - dir) }
            }
        }
    }

    pub fn footprint_at(&self, t: f64) -> ConvexPolygon {
        let p = self.pose_at(t);
        self.neighbor.shape.transformed(p.position, p.heading)
    }
}

/// Pose and footprint of `n` after `t` seconds.
pub fn predict_neighbor(n: &NeighborState, net: Option<&RoadNetwork>, t: f64) -> (Vec2, f64, ConvexPolygon) {
    let f = Forecast::new(n, net, t);
    let p = f.pose_at(t);
    (p.position, p.heading, n.shape.transformed(p.position, p.heading))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ped(velocity: Vec2, accel: f64, turn: f64) -> NeighborState {
        NeighborState {
            id: 0,
            shape: ConvexPolygon::rectangle(0.5, 0.5).unwrap(),
            position: Vec2::new(1.0, 2.0),
            heading: velocity.angle(),
            velocity,
            lane: None,
            accel,
            turn_rate: turn,
            kind: NeighborType::Pedestrian,
        }
    }

    #[test]
    fn straight_extrapolation() {
        let n = ped(Vec2::new(3.0, 4.0), 0.0, 0.0);
        let (p, _, _) = predict_neighbor(&n, None, 2.0);
        assert!(p.distance(Vec2::new(7.0, 10.0)) < 1e-12);
    }

    #[test]
    fn pedestrian_crossing() {
        let n = ped(Vec2::new(0.0, 1.5), 0.0, 0.0);
        let (p, _, _) = predict_neighbor(&n, None, 2.0);
        assert!((p.distance(n.position) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn half_turn_displaces_by_diameter() {
        let p = ctra(Vec2::ZERO, 0.0, 10.0, 0.0, 0.2, PI / 0.2);
        assert!(p.position.distance(Vec2::new(0.0, 100.0)) < 1e-9);
    }

    #[test]
    fn braking_stops() {
        assert!((travel_distance(10.0, -5.0, 10.0) - 10.0).abs() < 1e-12);
        let p = ctra(Vec2::ZERO, 0.0, 10.0, -5.0, 0.0, 10.0);
        assert!((p.position.x - 10.0).abs() < 1e-12);
    }
}
