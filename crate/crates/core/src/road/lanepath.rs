use super::network::{LaneId, RoadNetwork};
use super::route::RoutePlan;
use crate::geom::{Polyline, Projection, Vec2};

/// A chain of consecutive lanes joined into one polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct LanePath {
    pub lanes: Vec<LaneId>,
    /// Arclength at which each lane starts.
    pub starts: Vec<f64>,
    pub line: Polyline,
    /// The chain ended at a dead end before reaching the requested length.
    pub truncated: bool,
}

impl LanePath {
    pub fn single(net: &RoadNetwork, lane: LaneId) -> Self {
        Self { lanes: vec![lane], starts: vec![0.0], line: net.lanes[lane].centerline.clone(), truncated: false }
    }

    /// Follows successors from `lane` until at least `min_length` meters of
    /// path exist past `from_s`. Route connectors are preferred; off-route
    /// the straight-through successor is taken.
    pub fn follow(net: &RoadNetwork, route: Option<&RoutePlan>, lane: LaneId, from_s: f64, min_length: f64) -> Self {
        let mut lanes = vec![lane];
        let mut starts = vec![0.0];
        let mut total = net.lanes[lane].length();
        let mut truncated = false;
        while total - from_s < min_length {
            let cur = *lanes.last().unwrap();
            let Some(next) = pick_successor(net, route, cur) else {
                truncated = true;
                break;
            };
            if lanes.contains(&next) || lanes.len() > 64 {
                break;
            }
            starts.push(total);
            total += net.lanes[next].length();
            lanes.push(next);
        }
        let mut pts: Vec<Vec2> = Vec::new();
        for &l in &lanes {
            pts.extend_from_slice(net.lanes[l].centerline.points());
        }
        let line = Polyline::new(pts).expect("lane centerlines are valid");
        // Recompute lane starts on the merged line (shared endpoints dedup).
        let mut acc = 0.0;
        for (i, &l) in lanes.iter().enumerate() {
            starts[i] = acc;
            acc += net.lanes[l].length();
        }
        Self { lanes, starts, line, truncated }
    }

    pub fn length(&self) -> f64 {
        self.line.length()
    }

    pub fn project(&self, p: Vec2) -> Projection {
        self.line.project(p)
    }

    /// Lane containing arclength `s` and the arclength within that lane.
    pub fn lane_at(&self, s: f64) -> (LaneId, f64) {
        let i = self.starts.iter().rposition(|&st| st <= s).unwrap_or(0);
        (self.lanes[i], s - self.starts[i])
    }
}

/// Successor taken from `lane`: the route connector, the only successor, the
/// straight-through connector, or the first successor.
pub fn pick_successor(net: &RoadNetwork, route: Option<&RoutePlan>, lane: LaneId) -> Option<LaneId> {
    let l = &net.lanes[lane];
    if l.successors.is_empty() {
        return None;
    }
    if let Some(r) = route {
        if let Some(c) = r.connector_from(net, lane) {
            return Some(c);
        }
    }
    if l.successors.len() == 1 {
        return Some(l.successors[0]);
    }
    let straight = l
        .successors
        .iter()
        .copied()
        .find(|&c| net.lanes[c].connector.as_ref().is_some_and(|i| i.kind == super::network::ManeuverKind::Straight));
    straight.or(Some(l.successors[0]))
}
