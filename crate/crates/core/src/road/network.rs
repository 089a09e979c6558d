use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::{wrap_angle, Polyline, Projection, Vec2};
use crate::Error;

pub type NodeId = usize;
pub type RoadId = usize;
pub type LaneId = usize;

/// Heading change below which a junction transition counts as straight.
pub const STRAIGHT_THRESHOLD_DEG: f64 = 15.0;
/// Heading change above which a transition is a U-turn and gets no connector.
const U_TURN_DEG: f64 = 165.0;
const CONNECTOR_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverKind {
    LeftTurn,
    RightTurn,
    Merge,
    Straight,
}

impl ManeuverKind {
    pub fn classify(heading_change: f64) -> Self {
        let a = wrap_angle(heading_change);
        if a.abs() < STRAIGHT_THRESHOLD_DEG.to_radians() {
            ManeuverKind::Straight
        } else if a > 0.0 {
            ManeuverKind::LeftTurn
        } else {
            ManeuverKind::RightTurn
        }
    }

    pub fn is_turn(self) -> bool {
        matches!(self, ManeuverKind::LeftTurn | ManeuverKind::RightTurn)
    }
}

// ---- map file format ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub nodes: Vec<NodeSpec>,
    pub roads: Vec<RoadSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub position: Vec2,
    #[serde(default)]
    pub control: ControlSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControlSpec {
    #[default]
    None,
    Stoplight {
        phases: Vec<PhaseSpec>,
        #[serde(default)]
        offset: f64,
    },
    AllWayStop,
    /// Roads listed in `priority` pass freely; all others yield.
    Yield {
        #[serde(default)]
        priority: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    /// Incoming road ids that get a green light in this phase.
    pub green: Vec<String>,
    pub duration: f64,
    #[serde(default = "default_amber")]
    pub amber: f64,
}

fn default_amber() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Reference line in the direction of travel.
    pub centerline: Vec<Vec2>,
    pub lanes: Vec<LaneSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneSpec {
    /// Lateral offset from the reference line, positive to the left.
    pub offset: f64,
    pub width: f64,
    pub speed_limit: f64,
}

// ---- built network ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalColor {
    Green,
    Amber,
    Red,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalPhase {
    pub green: Vec<RoadId>,
    pub duration: f64,
    pub amber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntersectionControl {
    None,
    Stoplight { phases: Vec<SignalPhase>, offset: f64 },
    AllWayStop,
    Yield { priority: Vec<RoadId> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub position: Vec2,
    pub control: IntersectionControl,
    /// Radius of the junction box around `position`.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Road {
    pub id: RoadId,
    pub name: String,
    pub from: NodeId,
    pub to: NodeId,
    pub reference: Polyline,
    /// Lane ids ordered from rightmost (index 0) to leftmost.
    pub lanes: Vec<LaneId>,
}

impl Road {
    pub fn length(&self) -> f64 {
        self.reference.length()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectorInfo {
    pub node: NodeId,
    pub from_road: RoadId,
    pub to_road: RoadId,
    pub from_lane: LaneId,
    pub to_lane: LaneId,
    pub kind: ManeuverKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub id: LaneId,
    /// Owning road; `None` for junction connectors.
    pub road: Option<RoadId>,
    /// Position within the road, 0 = rightmost.
    pub index: usize,
    pub centerline: Polyline,
    pub width: f64,
    pub speed_limit: f64,
    pub left: Option<LaneId>,
    pub right: Option<LaneId>,
    pub successors: Vec<LaneId>,
    pub predecessors: Vec<LaneId>,
    pub connector: Option<ConnectorInfo>,
    bound_center: Vec2,
    bound_radius: f64,
}

impl Lane {
    pub fn length(&self) -> f64 {
        self.centerline.length()
    }

    pub fn is_connector(&self) -> bool {
        self.connector.is_some()
    }

    /// Distance from `p` to the lane's bounding circle (0 inside).
    pub fn bound_distance(&self, p: Vec2) -> f64 {
        (p.distance(self.bound_center) - self.bound_radius).max(0.0)
    }
}

/// Closest point on the lane centerline and its arclength.
pub fn closest_lane_point(lane: &Lane, p: Vec2) -> (Vec2, f64) {
    let pr = lane.centerline.project(p);
    (pr.point, pr.arclength)
}

/// A point addressed by lane and arclength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanePosition {
    pub lane: LaneId,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    pub nodes: Vec<Node>,
    pub roads: Vec<Road>,
    pub lanes: Vec<Lane>,
    road_names: BTreeMap<String, RoadId>,
    node_names: BTreeMap<String, NodeId>,
}

impl RoadNetwork {
    pub fn from_spec(spec: &MapSpec) -> Result<Self, Error> {
        let invalid = |m: String| Err(Error::Invalid(m));
        let mut node_names = BTreeMap::new();
        for (i, n) in spec.nodes.iter().enumerate() {
            if !n.position.is_finite() {
                return invalid(format!("node {}: non-finite position", n.id));
            }
            if node_names.insert(n.id.clone(), i).is_some() {
                return invalid(format!("node {}: duplicate id", n.id));
            }
        }
        let mut road_names = BTreeMap::new();
        for (i, r) in spec.roads.iter().enumerate() {
            if road_names.insert(r.id.clone(), i).is_some() {
                return invalid(format!("road {}: duplicate id", r.id));
            }
        }

        let mut roads = Vec::new();
        let mut lanes: Vec<Lane> = Vec::new();
        for (rid, r) in spec.roads.iter().enumerate() {
            let node = |name: &str| {
                node_names.get(name).copied().ok_or_else(|| Error::Invalid(format!("road {}: unknown node {name}", r.id)))
            };
            let (from, to) = (node(&r.from)?, node(&r.to)?);
            let reference =
                Polyline::new(r.centerline.clone()).map_err(|e| Error::Invalid(format!("road {}: centerline: {e}", r.id)))?;
            if r.lanes.is_empty() {
                return invalid(format!("road {}: needs at least one lane", r.id));
            }
            let mut specs = r.lanes.clone();
            specs.sort_by(|a, b| a.offset.partial_cmp(&b.offset).unwrap_or(std::cmp::Ordering::Equal));
            for w in specs.windows(2) {
                if w[1].offset - w[0].offset < 0.5 * (w[0].width + w[1].width) - 1e-6 {
                    return invalid(format!("road {}: lanes overlap", r.id));
                }
            }
            let mut ids = Vec::new();
            for (index, ls) in specs.iter().enumerate() {
                if !(ls.width > 0.0 && ls.speed_limit > 0.0) {
                    return invalid(format!("road {}: lane width and speed limit must be positive", r.id));
                }
                let centerline = if ls.offset == 0.0 {
                    reference.clone()
                } else {
                    reference.offset(ls.offset).map_err(|e| Error::Invalid(format!("road {}: lane offset: {e}", r.id)))?
                };
                let id = lanes.len();
                ids.push(id);
                lanes.push(Lane::new(id, Some(rid), index, centerline, ls.width, ls.speed_limit, None));
            }
            for (k, &id) in ids.iter().enumerate() {
                lanes[id].right = if k > 0 { Some(ids[k - 1]) } else { None };
                lanes[id].left = ids.get(k + 1).copied();
            }
            roads.push(Road { id: rid, name: r.id.clone(), from, to, reference, lanes: ids });
        }

        let mut nodes = Vec::new();
        for (nid, n) in spec.nodes.iter().enumerate() {
            let road_id = |name: &String| {
                road_names.get(name).copied().ok_or_else(|| Error::Invalid(format!("node {}: unknown road {name}", n.id)))
            };
            let control = match &n.control {
                ControlSpec::None => IntersectionControl::None,
                ControlSpec::AllWayStop => IntersectionControl::AllWayStop,
                ControlSpec::Yield { priority } => {
                    IntersectionControl::Yield { priority: priority.iter().map(road_id).collect::<Result<_, _>>()? }
                }
                ControlSpec::Stoplight { phases, offset } => {
                    if phases.is_empty() {
                        return invalid(format!("node {}: stoplight needs phases", n.id));
                    }
                    let mut out = Vec::new();
                    for ph in phases {
                        if !(ph.duration > 0.0 && ph.amber >= 0.0 && ph.amber < ph.duration) {
                            return invalid(format!("node {}: phase durations must satisfy 0 <= amber < duration", n.id));
                        }
                        out.push(SignalPhase {
                            green: ph.green.iter().map(road_id).collect::<Result<_, _>>()?,
                            duration: ph.duration,
                            amber: ph.amber,
                        });
                    }
                    IntersectionControl::Stoplight { phases: out, offset: *offset }
                }
            };
            let mut radius: f64 = 0.0;
            for road in &roads {
                for &l in &road.lanes {
                    if road.to == nid {
                        radius = radius.max(lanes[l].centerline.end().distance(n.position));
                    }
                    if road.from == nid {
                        radius = radius.max(lanes[l].centerline.start().distance(n.position));
                    }
                }
            }
            nodes.push(Node { id: nid, name: n.id.clone(), position: n.position, control, radius });
        }

        let mut net = RoadNetwork { nodes, roads, lanes, road_names, node_names };
        net.build_connectors()?;
        Ok(net)
    }

    fn build_connectors(&mut self) -> Result<(), Error> {
        for n in 0..self.nodes.len() {
            let incoming: Vec<RoadId> = self.roads.iter().filter(|r| r.to == n).map(|r| r.id).collect();
            let outgoing: Vec<RoadId> = self.roads.iter().filter(|r| r.from == n).map(|r| r.id).collect();
            for &ri in &incoming {
                for &ro in &outgoing {
                    let h_in = self.roads[ri].reference.heading_at(self.roads[ri].length());
                    let h_out = self.roads[ro].reference.heading_at(0.0);
                    let change = wrap_angle(h_out - h_in);
                    if change.abs() > U_TURN_DEG.to_radians() {
                        continue;
                    }
                    let kind = ManeuverKind::classify(change);
                    let (li, lo) = (self.roads[ri].lanes.clone(), self.roads[ro].lanes.clone());
                    let pairs: Vec<(LaneId, LaneId, ManeuverKind)> = match kind {
                        ManeuverKind::RightTurn => vec![(li[0], lo[0], kind)],
                        ManeuverKind::LeftTurn => vec![(*li.last().unwrap(), *lo.last().unwrap(), kind)],
                        _ => li
                            .iter()
                            .enumerate()
                            .map(|(k, &a)| {
                                if k < lo.len() {
                                    (a, lo[k], ManeuverKind::Straight)
                                } else {
                                    (a, *lo.last().unwrap(), ManeuverKind::Merge)
                                }
                            })
                            .collect(),
                    };
                    for (a, b, kind) in pairs {
                        let p0 = self.lanes[a].centerline.end();
                        let p2 = self.lanes[b].centerline.start();
                        let t0 = self.lanes[a].centerline.tangent_at(self.lanes[a].length());
                        let t2 = self.lanes[b].centerline.tangent_at(0.0);
                        let control = tangent_intersection(p0, t0, p2, t2).unwrap_or(p0.lerp(p2, 0.5));
                        let centerline = Polyline::bezier(p0, control, p2, CONNECTOR_SAMPLES)
                            .map_err(|e| Error::Invalid(format!("connector at node {}: {e}", self.nodes[n].name)))?;
                        let id = self.lanes.len();
                        let width = self.lanes[a].width.min(self.lanes[b].width);
                        let limit = self.lanes[a].speed_limit.min(self.lanes[b].speed_limit);
                        let info = ConnectorInfo { node: n, from_road: ri, to_road: ro, from_lane: a, to_lane: b, kind };
                        self.lanes.push(Lane::new(id, None, 0, centerline, width, limit, Some(info)));
                        self.lanes[a].successors.push(id);
                        self.lanes[id].predecessors.push(a);
                        self.lanes[id].successors.push(b);
                        self.lanes[b].predecessors.push(id);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn road_by_name(&self, name: &str) -> Option<RoadId> {
        self.road_names.get(name).copied()
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.node_names.get(name).copied()
    }

    pub fn lane(&self, id: LaneId) -> &Lane {
        &self.lanes[id]
    }

    /// Lane `index` (0 = rightmost) of the named road.
    pub fn road_lane(&self, road: &str, index: usize) -> Option<LaneId> {
        self.road_by_name(road).and_then(|r| self.roads[r].lanes.get(index).copied())
    }

    pub fn lane_point(&self, pos: LanePosition) -> Vec2 {
        self.lanes[pos.lane].centerline.point_at(pos.s)
    }

    pub fn lane_heading(&self, pos: LanePosition) -> f64 {
        self.lanes[pos.lane].centerline.heading_at(pos.s)
    }

    /// Roads reachable from the end of `road` through a connector.
    pub fn road_successors(&self, road: RoadId) -> Vec<RoadId> {
        let mut out: Vec<RoadId> = self.roads[road]
            .lanes
            .iter()
            .flat_map(|&l| self.lanes[l].successors.iter())
            .filter_map(|&c| self.lanes[c].connector.as_ref().map(|i| i.to_road))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Connectors from `from` road to `to` road.
    pub fn connectors_between(&self, from: RoadId, to: RoadId) -> Vec<LaneId> {
        self.roads[from]
            .lanes
            .iter()
            .flat_map(|&l| self.lanes[l].successors.iter().copied())
            .filter(|&c| self.lanes[c].connector.as_ref().is_some_and(|i| i.to_road == to))
            .collect()
    }

    /// Lanes whose bounding circles come within `radius` of `p`.
    pub fn lanes_near(&self, p: Vec2, radius: f64) -> Vec<LaneId> {
        self.lanes.iter().filter(|l| l.bound_distance(p) <= radius).map(|l| l.id).collect()
    }

    /// Best lane for a pose among `candidates`: smallest lateral offset
    /// among lanes whose direction agrees with `heading` within 90°.
    /// Road lanes that contain the point win over connectors.
    pub fn locate_in(&self, candidates: &[LaneId], p: Vec2, heading: f64) -> Option<(LaneId, Projection)> {
        let mut best: Option<(LaneId, Projection, f64)> = None;
        for &id in candidates {
            let lane = &self.lanes[id];
            if lane.bound_distance(p) > lane.width {
                continue;
            }
            let pr = lane.centerline.project(p);
            let along = pr.arclength;
            if along < -0.5 * lane.width || along > lane.length() + 0.5 * lane.width {
                continue;
            }
            let dh = wrap_angle(lane.centerline.heading_at(along) - heading);
            if dh.abs() > std::f64::consts::FRAC_PI_2 {
                continue;
            }
            let inside = pr.distance <= 0.5 * lane.width;
            // Score: distance, with a bonus for a road lane containing the point.
            let score = pr.distance + if inside && !lane.is_connector() { 0.0 } else { 0.25 };
            if best.as_ref().is_none_or(|b| score < b.2 - 1e-12) {
                best = Some((id, pr, score));
            }
        }
        best.map(|(id, pr, _)| (id, pr))
    }

    pub fn locate(&self, p: Vec2, heading: f64) -> Option<(LaneId, Projection)> {
        let all: Vec<LaneId> = (0..self.lanes.len()).collect();
        self.locate_in(&all, p, heading)
    }

    /// Color of the signal governing `road` as it enters its end node.
    pub fn signal_color(&self, road: RoadId, t: f64) -> Option<SignalColor> {
        let node = &self.nodes[self.roads[road].to];
        let IntersectionControl::Stoplight { phases, offset } = &node.control else {
            return None;
        };
        let cycle: f64 = phases.iter().map(|p| p.duration).sum();
        let mut local = (t + offset).rem_euclid(cycle);
        for ph in phases {
            if local < ph.duration {
                if !ph.green.contains(&road) {
                    return Some(SignalColor::Red);
                }
                return Some(if local < ph.duration - ph.amber { SignalColor::Green } else { SignalColor::Amber });
            }
            local -= ph.duration;
        }
        Some(SignalColor::Red)
    }
}

impl Lane {
    fn new(
        id: LaneId,
        road: Option<RoadId>,
        index: usize,
        centerline: Polyline,
        width: f64,
        speed_limit: f64,
        connector: Option<ConnectorInfo>,
    ) -> Self {
        let pts = centerline.points();
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in pts {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let bound_center = lo.lerp(hi, 0.5);
        let bound_radius = pts.iter().map(|p| p.distance(bound_center)).fold(0.0, f64::max);
        Lane {
            id,
            road,
            index,
            centerline,
            width,
            speed_limit,
            left: None,
            right: None,
            successors: Vec::new(),
            predecessors: Vec::new(),
            connector,
            bound_center,
            bound_radius,
        }
    }
}

fn tangent_intersection(p0: Vec2, t0: Vec2, p2: Vec2, t2: Vec2) -> Option<Vec2> {
    let denom = t0.cross(t2);
    if denom.abs() < 0.05 {
        return None;
    }
    let s = (p2 - p0).cross(t2) / denom;
    if s <= 0.0 {
        return None;
    }
    Some(p0 + t0 * s)
}
