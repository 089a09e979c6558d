//! Junction bookkeeping: all-way-stop arrival queues, signal holds for
//! agents and the approach report for the ego.

use std::collections::BTreeMap;

use super::agent::Agent;
use crate::collision::NeighborType;
use crate::guiding::{ApproachControl, IntersectionApproach, AMBER_STOP_DECEL};
use crate::road::{IntersectionControl, LaneId, LanePath, ManeuverKind, NodeId, RoadNetwork, SignalColor};

/// Participants counted at junctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Participant {
    Ego,
    Agent(usize),
}

/// Distance from the stop line within which a stopped vehicle joins the
/// all-way-stop queue.
const QUEUE_JOIN_DISTANCE: f64 = 6.0;
/// Look-ahead for controlled junctions along the ego path.
const APPROACH_RANGE: f64 = 150.0;
/// Time gap under which approaching cross traffic blocks a yielding move.
const YIELD_GAP: f64 = 6.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Junctions {
    pub queues: BTreeMap<NodeId, Vec<Participant>>,
}

/// Junction a road lane leads into and the distance left to its stop line.
pub fn lane_end_node(net: &RoadNetwork, lane: LaneId, s: f64) -> Option<(NodeId, f64)> {
    let l = &net.lanes[lane];
    let road = l.road?;
    Some((net.roads[road].to, l.length() - s))
}

/// Connector lanes count as inside the junction they belong to.
pub fn in_box(net: &RoadNetwork, lane: Option<LaneId>, node: NodeId) -> bool {
    lane.and_then(|l| net.lanes[l].connector.as_ref()).is_some_and(|c| c.node == node)
}

impl Junctions {
    pub fn position(&self, node: NodeId, who: Participant) -> Option<usize> {
        self.queues.get(&node)?.iter().position(|&p| p == who)
    }

    /// Adds stopped arrivals and drops participants that left the approach.
    pub fn update(&mut self, net: &RoadNetwork, entries: &[(Participant, Option<(LaneId, f64)>, f64)]) {
        for (node, q) in self.queues.iter_mut() {
            q.retain(|p| {
                entries.iter().any(|(who, pos, _)| {
                    who == p
                        && pos.is_some_and(|(lane, s)| {
                            lane_end_node(net, lane, s).is_some_and(|(n, _)| n == *node) || in_box(net, Some(lane), *node)
                        })
                })
            });
        }
        for &(who, pos, speed) in entries {
            let Some((lane, s)) = pos else { continue };
            let Some((node, d)) = lane_end_node(net, lane, s) else { continue };
            if !matches!(net.nodes[node].control, IntersectionControl::AllWayStop) {
                continue;
            }
            if d < QUEUE_JOIN_DISTANCE && speed < 0.3 {
                let q = self.queues.entry(node).or_default();
                if !q.contains(&who) {
                    q.push(who);
                }
            }
        }
    }

    /// Distance to a stop line a reactive agent must hold at, if any.
    pub fn agent_hold(
        &self,
        net: &RoadNetwork,
        agent: &Agent,
        agents: &[Agent],
        ego_lane: Option<LaneId>,
        t: f64,
    ) -> Option<f64> {
        let (lane, s) = agent.lane_position()?;
        let (node, d) = lane_end_node(net, lane, s)?;
        let line = d - 0.5 * agent.length - 0.5;
        match &net.nodes[node].control {
            IntersectionControl::Stoplight { .. } => {
                let road = net.lanes[lane].road?;
                match net.signal_color(road, t)? {
                    SignalColor::Green => None,
                    SignalColor::Amber if line < agent.speed * agent.speed / (2.0 * AMBER_STOP_DECEL) => None,
                    _ => Some(line.max(0.0)),
                }
            }
            IntersectionControl::AllWayStop => {
                let head = self.position(node, Participant::Agent(agent.id)) == Some(0);
                let busy = in_box(net, ego_lane, node)
                    || agents.iter().any(|o| o.id != agent.id && o.active && in_box(net, o.lane(), node));
                if head && !busy {
                    None
                } else {
                    Some(line.max(0.0))
                }
            }
            _ => None,
        }
    }

    /// The next controlled junction along the ego's path, if within range.
    pub fn ego_approach(
        &self,
        net: &RoadNetwork,
        path: &LanePath,
        s_on_path: f64,
        ego_length: f64,
        agents: &[Agent],
        t: f64,
    ) -> Option<IntersectionApproach> {
        for (i, &lane) in path.lanes.iter().enumerate() {
            let l = &net.lanes[lane];
            let Some(road) = l.road else { continue };
            let end = path.starts[i] + l.length();
            let d_line = end - s_on_path;
            if d_line < 0.0 {
                continue;
            }
            if d_line > APPROACH_RANGE {
                return None;
            }
            let node = net.roads[road].to;
            let control = match &net.nodes[node].control {
                IntersectionControl::None => continue,
                IntersectionControl::Stoplight { .. } => ApproachControl::Stoplight,
                IntersectionControl::AllWayStop => ApproachControl::AllWayStop,
                IntersectionControl::Yield { .. } => ApproachControl::Yield,
            };
            let next_kind = path.lanes.get(i + 1).and_then(|&c| net.lanes[c].connector.as_ref()).map(|c| c.kind);
            let must_yield = match &net.nodes[node].control {
                IntersectionControl::Stoplight { .. } => next_kind == Some(ManeuverKind::LeftTurn),
                IntersectionControl::Yield { priority } => !priority.contains(&road),
                _ => false,
            };
            let signal = net.signal_color(road, t);
            let busy = agents.iter().any(|a| a.active && in_box(net, a.lane(), node));
            let cross_clear = !agents.iter().any(|a| {
                if !a.active || a.kind == NeighborType::Pedestrian {
                    return false;
                }
                if let Some(c) = a.lane().and_then(|l| net.lanes[l].connector.as_ref()) {
                    return c.node == node && c.from_road != road;
                }
                let Some((al, s)) = a.lane_position() else { return false };
                let Some((n, d)) = lane_end_node(net, al, s) else { return false };
                let Some(ar) = net.lanes[al].road else { return false };
                if n != node || ar == road || d > 60.0 {
                    return false;
                }
                if signal.is_some() && net.signal_color(ar, t) == Some(SignalColor::Red) {
                    return false;
                }
                a.speed > 0.5 && d / a.speed < YIELD_GAP || d < 8.0 && a.speed > 0.1
            });
            return Some(IntersectionApproach {
                control,
                stop_point: l.centerline.end(),
                distance: d_line - 0.5 * ego_length - 0.5,
                signal,
                queue_position: self.position(node, Participant::Ego),
                box_occupied: busy,
                cross_traffic_clear: cross_clear,
                must_yield,
            });
        }
        None
    }
}
