use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::network::{LaneId, LanePosition, ManeuverKind, NodeId, RoadId, RoadNetwork};
use crate::geom::Vec2;
use crate::Error;

/// How to move from one road of the route to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadTransitionManeuver {
    pub from_road: RoadId,
    pub to_road: RoadId,
    pub node: NodeId,
    /// Lanes of `from_road` that connect to `to_road`.
    pub source_lanes: Vec<LaneId>,
    pub destination_lanes: Vec<LaneId>,
    /// End of the source road (the stop line).
    pub trigger: Vec2,
    /// Route arclength of `trigger`.
    pub trigger_s: f64,
    pub kind: ManeuverKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub roads: Vec<RoadId>,
    pub maneuvers: Vec<RoadTransitionManeuver>,
    pub goal: Vec2,
    /// Arclength of the goal on the last road.
    pub goal_s: f64,
    /// Route arclength at the start of each road (negative for the first
    /// road, so that the start position sits at 0).
    pub offsets: Vec<f64>,
    /// Junction gaps after each road but the last.
    pub gaps: Vec<f64>,
    pub length: f64,
}

#[derive(Clone, Copy)]
struct Entry {
    f: f64,
    g: f64,
    /// `None` marks the goal-reached state.
    road: Option<RoadId>,
    seq: usize,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    // Min-heap on f, then insertion order.
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f).then(o.seq.cmp(&self.seq))
    }
}

fn gap(net: &RoadNetwork, a: RoadId, b: RoadId) -> f64 {
    net.roads[a].reference.end().distance(net.roads[b].reference.start())
}

/// Shortest road sequence from `start` to `goal` by A* on road length, with
/// straight-line distance to the goal as heuristic.
pub fn plan_route(net: &RoadNetwork, start: LanePosition, goal: LanePosition) -> Result<RoutePlan, Error> {
    let road_of = |p: LanePosition| {
        net.lanes.get(p.lane).and_then(|l| l.road).ok_or_else(|| Error::Invalid(format!("lane {} is not a road lane", p.lane)))
    };
    let (rs, rg) = (road_of(start)?, road_of(goal)?);
    let goal_point = net.lane_point(goal);
    let start_s = start.s.clamp(0.0, net.roads[rs].length());
    let goal_s = goal.s.clamp(0.0, net.roads[rg].length());

    // Measured to the goal's reference-line point so that it never
    // overestimates the remaining reference-line length.
    let goal_ref = net.roads[rg].reference.point_at(goal_s);
    let h = |r: RoadId| net.roads[r].reference.start().distance(goal_ref);
    let mut heap = BinaryHeap::new();
    let mut best = vec![f64::INFINITY; net.roads.len()];
    let mut parent: Vec<Option<RoadId>> = vec![None; net.roads.len()];
    let mut seq = 0usize;
    let mut push = |heap: &mut BinaryHeap<Entry>, f: f64, g: f64, road: Option<RoadId>| {
        heap.push(Entry { f, g, road, seq });
        seq += 1;
    };

    let direct = rs == rg && goal_s >= start_s;
    if direct {
        push(&mut heap, goal_s - start_s, goal_s - start_s, None);
    }
    // Returning to the start road is only useful when the goal lies behind us on it.
    let allow_return = rs == rg && !direct;
    let first_leg = net.roads[rs].length() - start_s;
    for q in net.road_successors(rs) {
        let g = first_leg + gap(net, rs, q);
        if g < best[q] && (q != rs || allow_return) {
            best[q] = g;
            parent[q] = Some(rs);
            push(&mut heap, g + h(q), g, Some(q));
        }
    }
    let mut found = false;
    while let Some(e) = heap.pop() {
        let Some(r) = e.road else {
            found = true;
            break;
        };
        if e.g > best[r] {
            continue;
        }
        if r == rg {
            push(&mut heap, e.g + goal_s, e.g + goal_s, None);
            if r == rs {
                continue;
            }
        }
        for q in net.road_successors(r) {
            let g = e.g + net.roads[r].length() + gap(net, r, q);
            if g < best[q] && (q != rs || allow_return) {
                best[q] = g;
                parent[q] = Some(r);
                push(&mut heap, g + h(q), g, Some(q));
            }
        }
    }
    if !found {
        return Err(Error::NoRoute);
    }
    let roads = if direct {
        vec![rs]
    } else {
        let mut chain = vec![rg];
        let mut cur = rg;
        while let Some(p) = parent[cur] {
            chain.push(p);
            if p == rs {
                break;
            }
            cur = p;
        }
        chain.reverse();
        if chain[0] != rs || chain.len() < 2 {
            return Err(Error::NoRoute);
        }
        chain
    };
    Ok(build_plan(net, roads, start_s, goal_s, goal_point))
}

fn build_plan(net: &RoadNetwork, roads: Vec<RoadId>, start_s: f64, goal_s: f64, goal: Vec2) -> RoutePlan {
    let mut offsets = vec![-start_s];
    let mut gaps = Vec::new();
    let mut maneuvers = Vec::new();
    for w in roads.windows(2) {
        let (a, b) = (w[0], w[1]);
        let g = gap(net, a, b);
        let trigger_s = offsets.last().unwrap() + net.roads[a].length();
        let conns = net.connectors_between(a, b);
        let info = |c: &LaneId| net.lanes[*c].connector.clone().expect("connector lane");
        let kind = conns.iter().map(|c| info(c).kind).find(|k| *k != ManeuverKind::Merge).unwrap_or(ManeuverKind::Merge);
        let mut source_lanes: Vec<LaneId> = conns.iter().map(|c| info(c).from_lane).collect();
        let mut destination_lanes: Vec<LaneId> = conns.iter().map(|c| info(c).to_lane).collect();
        source_lanes.dedup();
        destination_lanes.sort_unstable();
        destination_lanes.dedup();
        maneuvers.push(RoadTransitionManeuver {
            from_road: a,
            to_road: b,
            node: net.roads[a].to,
            source_lanes,
            destination_lanes,
            trigger: net.roads[a].reference.end(),
            trigger_s,
            kind,
        });
        gaps.push(g);
        offsets.push(trigger_s + g);
    }
    let length = offsets.last().unwrap() + goal_s;
    RoutePlan { roads, maneuvers, goal, goal_s, offsets, gaps, length }
}

impl RoutePlan {
    pub fn road_index(&self, road: RoadId) -> Option<usize> {
        self.roads.iter().position(|&r| r == road)
    }

    /// Route arclength of a lane position, if the lane lies on the route.
    pub fn progress(&self, net: &RoadNetwork, lane: LaneId, s: f64) -> Option<f64> {
        let l = &net.lanes[lane];
        if let Some(r) = l.road {
            let i = self.road_index(r)?;
            // Lanes are offsets of the reference; scale arclength to it.
            let scale = net.roads[r].length() / l.length();
            return Some(self.offsets[i] + s * scale);
        }
        let info = l.connector.as_ref()?;
        let i = self.road_index(info.from_road)?;
        if self.roads.get(i + 1) != Some(&info.to_road) {
            return None;
        }
        let frac = (s / l.length()).clamp(0.0, 1.0);
        Some(self.offsets[i] + net.roads[info.from_road].length() + frac * self.gaps[i])
    }

    /// First maneuver whose trigger lies ahead of `progress`.
    pub fn next_maneuver(&self, progress: f64) -> Option<&RoadTransitionManeuver> {
        self.maneuvers.iter().find(|m| m.trigger_s > progress)
    }

    /// The connector lane to take from `lane` to stay on the route, if any.
    pub fn connector_from(&self, net: &RoadNetwork, lane: LaneId) -> Option<LaneId> {
        let r = net.lanes[lane].road?;
        let i = self.road_index(r)?;
        let next = *self.roads.get(i + 1)?;
        net.lanes[lane].successors.iter().copied().find(|&c| net.lanes[c].connector.as_ref().is_some_and(|k| k.to_road == next))
    }
}
