//! The ego's planning cycle: localization, routing, behavior state, guide
//! construction and candidate selection.

use std::time::{Duration, Instant};

use super::agent::Agent;
use super::junction::Junctions;
use super::pid::PidPair;
use crate::collision::{plan, Forecast, PlanInput, PlanOutcome, PlannerConfig, TrajSample};
use crate::cost::{CostWeights, ManeuverTarget};
use crate::dynamics::DynamicsProfile;
use crate::geom::{ArcOrLine, Vec2};
use crate::guiding::{
    apply_traffic_rules, blend_lane_change_waypoints, compute_guiding_arc, lookahead_speed_cap, sample_waypoints, GuidingArc,
    COMFORT_DECEL,
};
use crate::road::{
    fsm_transition, pick_successor, plan_route, BehaviorLabel, BehaviorOverride, FsmEvent, LaneChangeDirection, LaneId, LanePath,
    LanePosition, RoadNetwork, RoutePlan,
};
use crate::vehicle::{VehicleParams, VehicleState};

/// Neighbors farther than this are not observed.
pub const SENSING_RANGE: f64 = 150.0;
/// A lane change that has not completed after this long is abandoned.
const MERGE_TIMEOUT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub from: LaneId,
    pub target: LaneId,
    pub direction: LaneChangeDirection,
    pub since: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EgoEvent {
    LaneChangePlanned { from: LaneId, to: LaneId, direction: LaneChangeDirection },
    StopStarted,
    StopEnded,
    GoalReached(usize),
    Rerouted,
}

/// Everything the planning cycle reads from the world.
pub struct PlanContext<'a> {
    pub net: Option<&'a RoadNetwork>,
    pub agents: &'a [Agent],
    pub junctions: &'a Junctions,
    pub cfg: &'a PlannerConfig,
    pub weights: CostWeights,
    pub t: f64,
    pub keep_candidates: bool,
}

pub struct PlanReport {
    pub outcome: PlanOutcome,
    pub forecasts: Vec<Forecast>,
    /// Wall time of the planner call alone.
    pub wall: Duration,
    pub events: Vec<EgoEvent>,
    /// The junction rules lowered the target speed this cycle.
    pub held: bool,
}

#[derive(Debug, Clone)]
pub struct Ego {
    pub state: VehicleState,
    pub params: VehicleParams,
    pub profile: DynamicsProfile,
    pub pid: PidPair,
    pub goals: Vec<LanePosition>,
    pub goal_index: usize,
    pub route: Option<RoutePlan>,
    pub progress: f64,
    pub lane: Option<LaneId>,
    pub lane_s: f64,
    pub lateral: f64,
    pub merge: Option<Merge>,
    /// Chosen `(v, φ)` targets tracked by the PID loops.
    pub target: (f64, f64),
    pub emergency: bool,
    pub prior: Option<(f64, f64)>,
    /// Previous guide target speed, used to space waypoints.
    pub intended_speed: f64,
    pub completed: bool,
    pub planned: Vec<TrajSample>,
    pub plan_time: f64,
}

impl Ego {
    pub fn new(
        state: VehicleState,
        params: VehicleParams,
        profile: DynamicsProfile,
        pid: PidPair,
        goals: Vec<LanePosition>,
    ) -> Self {
        Self {
            target: (state.speed, state.steering),
            intended_speed: state.speed,
            state,
            params,
            profile,
            pid,
            goals,
            goal_index: 0,
            route: None,
            progress: 0.0,
            lane: None,
            lane_s: 0.0,
            lateral: 0.0,
            merge: None,
            emergency: false,
            prior: None,
            completed: false,
            planned: Vec::new(),
            plan_time: 0.0,
        }
    }

    pub fn has_goal(&self) -> bool {
        self.goal_index < self.goals.len()
    }

    fn set_lane(&mut self, net: &RoadNetwork, lane: LaneId) {
        let pr = net.lanes[lane].centerline.project(self.state.position);
        self.lane = Some(lane);
        self.lane_s = pr.arclength;
        self.lateral = pr.lateral;
    }

    /// Keeps the current lane while inside it, hands over to the route's
    /// successor past its end, and otherwise searches nearby lanes.
    fn localize(&mut self, net: &RoadNetwork) {
        let p = self.state.position;
        if let Some(l) = self.lane {
            let lane = &net.lanes[l];
            let pr = lane.centerline.project(p);
            if pr.arclength >= lane.length() - 1e-6 {
                if let Some(next) = pick_successor(net, self.route.as_ref(), l) {
                    if net.lanes[next].centerline.project(p).distance < net.lanes[next].width {
                        self.set_lane(net, next);
                        return;
                    }
                }
            } else if pr.distance < 0.5 * lane.width && pr.arclength >= -1.0 {
                self.set_lane(net, l);
                return;
            }
        }
        let near = net.lanes_near(p, 8.0);
        match net.locate_in(&near, p, self.state.heading) {
            Some((l, _)) => self.set_lane(net, l),
            None => self.lane = None,
        }
    }

    fn update_route(&mut self, net: &RoadNetwork, events: &mut Vec<EgoEvent>) {
        let Some(lane) = self.lane else { return };
        let on_road = net.lanes[lane].road.is_some();
        for _ in 0..4 {
            if !self.has_goal() {
                return;
            }
            let here = LanePosition { lane, s: self.lane_s.clamp(0.0, net.lanes[lane].length()) };
            if self.route.is_none() {
                if !on_road {
                    return;
                }
                match plan_route(net, here, self.goals[self.goal_index]) {
                    Ok(r) => self.route = Some(r),
                    Err(e) => {
                        log::warn!("routing from lane {lane}: {e}");
                        return;
                    }
                }
            }
            let route = self.route.as_ref().unwrap();
            match route.progress(net, lane, self.lane_s) {
                Some(p) => self.progress = p,
                None => {
                    if on_road {
                        self.route = None;
                        events.push(EgoEvent::Rerouted);
                        continue;
                    }
                    return;
                }
            }
            let last = *route.roads.last().unwrap();
            if net.lanes[lane].road == Some(last) && self.progress >= route.length - 1.0 {
                events.push(EgoEvent::GoalReached(self.goal_index));
                self.goal_index += 1;
                self.route = None;
                if !self.has_goal() {
                    self.completed = true;
                }
                continue;
            }
            return;
        }
    }

    fn fire(&mut self, event: FsmEvent) {
        self.state.behavior = fsm_transition(self.state.behavior, event);
        if !self.state.behavior.is_merging() && self.state.behavior != BehaviorLabel::StoppedWaiting {
            self.merge = None;
        }
    }

    fn behavior_events(&mut self, net: &RoadNetwork, t: f64) {
        let Some(lane) = self.lane else { return };
        let l = &net.lanes[lane];
        let label = self.state.behavior;
        if label.is_turning() && l.road.is_some() {
            self.fire(FsmEvent::ManeuverComplete);
        }
        if label == BehaviorLabel::DrivingStraight {
            let kind = match &l.connector {
                Some(c) if c.kind.is_turn() => Some(c.kind),
                _ => self
                    .route
                    .as_ref()
                    .and_then(|r| r.next_maneuver(self.progress))
                    .filter(|m| m.kind.is_turn() && self.progress >= m.trigger_s - 1.0 && m.source_lanes.contains(&lane))
                    .map(|m| m.kind),
            };
            if let Some(k) = kind {
                self.fire(FsmEvent::ManeuverPointReached(k));
            }
        }
        if let Some(m) = self.merge {
            if self.state.behavior.is_merging() {
                let done = (lane == m.target && self.lateral.abs() < 0.5) || t - m.since > MERGE_TIMEOUT || l.road.is_none();
                if done {
                    self.fire(FsmEvent::LaneChangeComplete);
                }
            }
        }
    }

    fn turn_sign(&self) -> f64 {
        match self.state.behavior {
            BehaviorLabel::TurningLeft => 1.0,
            BehaviorLabel::TurningRight => -1.0,
            _ => 0.0,
        }
    }

    /// One planning cycle at time `ctx.t`.
    pub fn plan(&mut self, ctx: &PlanContext) -> PlanReport {
        let mut events = Vec::new();
        let p = self.state.position;
        let heading = self.state.heading;
        let speed = self.state.speed;
        let max_tau = ctx.cfg.tau_schedule.iter().cloned().fold(0.0, f64::max);
        let forecasts: Vec<Forecast> = ctx
            .agents
            .iter()
            .filter(|a| a.active && a.position.distance(p) < SENSING_RANGE)
            .map(|a| Forecast::new(&a.observe(), ctx.net, max_tau))
            .collect();

        let hold_still = GuidingArc {
            geometry: ArcOrLine::Line { start: p, end: p + Vec2::from_angle(heading) * 1e-3 },
            target_speed: 0.0,
            target_steering: 0.0,
            reflected: false,
        };

        let mut held = false;
        let mut lanes = Vec::new();
        let mut reference = None;
        let mut maneuver = None;
        let mut paths: Option<(LanePath, Option<LanePath>, f64)> = None;
        let mut approach = None;
        let mut limit = 0.0;

        if let Some(net) = ctx.net {
            self.localize(net);
            self.update_route(net, &mut events);
            self.behavior_events(net, ctx.t);
            if let Some(lane) = self.lane {
                let route = self.route.as_ref();
                let ref_lane = self.merge.map_or(lane, |m| m.target);
                let s_ref = net.lanes[ref_lane].centerline.project(p).arclength.max(0.0);
                let brake_reach = speed * speed / (2.0 * COMFORT_DECEL);
                let reach = max_tau * speed.max(self.intended_speed).max(2.0) + brake_reach + 40.0;
                let path = LanePath::follow(net, route, ref_lane, s_ref, reach);
                let from = self.merge.map(|_| LanePath::follow(net, route, lane, self.lane_s.max(0.0), reach));
                let cap = lookahead_speed_cap(net, &path, s_ref, brake_reach + 40.0, &self.profile);
                limit = net.lanes[ref_lane].speed_limit.min(cap);
                approach = ctx.junctions.ego_approach(net, &path, s_ref, self.params.length, ctx.agents, ctx.t);
                // Cost lanes: the roads the path uses plus the path's own
                // connectors, so leaving the route is never drift-free.
                let on_path: Vec<LaneId> = path.lanes.iter().chain(from.iter().flat_map(|f| f.lanes.iter())).copied().collect();
                let roads: Vec<_> = on_path.iter().filter_map(|&l| net.lanes[l].road).collect();
                lanes = net
                    .lanes_near(p, max_tau * speed.max(limit) + 10.0)
                    .into_iter()
                    .filter(|&l| on_path.contains(&l) || net.lanes[l].road.is_some_and(|r| roads.contains(&r)))
                    .collect();
                paths = Some((path, from, s_ref));
                reference = Some(ref_lane);
                maneuver = route.and_then(|r| r.next_maneuver(self.progress)).map(|m| ManeuverTarget {
                    source_road: m.from_road,
                    source_lanes: m.source_lanes.clone(),
                    point: m.trigger,
                });
            }
        }

        let k = ctx.cfg.waypoints;
        let intended = self.intended_speed;
        let has_goal = self.has_goal();
        let guide = |tau: f64| -> GuidingArc {
            let (Some(net), Some((path, from, _))) = (ctx.net, paths.as_ref()) else {
                return hold_still;
            };
            if !has_goal {
                return hold_still;
            }
            let wp = from
                .as_ref()
                .and_then(|f| blend_lane_change_waypoints(net, f, path, p, tau, k, intended, None).ok())
                .unwrap_or_else(|| sample_waypoints(path, p, tau, k, intended).expect("validated waypoint count"));
            let mut g = compute_guiding_arc(p, heading, &wp, &self.params, &self.profile, limit);
            if let Some(a) = &approach {
                g.target_speed = apply_traffic_rules(g.target_speed, a, speed, tau);
            }
            g
        };
        if let Some(a) = &approach {
            if has_goal {
                let tau = ctx.cfg.tau();
                let base = limit;
                held = apply_traffic_rules(base, a, speed, tau) < base - 1e-9;
            }
        }

        let maneuver_ref = maneuver.as_ref();
        let behavior = BehaviorOverride::for_label(self.state.behavior);
        let input = PlanInput {
            ego: &self.state,
            pid: &self.pid,
            params: &self.params,
            profile: &self.profile,
            guide: &guide,
            forecasts: &forecasts,
            cfg: ctx.cfg,
            weights: ctx.weights,
            behavior,
            prior: self.prior,
            net: ctx.net,
            lanes: &lanes,
            reference_lane: reference,
            maneuver: maneuver_ref,
            turn_sign: self.turn_sign(),
            keep_candidates: ctx.keep_candidates,
        };
        let t0 = Instant::now();
        let outcome = plan(&input);
        let wall = t0.elapsed();

        // Behavior updates driven by the plan.
        if let (Some(net), Some(lane)) = (ctx.net, self.lane) {
            if self.state.behavior == BehaviorLabel::DrivingStraight && net.lanes[lane].road.is_some() {
                if let Some(dir) = outcome.lane_change {
                    let l = &net.lanes[lane];
                    let target = match dir {
                        LaneChangeDirection::Left => l.left,
                        LaneChangeDirection::Right => l.right,
                    };
                    if let Some(to) = target {
                        self.fire(FsmEvent::LaneChangePlanned(dir));
                        self.merge = Some(Merge { from: lane, target: to, direction: dir, since: ctx.t });
                        events.push(EgoEvent::LaneChangePlanned { from: lane, to, direction: dir });
                    }
                }
            }
        }
        if held && speed < 0.2 && self.state.behavior != BehaviorLabel::StoppedWaiting {
            self.fire(FsmEvent::StopRequired);
            events.push(EgoEvent::StopStarted);
        } else if !held && self.state.behavior == BehaviorLabel::StoppedWaiting {
            self.fire(FsmEvent::ClearedToGo);
            events.push(EgoEvent::StopEnded);
        }

        self.target = (outcome.chosen.target_speed, outcome.chosen.target_steering);
        self.emergency = outcome.emergency;
        self.prior = if outcome.emergency { None } else { Some(self.target) };
        self.intended_speed = outcome.target_speed;
        self.planned = outcome.chosen.trajectory.clone();
        self.plan_time = ctx.t;

        PlanReport { outcome, forecasts, wall, events, held }
    }

    /// Distance between the executed position and the planned trajectory
    /// at time `t`.
    pub fn tracking_error(&self, t: f64) -> Option<f64> {
        if self.planned.len() < 2 || self.emergency {
            return None;
        }
        let dt = t - self.plan_time;
        let i = self.planned.iter().rposition(|s| s.t <= dt)?;
        let a = &self.planned[i];
        let b = self.planned.get(i + 1)?;
        let f = (dt - a.t) / (b.t - a.t);
        Some(a.position.lerp(b.position, f).distance(self.state.position))
    }
}
