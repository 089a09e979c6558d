//! Fixed-step world: agents, ego control, collision detection and logging.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::agent::{Agent, AgentEnv};
use super::ego::{Ego, EgoEvent, PlanContext, PlanReport};
use super::junction::{Junctions, Participant};
use super::log::{LaneChangeRecord, LogRow, Metrics, RunOutcome, SoundnessReport, StopRecord, TrajectoryLog};
use super::pid::PidPair;
use super::scenario::{Scenario, StartSpec};
use crate::collision::{dense_collision_free, NeighborType, PlannerConfig};
use crate::cost::{CostBreakdown, CostWeights};
use crate::dynamics::{build_profile, DynamicsProfile, PlantModel};
use crate::geom::{wrap_angle, Vec2};
use crate::road::{BehaviorLabel, LanePosition, RoadNetwork};
use crate::vehicle::{step, Controls, VehicleState};
use crate::Error;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WorldOptions {
    /// Re-check every collision-free candidate with the dense reference.
    pub verify_sampling: bool,
    /// Record every evaluated candidate in a CSV table.
    pub dump_costs: bool,
}

/// Timing of one planning cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanTiming {
    pub t: f64,
    pub neighbors: usize,
    pub candidates: usize,
    /// Candidates that reached cost evaluation.
    pub evaluated: usize,
    pub plan_us: f64,
    pub collision_us: f64,
    pub cost_us: f64,
}

pub const COST_DUMP_HEADER: &str =
    "t,tau,source,target_speed,target_steering,feasible,collision_free,total,vel,drift,prog,accel,yawr,lane,mdist,prox\n";

#[derive(Debug, Clone, Copy, Default)]
struct LastPlan {
    target_speed: f64,
    target_steering: f64,
    guide_speed: f64,
    guide_steering: f64,
    tau: f64,
    costs: CostBreakdown,
    candidates: usize,
    safe: usize,
    neighbors: usize,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    plan_ms: Vec<f64>,
    min_clearance: BTreeMap<String, f64>,
    lane_changes: Vec<LaneChangeRecord>,
    stops: Vec<StopRecord>,
    stop_open: Option<(f64, Vec2)>,
    timeline: Vec<(f64, BehaviorLabel)>,
    min_corner: Option<f64>,
    brake_steer: usize,
    max_tracking: f64,
    max_accel: f64,
    max_excess: f64,
    reroutes: usize,
    emergencies: usize,
    distance: f64,
    soundness: SoundnessReport,
}

pub struct World {
    pub name: String,
    pub seed: u64,
    pub net: Option<RoadNetwork>,
    pub ego: Ego,
    pub agents: Vec<Agent>,
    pub junctions: Junctions,
    pub cfg: PlannerConfig,
    pub weights: CostWeights,
    pub t: f64,
    pub tick: u64,
    pub dt: f64,
    pub duration: f64,
    ticks_per_plan: u64,
    pub options: WorldOptions,
    pub log: TrajectoryLog,
    pub cost_dump: String,
    pub timings: Vec<PlanTiming>,
    pub collision: Option<String>,
    last: LastPlan,
    tally: Tally,
    prev_lane: Option<crate::road::LaneId>,
}

/// Profile for the scenario's ego from its plant preset.
pub fn scenario_profile(scenario: &Scenario) -> Result<DynamicsProfile, Error> {
    let params = scenario.ego.vehicle.params()?;
    let plant_name = scenario.ego.plant.clone().unwrap_or_else(|| params.name.clone());
    let mut plant =
        PlantModel::preset(&plant_name).ok_or_else(|| Error::Invalid(format!("unknown plant preset '{plant_name}'")))?;
    if let Some(mu) = scenario.ego.friction {
        plant.friction = mu;
    }
    Ok(build_profile(&plant, &params)?.0)
}

impl World {
    pub fn new(scenario: &Scenario, profile: Option<DynamicsProfile>, options: WorldOptions) -> Result<Self, Error> {
        scenario.validate()?;
        let params = scenario.ego.vehicle.params()?;
        let profile = match profile {
            Some(p) => p,
            None => scenario_profile(scenario)?,
        };
        let net = scenario.map.as_ref().map(RoadNetwork::from_spec).transpose()?;
        let (position, heading) = match &scenario.ego.start {
            StartSpec::Pose { position, heading } => (*position, *heading),
            StartSpec::Lane(r) => {
                let net = net.as_ref().expect("validated");
                let lp = r.resolve(net).map_err(|e| Error::Invalid(format!("ego start: {e}")))?;
                (net.lane_point(lp), net.lane_heading(lp))
            }
        };
        let goals: Vec<LanePosition> = match &net {
            Some(n) => scenario
                .ego
                .goals
                .iter()
                .map(|g| g.resolve(n).map_err(|e| Error::Invalid(format!("ego goal: {e}"))))
                .collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        let state = VehicleState::new(position, heading, scenario.ego.speed);
        let pid = PidPair::new(scenario.pid.speed, scenario.pid.steering);
        let ego = Ego::new(state, params, profile, pid, goals);

        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let mut jitter = |j: f64| if j > 0.0 { rng.gen_range(-j..=j) } else { 0.0 };
        let agents = scenario
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| Agent::from_spec(i, a, net.as_ref(), &mut jitter))
            .collect::<Result<Vec<_>, _>>()?;

        let mut w = World {
            name: scenario.name.clone(),
            seed: scenario.seed,
            net,
            ego,
            agents,
            junctions: Junctions::default(),
            cfg: scenario.planner.clone(),
            weights: scenario.weights,
            t: 0.0,
            tick: 0,
            dt: scenario.dt,
            duration: scenario.duration,
            ticks_per_plan: scenario.ticks_per_plan(),
            options,
            log: TrajectoryLog::default(),
            cost_dump: String::new(),
            timings: Vec::new(),
            collision: None,
            last: LastPlan::default(),
            tally: Tally::default(),
            prev_lane: None,
        };
        w.tally.timeline.push((0.0, w.ego.state.behavior));
        if options.dump_costs {
            w.cost_dump.push_str(COST_DUMP_HEADER);
        }
        Ok(w)
    }

    pub fn outcome(&self) -> Option<RunOutcome> {
        if self.collision.is_some() {
            Some(RunOutcome::Collision)
        } else if self.ego.completed {
            Some(RunOutcome::Completed)
        } else if self.t >= self.duration - 1e-9 {
            Some(RunOutcome::Timeout)
        } else {
            None
        }
    }

    fn plan_cycle(&mut self) {
        if let Some(err) = self.ego.tracking_error(self.t) {
            self.tally.max_tracking = self.tally.max_tracking.max(err);
        }
        let before = (self.ego.state, self.ego.pid);
        let ctx = PlanContext {
            net: self.net.as_ref(),
            agents: &self.agents,
            junctions: &self.junctions,
            cfg: &self.cfg,
            weights: self.weights,
            t: self.t,
            keep_candidates: self.options.verify_sampling || self.options.dump_costs,
        };
        let report = self.ego.plan(&ctx);
        self.absorb(report, before);
    }

    fn absorb(&mut self, report: PlanReport, before: (VehicleState, PidPair)) {
        let PlanReport { outcome, forecasts, wall, events, held: _ } = report;
        let ms = wall.as_secs_f64() * 1e3;
        self.tally.plan_ms.push(ms);
        self.timings.push(PlanTiming {
            t: self.t,
            neighbors: forecasts.len(),
            candidates: outcome.stats.candidates,
            evaluated: outcome.stats.safe,
            plan_us: ms * 1e3,
            collision_us: outcome.stats.collision_time.as_secs_f64() * 1e6,
            cost_us: outcome.stats.cost_time.as_secs_f64() * 1e6,
        });
        if outcome.emergency {
            self.tally.emergencies += 1;
        }
        let c = &outcome.chosen;
        if c.target_speed < before.0.speed - 0.5 && (c.target_steering - outcome.target_steering).abs() > 1e-3 {
            self.tally.brake_steer += 1;
        }
        self.last = LastPlan {
            target_speed: c.target_speed,
            target_steering: c.target_steering,
            guide_speed: outcome.target_speed,
            guide_steering: outcome.target_steering,
            tau: outcome.tau,
            costs: c.breakdown.unwrap_or_default(),
            candidates: outcome.stats.candidates,
            safe: outcome.stats.safe,
            neighbors: forecasts.len(),
        };
        if self.options.verify_sampling {
            let (state, pid) = before;
            for cand in outcome.candidates.iter().filter(|c| c.collision_free) {
                let tau = cand.trajectory.last().map_or(0.0, |s| s.t);
                self.tally.soundness.checked += 1;
                let dense = dense_collision_free(
                    &state,
                    &pid,
                    &self.ego.params,
                    &self.ego.profile,
                    (cand.target_speed, cand.target_steering),
                    tau,
                    &forecasts,
                    &self.cfg,
                );
                if !dense {
                    self.tally.soundness.false_positives += 1;
                    log::warn!(
                        "sampling false positive at t={:.2} for ({}, {})",
                        self.t,
                        cand.target_speed,
                        cand.target_steering
                    );
                }
            }
        }
        if self.options.dump_costs {
            for cand in &outcome.candidates {
                let b = cand.breakdown.unwrap_or_default();
                let tau = cand.trajectory.last().map_or(outcome.tau, |s| s.t);
                let _ = writeln!(
                    self.cost_dump,
                    "{},{},{:?},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    self.t,
                    tau,
                    cand.source,
                    cand.target_speed,
                    cand.target_steering,
                    cand.feasible as u8,
                    cand.collision_free as u8,
                    cand.cost.unwrap_or(f64::NAN),
                    b.vel,
                    b.drift,
                    b.prog,
                    b.accel,
                    b.yawr,
                    b.lane,
                    b.mdist,
                    b.prox
                );
            }
        }
        let pos = self.ego.state.position;
        for e in events {
            match e {
                EgoEvent::StopStarted => self.tally.stop_open = Some((self.t, pos)),
                EgoEvent::StopEnded => {
                    if let Some((t0, p)) = self.tally.stop_open.take() {
                        self.tally.stops.push(StopRecord { t: t0, position: [p.x, p.y], duration: self.t - t0 });
                    }
                }
                EgoEvent::Rerouted => self.tally.reroutes += 1,
                EgoEvent::LaneChangePlanned { .. } | EgoEvent::GoalReached(_) => {}
            }
        }
        let label = self.ego.state.behavior;
        if self.tally.timeline.last().map(|x| x.1) != Some(label) {
            self.tally.timeline.push((self.t, label));
        }
        // Lane changes are counted from localization so that both planned
        // merges and evasive moves show up.
        if let (Some(net), Some(now)) = (self.net.as_ref(), self.ego.lane) {
            if let Some(prev) = self.prev_lane {
                let (a, b) = (&net.lanes[prev], &net.lanes[now]);
                if prev != now && a.road.is_some() && a.road == b.road {
                    self.tally.lane_changes.push(LaneChangeRecord {
                        t: self.t,
                        position: [pos.x, pos.y],
                        from_lane: prev as i64,
                        to_lane: now as i64,
                        direction: if b.index > a.index { "left" } else { "right" }.into(),
                    });
                }
            }
            self.prev_lane = Some(now);
        }
    }

    fn agent_envs(&self) -> Vec<AgentEnv> {
        let ego = &self.ego.state;
        let ego_len = self.ego.params.length;
        self.agents
            .iter()
            .map(|a| {
                let mut env = AgentEnv { t: self.t, ego_distance: a.position.distance(ego.position), lead: None, hold: None };
                if !a.is_reactive() || !a.active {
                    return env;
                }
                let fwd = Vec2::from_angle(a.heading);
                let mut consider = |p: Vec2, h: f64, v: f64, len: f64| {
                    let d = p - a.position;
                    let along = d.dot(fwd);
                    if along <= 0.0 || along > 80.0 || d.cross(fwd).abs() > 1.8 {
                        return;
                    }
                    let gap = along - 0.5 * (a.length + len);
                    let vl = (v * wrap_angle(h - a.heading).cos()).max(0.0);
                    if env.lead.is_none_or(|(g, _)| gap < g) {
                        env.lead = Some((gap, vl));
                    }
                };
                consider(ego.position, ego.heading, ego.speed, ego_len);
                for o in &self.agents {
                    if o.id != a.id && o.active {
                        consider(o.position, o.heading, o.speed, o.length);
                    }
                }
                if let Some(net) = &self.net {
                    env.hold = self.junctions.agent_hold(net, a, &self.agents, self.ego.lane, self.t);
                }
                env
            })
            .collect()
    }

    /// Advances the world by one physics tick.
    pub fn step(&mut self) {
        if self.tick.is_multiple_of(self.ticks_per_plan) {
            self.plan_cycle();
        }
        let envs = self.agent_envs();
        for (a, env) in self.agents.iter_mut().zip(&envs) {
            a.update(self.net.as_ref(), env, self.dt);
        }

        let dt = self.dt;
        let ego = &mut self.ego;
        let s = ego.state;
        let throttle = if ego.emergency { -1.0 } else { ego.pid.speed.update(ego.target.0, s.speed, dt) };
        let steer = ego.pid.steering.update(ego.target.1, s.steering, dt);
        let u = Controls::new(throttle, steer);
        let mut next = step(&s, &ego.params, &ego.profile, u, dt);
        next.controls = u;
        next.behavior = s.behavior;
        self.tally.distance += next.position.distance(s.position);
        let vdot = (next.speed - s.speed) / dt;
        self.tally.max_accel = self.tally.max_accel.max(vdot.abs());
        let pr = &ego.profile;
        // RK4 stages sample the envelope inside the tick's speed interval.
        let (v0, v1) = (s.speed.min(next.speed), s.speed.max(next.speed));
        let speeds = (0..=16).map(|i| v0 + (v1 - v0) * i as f64 / 16.0);
        let hi = speeds.clone().map(|v| pr.accel_max_at(v)).fold(f64::MIN, f64::max);
        let lo = speeds.map(|v| pr.decel_max_at(v)).fold(f64::MAX, f64::min);
        self.tally.max_excess = self.tally.max_excess.max(vdot - hi).max(lo - vdot);
        let curvature = next.steering.tan() / ego.params.wheelbase();
        if curvature.abs() > 1.0 / 60.0 && next.speed > 1.0 {
            self.tally.min_corner = Some(self.tally.min_corner.map_or(next.speed, |m: f64| m.min(next.speed)));
        }
        ego.state = next;
        self.t = (self.tick + 1) as f64 * self.dt;
        self.tick += 1;

        if let Some(net) = &self.net {
            let mut entries = vec![(Participant::Ego, self.ego.lane.map(|l| (l, self.ego.lane_s)), self.ego.state.speed)];
            for a in self.agents.iter().filter(|a| a.active && a.is_reactive()) {
                entries.push((Participant::Agent(a.id), a.lane_position(), a.speed));
            }
            self.junctions.update(net, &entries);
        }

        let ego_fp = self.ego.state.footprint(&self.ego.params);
        let re = self.ego.params.footprint.circumradius();
        let mut min_dist = f64::INFINITY;
        for a in self.agents.iter().filter(|a| a.active) {
            let centre = a.position.distance(self.ego.state.position);
            if centre > 60.0 {
                continue;
            }
            let fp = a.footprint();
            let d =
                if centre <= re + a.shape.circumradius() && ego_fp.intersects(&fp) { 0.0 } else { ego_fp.distance_between(&fp) };
            if d <= 0.0 && self.collision.is_none() {
                self.collision = Some(a.name.clone());
                log::info!("collision with '{}' at t={:.2}", a.name, self.t);
            }
            min_dist = min_dist.min(d);
            let key = a.kind.as_str().to_string();
            let e = self.tally.min_clearance.entry(key).or_insert(f64::INFINITY);
            *e = e.min(d);
        }

        let st = &self.ego.state;
        let l = &self.last;
        self.log.rows.push(LogRow {
            t: self.t,
            x: st.position.x,
            y: st.position.y,
            heading: st.heading,
            speed: st.speed,
            steering: st.steering,
            throttle: st.controls.throttle,
            steer_input: st.controls.steer,
            behavior: st.behavior,
            lane: self.ego.lane.map_or(-1, |l| l as i64),
            target_speed: l.target_speed,
            target_steering: l.target_steering,
            guide_speed: l.guide_speed,
            guide_steering: l.guide_steering,
            tau: l.tau,
            emergency: self.ego.emergency,
            min_neighbor_dist: min_dist,
            costs: l.costs,
            candidates: l.candidates,
            safe_candidates: l.safe,
            neighbors: l.neighbors,
            collision: self.collision.is_some(),
        });
    }

    /// Steps until the run completes, collides or times out.
    pub fn run(&mut self) -> RunOutcome {
        loop {
            if let Some(o) = self.outcome() {
                return o;
            }
            self.step();
        }
    }

    pub fn metrics(&self) -> Metrics {
        let outcome = self.outcome().unwrap_or(RunOutcome::Timeout);
        let tally = &self.tally;
        let n = tally.plan_ms.len().max(1) as f64;
        let mut min_clearance = BTreeMap::new();
        for k in NeighborType::ALL {
            if let Some(v) = tally.min_clearance.get(k.as_str()) {
                min_clearance.insert(k.as_str().to_string(), *v);
            }
        }
        let mut stops = tally.stops.clone();
        if let Some((t0, p)) = tally.stop_open {
            stops.push(StopRecord { t: t0, position: [p.x, p.y], duration: self.t - t0 });
        }
        Metrics {
            scenario: self.name.clone(),
            vehicle: self.ego.params.name.clone(),
            seed: self.seed,
            outcome,
            completed: outcome == RunOutcome::Completed,
            collisions: self.collision.is_some() as usize,
            collision_with: self.collision.clone(),
            sim_time: self.t,
            distance: tally.distance,
            min_clearance,
            lane_changes: tally.lane_changes.clone(),
            stops,
            plan_cycles: tally.plan_ms.len(),
            emergency_cycles: tally.emergencies,
            plan_time_mean_ms: tally.plan_ms.iter().sum::<f64>() / n,
            plan_time_max_ms: tally.plan_ms.iter().cloned().fold(0.0, f64::max),
            behavior_timeline: tally.timeline.clone(),
            min_cornering_speed: tally.min_corner,
            brake_and_steer_cycles: tally.brake_steer,
            max_tracking_error: tally.max_tracking,
            max_abs_accel: tally.max_accel,
            max_envelope_excess: tally.max_excess,
            reroutes: tally.reroutes,
            soundness: self.options.verify_sampling.then_some(tally.soundness),
        }
    }
}
