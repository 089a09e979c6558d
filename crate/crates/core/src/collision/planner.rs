use std::time::{Duration, Instant};

use super::candidates::{generate_candidates, CandidateControl, CandidateRequest, CandidateSource, PlannerConfig};
use super::check::{is_collision_free, rollout};
use super::predict::Forecast;
use crate::cost::{evaluate_cost, select_best, CostContext, CostWeights, ManeuverTarget};
use crate::dynamics::DynamicsProfile;
use crate::guiding::GuidingArc;
use crate::road::{BehaviorOverride, LaneChangeDirection, LaneId, RoadNetwork};
use crate::sim::pid::PidPair;
use crate::vehicle::{Controls, VehicleParams, VehicleState};

/// One planning request.
pub struct PlanInput<'a> {
    pub ego: &'a VehicleState,
    pub pid: &'a PidPair,
    pub params: &'a VehicleParams,
    pub profile: &'a DynamicsProfile,
    /// Guide for a given horizon; its target speed already reflects traffic
    /// rules.
    pub guide: &'a dyn Fn(f64) -> GuidingArc,
    pub forecasts: &'a [Forecast],
    pub cfg: &'a PlannerConfig,
    /// Base weights; the behavior override is applied by the planner.
    pub weights: CostWeights,
    pub behavior: BehaviorOverride,
    pub prior: Option<(f64, f64)>,
    pub net: Option<&'a RoadNetwork>,
    pub lanes: &'a [LaneId],
    pub reference_lane: Option<LaneId>,
    pub maneuver: Option<&'a ManeuverTarget>,
    pub turn_sign: f64,
    /// Keep every evaluated candidate in the outcome.
    pub keep_candidates: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlanStats {
    pub candidates: usize,
    pub infeasible: usize,
    pub colliding: usize,
    pub safe: usize,
    /// Horizons tried, including the successful one.
    pub attempts: usize,
    /// Time spent in footprint checks, excluding rollouts.
    pub collision_time: Duration,
    pub rollout_time: Duration,
    pub cost_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub chosen: CandidateControl,
    pub tau: f64,
    pub emergency: bool,
    pub lane_change: Option<LaneChangeDirection>,
    pub target_speed: f64,
    pub target_steering: f64,
    pub stats: PlanStats,
    pub candidates: Vec<CandidateControl>,
}

fn first_controls(input: &PlanInput, target: (f64, f64), h: f64) -> Controls {
    let mut pid = *input.pid;
    Controls::new(pid.speed.update(target.0, input.ego.speed, h), pid.steering.update(target.1, input.ego.steering, h))
}

/// Samples candidate controls, discards infeasible and colliding ones and
/// returns the cheapest survivor. Shorter horizons are tried when nothing
/// survives; if no horizon works the ego brakes as hard as it can.
pub fn plan(input: &PlanInput) -> PlanOutcome {
    let cfg = input.cfg;
    let weights = input.weights.with_override(&input.behavior);
    let ego_shape = &input.params.footprint;
    let mut stats = PlanStats::default();
    let mut kept = Vec::new();
    let mut last_target = (0.0, input.ego.steering);

    for &tau in &cfg.tau_schedule {
        let tau = tau * input.behavior.horizon_scale;
        stats.attempts += 1;
        let guide = (input.guide)(tau);
        let v_t = guide.target_speed;
        let phi_t = guide.target_steering;
        last_target = (v_t, phi_t);
        let h = tau / (cfg.samples - 1) as f64 / cfg.substeps as f64;
        let traj_of = |v: f64, phi: f64| {
            rollout(input.ego, input.pid, input.params, input.profile, (v, phi), tau, cfg.samples, cfg.substeps)
        };

        let mut free = |v: f64| {
            let t0 = Instant::now();
            let traj = traj_of(v, phi_t);
            let t1 = Instant::now();
            let ok = is_collision_free(&traj, ego_shape, input.forecasts, cfg);
            stats.rollout_time += t1 - t0;
            stats.collision_time += t1.elapsed();
            ok
        };
        let lane_keep = if free(v_t) {
            Some(v_t)
        } else if free(0.0) {
            let (mut lo, mut hi) = (0.0, v_t);
            for _ in 0..cfg.bisection_iters {
                let mid = 0.5 * (lo + hi);
                if free(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(lo)
        } else {
            None
        };

        let req = CandidateRequest {
            target_speed: v_t,
            target_steering: phi_t,
            prior: input.prior,
            lane_keep_speed: lane_keep,
            steer_span: cfg.steering_span(input.params, input.ego.speed.max(v_t), tau),
            slow_rows: input.prior.filter(|p| p.0 < v_t - cfg.speed_span).map(|(pv, _)| {
                let top = pv + cfg.speed_span / (cfg.grid_speed.max(2) - 1) as f64 * 2.0;
                (pv, cfg.steering_span(input.params, top, tau))
            }),
            max_speed: input.profile.max_speed,
            max_steering: input.params.max_steering,
            turn_sign: input.turn_sign,
        };
        let mut cands = generate_candidates(&req, cfg, &input.behavior);
        stats.candidates += cands.len();

        let ctx = CostContext {
            net: input.net,
            lanes: input.lanes,
            reference_lane: input.reference_lane,
            maneuver: input.maneuver,
            target_speed: v_t,
            tau,
            guide: &guide,
            forecasts: input.forecasts,
            weights,
        };
        for c in cands.iter_mut() {
            let target = (c.target_speed, c.target_steering);
            let slip_ok = c.target_steering.abs() <= input.profile.max_safe_steering(input.params, c.target_speed) + 1e-9;
            c.feasible = slip_ok && input.profile.is_feasible(input.params, input.ego, first_controls(input, target, h));
            if !c.feasible {
                stats.infeasible += 1;
                continue;
            }
            let t0 = Instant::now();
            c.trajectory = traj_of(target.0, target.1);
            let t1 = Instant::now();
            c.collision_free = is_collision_free(&c.trajectory, ego_shape, input.forecasts, cfg);
            stats.rollout_time += t1 - t0;
            stats.collision_time += t1.elapsed();
            if !c.collision_free {
                stats.colliding += 1;
                continue;
            }
            stats.safe += 1;
            let t0 = Instant::now();
            let (b, dir) = evaluate_cost(&c.trajectory, &ctx);
            stats.cost_time += t0.elapsed();
            c.cost = Some(b.total);
            c.breakdown = Some(b);
            c.lane_change = dir;
        }
        let best = select_best(&cands, v_t, phi_t);
        if input.keep_candidates {
            kept.extend(cands.iter().cloned());
        }
        if let Some(i) = best {
            let chosen = cands.swap_remove(i);
            return PlanOutcome {
                lane_change: chosen.lane_change,
                chosen,
                tau,
                emergency: false,
                target_speed: v_t,
                target_steering: phi_t,
                stats,
                candidates: kept,
            };
        }
        log::debug!("no safe candidate at tau {tau}");
    }

    let mut chosen = CandidateControl::new(0.0, last_target.1, CandidateSource::Emergency);
    chosen.feasible = true;
    PlanOutcome {
        chosen,
        tau: *cfg.tau_schedule.last().unwrap() * input.behavior.horizon_scale,
        emergency: true,
        lane_change: None,
        target_speed: last_target.0,
        target_steering: last_target.1,
        stats,
        candidates: kept,
    }
}
