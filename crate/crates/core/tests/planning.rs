use std::sync::OnceLock;

use navplan::collision::{
    is_collision_free, predict_neighbor, rollout, CandidateControl, CandidateSource, Forecast, NeighborState, NeighborType,
    PlannerConfig, TrajSample,
};
use navplan::cost::{
    comfort_cost, evaluate_cost, maneuver_cost, path_cost, proximity_cost, select_best, CostContext, CostWeights,
};
use navplan::dynamics::{build_profile, DynamicsProfile, PlantModel};
use navplan::geom::{ArcOrLine, ConvexPolygon, Polyline, Vec2};
use navplan::guiding::{compute_guiding_arc, sample_waypoints, GuidingArc, WaypointSet};
use navplan::road::{LanePath, RoadNetwork};
use navplan::sim::{PidPair, PHYSICS_DT};
use navplan::vehicle::{step, Controls, VehicleParams, VehicleState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hatchback() -> &'static (VehicleParams, DynamicsProfile) {
    static CELL: OnceLock<(VehicleParams, DynamicsProfile)> = OnceLock::new();
    CELL.get_or_init(|| {
        let params = VehicleParams::hatchback();
        let profile = build_profile(&PlantModel::hatchback(), &params).unwrap().0;
        (params, profile)
    })
}

fn waypoints(mid: Vec2, end: Vec2) -> WaypointSet {
    let mut points = vec![mid; 7];
    points[6] = end;
    WaypointSet { points, horizon: 4.0, truncated: false }
}

fn vec2() -> impl Strategy<Value = Vec2> {
    (-60.0..60.0f64, -60.0..60.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn guide_targets_respect_limits(p in vec2(), heading in -3.1..3.1f64, mid in vec2(), end in vec2(), limit in 1.0..45.0f64) {
        prop_assume!(p.distance(end) > 1.0);
        let (params, profile) = hatchback();
        let g = compute_guiding_arc(p, heading, &waypoints(mid, end), params, profile, limit);
        prop_assert!(g.target_speed <= limit);
        prop_assert!(g.target_speed >= 0.0);
        prop_assert!(g.target_steering.abs() <= params.max_steering + 1e-12);
        match g.geometry {
            ArcOrLine::Arc { radius, .. } => prop_assert!(g.target_speed <= profile.max_safe_speed(radius) + 1e-12),
            ArcOrLine::Line { .. } => prop_assert!(g.target_speed <= profile.max_speed),
        }
    }

    #[test]
    fn guide_keeps_endpoints(p in vec2(), heading in -3.1..3.1f64, mid in vec2(), end in vec2()) {
        prop_assume!(p.distance(end) > 1.0);
        let (params, profile) = hatchback();
        let g = compute_guiding_arc(p, heading, &waypoints(mid, end), params, profile, 20.0);
        let tol = 1e-9 * (1.0 + p.norm() + end.norm());
        prop_assert!(g.geometry.start().distance(p) < tol);
        prop_assert!(g.geometry.end().distance(end) < tol);
        let len = g.geometry.length();
        prop_assert!(g.geometry.point_at(len).distance(end) < 1e-6 * (1.0 + len));
    }

    #[test]
    fn predictor_depends_only_on_neighbor_state(
        x in -50.0..50.0f64, y in -50.0..50.0f64, heading in -3.1..3.1f64,
        speed in 0.0..20.0f64, accel in -3.0..3.0f64, turn in -0.5..0.5f64, t in 0.0..4.0f64,
    ) {
        let n = NeighborState {
            id: 3,
            shape: ConvexPolygon::rectangle(4.5, 1.8).unwrap(),
            position: Vec2::new(x, y),
            heading,
            velocity: Vec2::from_angle(heading) * speed,
            lane: None,
            accel,
            turn_rate: turn,
            kind: NeighborType::Vehicle,
        };
        let a = predict_neighbor(&n, None, t);
        let b = predict_neighbor(&n.clone(), None, t);
        prop_assert_eq!(&a, &b);
        let f = Forecast::new(&n, None, 4.0);
        let pose = f.pose_at(t);
        prop_assert!(pose.position.distance(a.0) < 1e-9);
        // Never slows beyond its observed deceleration; a stopped neighbor stays stopped.
        let travelled = a.0.distance(n.position);
        let bound = speed * t + 0.5 * accel.max(0.0) * t * t;
        prop_assert!(travelled <= bound + 1e-9);
    }
}

#[test]
fn guide_varies_continuously_with_ego_position() {
    let (params, profile) = hatchback();
    let line = Polyline::arc(Vec2::ZERO, 80.0, -std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 0.05).unwrap();
    let path = LanePath { lanes: vec![0], starts: vec![0.0], line, truncated: false };
    let guide = |p: Vec2, heading: f64| {
        let wp = sample_waypoints(&path, p, 4.0, 7, 12.0).unwrap();
        compute_guiding_arc(p, heading, &wp, params, profile, 15.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let delta = 1e-3;
    let (mut worst_curv, mut worst_steer) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let s = rng.gen_range(5.0..150.0);
        let base = path.line.point_at(s);
        let heading = path.line.heading_at(s) + rng.gen_range(-0.1..0.1);
        let p = base + Vec2::from_angle(heading).perp() * rng.gen_range(-1.0..1.0);
        let q = p + Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU)) * delta;
        let (a, b) = (guide(p, heading), guide(q, heading));
        assert!(!a.reflected && !b.reflected);
        worst_curv = worst_curv.max((a.geometry.curvature() - b.geometry.curvature()).abs() / delta);
        worst_steer = worst_steer.max((a.target_steering - b.target_steering).abs() / delta);
    }
    assert!(worst_curv < 0.05, "curvature Lipschitz ratio {worst_curv}");
    assert!(worst_steer < 0.2, "steering Lipschitz ratio {worst_steer}");
}

fn random_neighbor(rng: &mut ChaCha8Rng, id: usize) -> NeighborState {
    let kinds = [NeighborType::Vehicle, NeighborType::Pedestrian, NeighborType::Cyclist, NeighborType::Obstruction];
    let kind = kinds[rng.gen_range(0..kinds.len())];
    let (len, wid, vmax) = match kind {
        NeighborType::Vehicle => (4.5, 1.8, 15.0),
        NeighborType::Pedestrian => (0.6, 0.6, 2.0),
        NeighborType::Cyclist => (1.8, 0.7, 6.0),
        NeighborType::Obstruction => (3.0, 2.0, 0.0),
    };
    let heading = rng.gen_range(-3.1..3.1);
    NeighborState {
        id,
        shape: ConvexPolygon::rectangle(len, wid).unwrap(),
        position: Vec2::new(rng.gen_range(-5.0..45.0), rng.gen_range(-12.0..12.0)),
        heading,
        velocity: Vec2::from_angle(heading) * rng.gen_range(0.0..=vmax),
        lane: None,
        accel: if vmax > 0.0 { rng.gen_range(-1.0..1.0) } else { 0.0 },
        turn_rate: if vmax > 0.0 { rng.gen_range(-0.3..0.3) } else { 0.0 },
        kind,
    }
}

/// Executes a collision-free candidate for one planning period in closed
/// loop at the physics rate and checks the footprints against each
/// neighbor following its own predicted motion.
#[test]
fn free_candidates_stay_clear_for_one_period() {
    let (params, profile) = hatchback();
    let cfg = PlannerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut free, mut blocked) = (0, 0);
    for _ in 0..300 {
        let ego = VehicleState::new(Vec2::ZERO, 0.0, rng.gen_range(0.0..15.0));
        let pid = PidPair::default();
        let forecasts: Vec<Forecast> =
            (0..rng.gen_range(1..=3)).map(|i| Forecast::new(&random_neighbor(&mut rng, i), None, 4.0)).collect();
        for v in [0.0, 4.0, 8.0, 12.0, 16.0] {
            for phi in [-0.3, -0.1, 0.0, 0.1, 0.3] {
                let traj = rollout(&ego, &pid, params, profile, (v, phi), 4.0, cfg.samples, cfg.substeps);
                if !is_collision_free(&traj, &params.footprint, &forecasts, &cfg) {
                    blocked += 1;
                    continue;
                }
                free += 1;
                let (mut s, mut pid) = (ego, pid);
                let ticks = (cfg.dt_plan / PHYSICS_DT).round() as usize;
                for k in 1..=ticks {
                    let u =
                        Controls::new(pid.speed.update(v, s.speed, PHYSICS_DT), pid.steering.update(phi, s.steering, PHYSICS_DT));
                    s = step(&s, params, profile, u, PHYSICS_DT);
                    let body = s.footprint(params);
                    for f in &forecasts {
                        assert!(!body.intersects(&f.footprint_at(k as f64 * PHYSICS_DT)), "overlap at tick {k} for ({v}, {phi})");
                    }
                }
            }
        }
    }
    assert!(free > 1000 && blocked > 100, "free {free}, blocked {blocked}");
}

struct CostFixture {
    net: RoadNetwork,
    lanes: Vec<usize>,
    ego: VehicleState,
    guide: GuidingArc,
}

fn cost_fixture() -> CostFixture {
    let net = RoadNetwork::from_spec(&navplan::benchmarks::straight_map(500.0, 2, 15.0)).unwrap();
    let lanes = net.roads[0].lanes.clone();
    let y = net.lanes[lanes[0]].centerline.start().y;
    let p = Vec2::new(50.0, y);
    CostFixture {
        ego: VehicleState::new(p, 0.0, 10.0),
        guide: GuidingArc {
            geometry: ArcOrLine::Line { start: p, end: p + Vec2::new(40.0, 0.0) },
            target_speed: 10.0,
            target_steering: 0.0,
            reflected: false,
        },
        net,
        lanes,
    }
}

fn context<'a>(fx: &'a CostFixture, forecasts: &'a [Forecast], weights: CostWeights) -> CostContext<'a> {
    CostContext {
        net: Some(&fx.net),
        lanes: &fx.lanes,
        reference_lane: Some(fx.lanes[0]),
        maneuver: None,
        target_speed: fx.guide.target_speed,
        tau: 4.0,
        guide: &fx.guide,
        forecasts,
        weights,
    }
}

fn grid_trajectories(fx: &CostFixture) -> Vec<((f64, f64), Vec<TrajSample>)> {
    let (params, profile) = hatchback();
    let mut out = Vec::new();
    for v in [6.0, 8.0, 10.0, 12.0] {
        for phi in [-0.06, -0.02, 0.0, 0.02, 0.06] {
            let traj = rollout(&fx.ego, &PidPair::default(), params, profile, (v, phi), 4.0, 20, 10);
            out.push(((v, phi), traj));
        }
    }
    out
}

fn obstacle(kind: NeighborType, at: Vec2) -> Forecast {
    let n = NeighborState {
        id: 1,
        shape: ConvexPolygon::rectangle(1.0, 1.0).unwrap(),
        position: at,
        heading: 0.0,
        velocity: Vec2::ZERO,
        lane: None,
        accel: 0.0,
        turn_rate: 0.0,
        kind,
    };
    Forecast::new(&n, None, 4.0)
}

fn scaled(w: CostWeights, k: f64) -> CostWeights {
    CostWeights {
        w_vel: w.w_vel * k,
        w_drift: w.w_drift * k,
        w_prog: w.w_prog * k,
        w_accel: w.w_accel * k,
        w_yawr: w.w_yawr * k,
        w_lane: w.w_lane * k,
        w_mdist: w.w_mdist * k,
        w_prox: w.w_prox * k,
        w_offroad: w.w_offroad * k,
        ..w
    }
}

#[test]
fn exact_tracking_costs_nothing_on_empty_road() {
    let fx = cost_fixture();
    let ctx = context(&fx, &[], CostWeights::default());
    let trajs = grid_trajectories(&fx);
    for ((v, phi), traj) in &trajs {
        let c = evaluate_cost(traj, &ctx).0.total;
        if (*v, *phi) == (10.0, 0.0) {
            assert!(c.abs() < 1e-12, "tracking candidate costs {c}");
        } else {
            assert!(c > 1e-6, "({v}, {phi}) costs {c}");
        }
    }
}

#[test]
fn total_is_sum_of_nonnegative_terms() {
    let fx = cost_fixture();
    let y = fx.ego.position.y;
    let forecasts = vec![
        obstacle(NeighborType::Cyclist, Vec2::new(70.0, y + 1.0)),
        obstacle(NeighborType::Vehicle, Vec2::new(85.0, y + 3.5)),
    ];
    let ctx = context(&fx, &forecasts, CostWeights::default());
    for (_, traj) in grid_trajectories(&fx) {
        let (b, _) = evaluate_cost(&traj, &ctx);
        let (vel, drift, prog) = path_cost(&traj, &ctx);
        let (accel, yawr) = comfort_cost(&traj, &ctx.weights);
        let (lane, mdist, _) = maneuver_cost(&traj, &ctx);
        let prox = proximity_cost(&traj, &ctx);
        let terms = [vel, drift, prog, accel, yawr, lane, mdist, prox];
        assert!(terms.iter().all(|t| *t >= 0.0), "{terms:?}");
        let sum: f64 = terms.iter().sum();
        assert!((b.total - sum).abs() <= 1e-12 * sum.max(1.0));
    }
}

#[test]
fn pedestrians_cost_at_least_as_much_as_vehicles() {
    let fx = cost_fixture();
    let y = fx.ego.position.y;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let at = Vec2::new(rng.gen_range(55.0..95.0), y + rng.gen_range(-4.0..4.0));
        let cost = |kind| {
            let f = [obstacle(kind, at)];
            let ctx = context(&fx, &f, CostWeights::default());
            grid_trajectories(&fx).iter().map(|(_, t)| evaluate_cost(t, &ctx).0.total).collect::<Vec<_>>()
        };
        let (veh, cyc, ped) = (cost(NeighborType::Vehicle), cost(NeighborType::Cyclist), cost(NeighborType::Pedestrian));
        for i in 0..veh.len() {
            assert!(ped[i] >= cyc[i] && cyc[i] >= veh[i]);
        }
    }
}

#[test]
fn argmin_survives_weight_scaling() {
    let fx = cost_fixture();
    let y = fx.ego.position.y;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let forecasts =
            vec![obstacle(NeighborType::Pedestrian, Vec2::new(rng.gen_range(60.0..90.0), y + rng.gen_range(-3.0..3.0)))];
        let trajs = grid_trajectories(&fx);
        let pick = |w: CostWeights| {
            let ctx = context(&fx, &forecasts, w);
            let cands: Vec<CandidateControl> = trajs
                .iter()
                .map(|((v, phi), t)| CandidateControl {
                    feasible: true,
                    collision_free: true,
                    cost: Some(evaluate_cost(t, &ctx).0.total),
                    ..CandidateControl::new(*v, *phi, CandidateSource::Grid)
                })
                .collect();
            let best = select_best(&cands, 10.0, 0.0).unwrap();
            (best, cands.iter().map(|c| c.cost.unwrap()).collect::<Vec<_>>())
        };
        let (base, costs) = pick(CostWeights::default());
        for k in [0.5, 4.0, 1024.0] {
            assert_eq!(pick(scaled(CostWeights::default(), k)).0, base);
        }
        let k = rng.gen_range(0.01..100.0);
        let (other, _) = pick(scaled(CostWeights::default(), k));
        assert!((costs[other] - costs[base]).abs() <= 1e-12 * costs[base].max(1.0));
    }
}
