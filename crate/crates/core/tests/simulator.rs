use navplan::benchmarks::{self, lanes, node, road};
use navplan::dynamics::{build_profile, PlantModel};
use navplan::geom::Vec2;
use navplan::road::network::{ControlSpec, MapSpec, PhaseSpec};
use navplan::sim::{run_scenario, LaneRef, PidController, PidGains, RunOutcome, RunResult, Scenario, WorldOptions, PHYSICS_DT};
use navplan::vehicle::{step, Controls, VehicleParams, VehicleState};
use proptest::prelude::*;

fn run(s: &Scenario) -> RunResult {
    run_scenario(s, None, WorldOptions::default()).unwrap()
}

proptest! {
    #[test]
    fn pid_output_and_integral_stay_bounded(
        kp in 0.0..20.0f64, ki in 0.0..5.0f64, kd in 0.0..2.0f64, limit in 0.1..10.0f64,
        steps in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..200),
    ) {
        let mut pid = PidController::new(PidGains { kp, ki, kd, integral_limit: limit });
        for (target, current) in steps {
            let u = pid.update(target, current, PHYSICS_DT);
            prop_assert!((-1.0..=1.0).contains(&u));
            prop_assert!(pid.integral.abs() <= limit + 1e-12);
        }
    }
}

#[test]
fn speed_loop_step_response() {
    let params = VehicleParams::hatchback();
    let (profile, _) = build_profile(&PlantModel::hatchback(), &params).unwrap();
    let mut pid = PidController::new(PidGains::speed());
    let mut s = VehicleState::new(Vec2::ZERO, 0.0, 10.0);
    let (target, step_size) = (15.0, 5.0);
    let (mut peak, mut settled_at, mut t) = (0.0f64, None, 0.0);
    while t < 8.0 {
        let u = Controls::new(pid.update(target, s.speed, PHYSICS_DT), 0.0);
        s = step(&s, &params, &profile, u, PHYSICS_DT);
        t += PHYSICS_DT;
        peak = peak.max(s.speed);
        match ((s.speed - target).abs() <= 0.02 * step_size, settled_at) {
            (true, None) => settled_at = Some(t),
            (false, Some(_)) => settled_at = None,
            _ => {}
        }
    }
    let overshoot = (peak - target).max(0.0) / step_size;
    assert!(overshoot <= 0.05, "overshoot {overshoot}");
    let ts = settled_at.expect("never settled");
    assert!(ts <= 3.0, "settled after {ts} s");
}

#[test]
fn idle_ego_without_goal_stays_put() {
    let mut s = benchmarks::straight_road();
    s.ego.goals.clear();
    s.ego.speed = 0.0;
    s.duration = 5.0;
    let r = run(&s);
    let first = &r.log.rows[0];
    for row in &r.log.rows {
        assert_eq!((row.x, row.y, row.heading, row.speed), (first.x, first.y, first.heading, 0.0));
    }
    assert_eq!(r.metrics.collisions, 0);
}

#[test]
fn straight_road_reaches_limit_without_drift() {
    let s = benchmarks::straight_road();
    let r = run(&s);
    assert_eq!(r.metrics.outcome, RunOutcome::Completed);
    let limit = s.map.as_ref().unwrap().roads[0].lanes[0].speed_limit;
    let y0 = r.log.rows[0].y;
    let top = r.log.rows.iter().map(|row| row.speed).fold(0.0, f64::max);
    assert!(top >= 0.95 * limit && top <= limit * 1.02, "top speed {top} vs limit {limit}");
    let drift = r.log.rows.iter().map(|row| (row.y - y0).abs()).fold(0.0, f64::max);
    assert!(drift < 0.1, "lateral drift {drift}");
    let ticks: Vec<f64> = r.log.rows.windows(2).map(|w| w[1].t - w[0].t).collect();
    assert!(ticks.iter().all(|d| (d - ticks[0]).abs() < 1e-9));
}

#[test]
fn red_light_stops_ego_at_the_line() {
    let mut s = benchmarks::straight_road();
    s.name = "red-light".into();
    s.map = Some(MapSpec {
        nodes: vec![
            node("a", Vec2::new(0.0, 0.0)),
            navplan::road::network::NodeSpec {
                control: ControlSpec::Stoplight {
                    phases: vec![PhaseSpec { green: vec![], duration: 1000.0, amber: 0.0 }],
                    offset: 0.0,
                },
                ..node("x", Vec2::new(200.0, 0.0))
            },
            node("b", Vec2::new(400.0, 0.0)),
        ],
        roads: vec![
            road("in", "a", "x", vec![Vec2::new(0.0, 0.0), Vec2::new(192.0, 0.0)], lanes(1, 12.0)),
            road("out", "x", "b", vec![Vec2::new(208.0, 0.0), Vec2::new(400.0, 0.0)], lanes(1, 12.0)),
        ],
    });
    s.ego.start = navplan::sim::StartSpec::Lane(LaneRef::new("in", 0, 20.0));
    s.ego.speed = 10.0;
    s.ego.goals = vec![LaneRef::new("out", 0, 150.0)];
    s.duration = 40.0;
    let r = run(&s);
    assert_eq!(r.metrics.outcome, RunOutcome::Timeout);
    let last = r.log.rows.last().unwrap();
    assert!(last.speed < 1e-9, "still moving at {}", last.speed);
    // The front bumper holds half a meter behind the line.
    let half = 0.5 * VehicleParams::hatchback().length;
    let furthest = r.log.rows.iter().map(|row| row.x + half).fold(f64::MIN, f64::max);
    assert!(furthest < 192.0, "front crossed the line to {furthest}");
    let gap = (191.5 - (last.x + half)).abs();
    assert!(gap < 0.5, "stopped {gap} m from the stop point");
}

#[test]
fn identical_seeds_give_identical_logs() {
    let s = benchmarks::jaywalking();
    let (a, b) = (run(&s), run(&s));
    assert_eq!(a.log.to_csv(), b.log.to_csv());
    assert_eq!(a.metrics.lane_changes, b.metrics.lane_changes);
    let mut other = s.clone();
    other.seed += 1;
    assert_ne!(run(&other).log.to_csv(), a.log.to_csv());
}

#[test]
fn jaywalking_and_sudden_stop_run_clean() {
    for s in [benchmarks::jaywalking(), benchmarks::sudden_stop(false)] {
        let r = run_scenario(&s, None, WorldOptions { verify_sampling: true, dump_costs: false }).unwrap();
        let m = &r.metrics;
        assert_eq!(m.outcome, RunOutcome::Completed, "{}", s.name);
        assert_eq!(m.collisions, 0);
        assert!(m.max_tracking_error < 0.2, "{}: tracking error {}", s.name, m.max_tracking_error);
        assert!(m.max_envelope_excess <= 1e-6, "{}: envelope excess {}", s.name, m.max_envelope_excess);
        assert_eq!(m.soundness.unwrap().false_positives, 0);
        assert!(r.log.rows.iter().all(|row| !row.collision));
    }
}
