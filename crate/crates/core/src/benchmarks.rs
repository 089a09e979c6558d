//! Built-in benchmark scenarios.
//!
//! Each builder returns a ready-to-run [`Scenario`]. JSON copies live in
//! `crates/core/scenarios/` and are kept in sync by a test.

use crate::collision::NeighborType;
use crate::geom::Vec2;
use crate::road::{ControlSpec, LaneSpec, MapSpec, NodeSpec, PhaseSpec, RoadSpec};
use crate::sim::{
    AgentSpec, EgoSpec, LaneAction, LaneEvent, LaneRef, MotionSpec, PidConfig, Scenario, StartSpec, Trigger, VehicleChoice,
    PHYSICS_DT,
};

pub const LANE_WIDTH: f64 = 3.7;
pub const MPH: f64 = 0.44704;

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

/// `n` lanes of standard width centred on the reference line.
pub fn lanes(n: usize, limit: f64) -> Vec<LaneSpec> {
    let half = 0.5 * (n as f64 - 1.0);
    (0..n).map(|i| LaneSpec { offset: (i as f64 - half) * LANE_WIDTH, width: LANE_WIDTH, speed_limit: limit }).collect()
}

pub fn node(id: &str, p: Vec2) -> NodeSpec {
    NodeSpec { id: id.into(), position: p, control: ControlSpec::None }
}

pub fn road(id: &str, from: &str, to: &str, centerline: Vec<Vec2>, lanes: Vec<LaneSpec>) -> RoadSpec {
    RoadSpec { id: id.into(), from: from.into(), to: to.into(), centerline, lanes }
}

/// A straight one-way road along +x.
pub fn straight_map(length: f64, n_lanes: usize, limit: f64) -> MapSpec {
    MapSpec {
        nodes: vec![node("a", v(0.0, 0.0)), node("b", v(length, 0.0))],
        roads: vec![road("main", "a", "b", vec![v(0.0, 0.0), v(length, 0.0)], lanes(n_lanes, limit))],
    }
}

fn base(name: &str, description: &str, duration: f64, map: MapSpec, ego: EgoSpec) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        seed: 7,
        duration,
        dt: PHYSICS_DT,
        map: Some(map),
        ego,
        agents: Vec::new(),
        planner: Default::default(),
        weights: Default::default(),
        pid: PidConfig::default(),
    }
}

fn ego_on(road: &str, lane: usize, s: f64, speed: f64, goals: Vec<LaneRef>) -> EgoSpec {
    EgoSpec {
        vehicle: VehicleChoice::default(),
        plant: None,
        friction: None,
        start: StartSpec::Lane(LaneRef::new(road, lane, s)),
        speed,
        goals,
    }
}

fn lane_agent(id: &str, kind: NeighborType, road: &str, lane: usize, s: f64, speed: f64) -> AgentSpec {
    AgentSpec {
        id: id.into(),
        kind,
        size: None,
        motion: MotionSpec::LaneFollow { road: road.into(), lane, s, speed, lateral: 0.0, reactive: false, events: Vec::new() },
        jitter: 0.0,
    }
}

fn with_events(mut a: AgentSpec, new: Vec<LaneEvent>) -> AgentSpec {
    if let MotionSpec::LaneFollow { events, .. } = &mut a.motion {
        *events = new;
    }
    a
}

fn reactive(mut a: AgentSpec) -> AgentSpec {
    if let MotionSpec::LaneFollow { reactive, .. } = &mut a.motion {
        *reactive = true;
    }
    a
}

fn walker(id: &str, kind: NeighborType, waypoints: Vec<Vec2>, speed: f64, trigger: Trigger, jitter: f64) -> AgentSpec {
    AgentSpec {
        id: id.into(),
        kind,
        size: None,
        motion: MotionSpec::Path { waypoints, speed, accel: 2.0, trigger, stop_at_end: true },
        jitter,
    }
}

/// Empty straight road: the ego accelerates to the limit and holds its lane.
pub fn straight_road() -> Scenario {
    base(
        "straight-road",
        "Empty two-lane road; reach the limit and hold the lane.",
        70.0,
        straight_map(1000.0, 2, 20.0),
        ego_on("main", 0, 10.0, 0.0, vec![LaneRef::new("main", 0, 900.0)]),
    )
}

/// Walks a centerline from `start` as a sequence of `(length, curvature)`
/// pieces, sampled every meter.
pub fn trace(start: Vec2, heading: f64, pieces: &[(f64, f64)]) -> Vec<Vec2> {
    let (mut p, mut h) = (start, heading);
    let mut out = vec![p];
    for &(len, k) in pieces {
        let n = len.ceil().max(1.0) as usize;
        let ds = len / n as f64;
        for _ in 0..n {
            if k.abs() < 1e-12 {
                p += Vec2::from_angle(h) * ds;
            } else {
                let dh = k * ds;
                let chord = 2.0 * (0.5 * dh).sin() / k;
                p += Vec2::from_angle(h + 0.5 * dh) * chord;
                h += dh;
            }
            out.push(p);
        }
    }
    out
}

/// Slow cyclist in the right lane of a two-lane road.
pub fn passing_bicycle() -> Scenario {
    let mut s = base(
        "passing-bicycle",
        "A cyclist rides slowly near the edge of the right lane; pass it and continue.",
        60.0,
        straight_map(600.0, 2, 15.0),
        ego_on("main", 0, 10.0, 12.0, vec![LaneRef::new("main", 0, 560.0)]),
    );
    let mut bike = lane_agent("bicycle", NeighborType::Cyclist, "main", 0, 70.0, 4.0);
    if let MotionSpec::LaneFollow { lateral, .. } = &mut bike.motion {
        *lateral = -0.6;
    }
    s.agents.push(bike);
    s
}

/// The cyclist pass with steady traffic in the left lane.
pub fn passing_bicycle_traffic() -> Scenario {
    let mut s = passing_bicycle();
    s.name = "passing-bicycle-traffic".into();
    s.description = "A slow cyclist in the right lane while cars stream by in the left lane.".into();
    s.ego.start = StartSpec::Lane(LaneRef::new("main", 0, 60.0));
    for (i, at) in [20.0, 70.0, 120.0].iter().enumerate() {
        s.agents.push(lane_agent(&format!("car{i}"), NeighborType::Vehicle, "main", 1, *at, 14.0));
    }
    if let MotionSpec::LaneFollow { s: at, .. } = &mut s.agents[0].motion {
        *at = 120.0;
    }
    s
}

/// A pedestrian steps onto the road in front of the ego.
pub fn jaywalking() -> Scenario {
    let mut s = base(
        "jaywalking",
        "A pedestrian crosses both lanes ahead of the ego; stop or slow, then resume.",
        60.0,
        straight_map(500.0, 2, 30.0 * MPH),
        ego_on("main", 0, 10.0, 30.0 * MPH, vec![LaneRef::new("main", 0, 450.0)]),
    );
    s.agents.push(walker(
        "pedestrian",
        NeighborType::Pedestrian,
        vec![v(160.0, -6.0), v(160.0, 7.0)],
        1.4,
        Trigger::EgoWithin(40.0),
        2.0,
    ));
    s
}

/// The lead vehicle brakes hard; `traffic` adds a car in the left lane.
pub fn sudden_stop(traffic: bool) -> Scenario {
    let (name, description) = if traffic {
        ("sudden-stop-traffic", "The leader brakes hard while a car travels in the left lane.")
    } else {
        ("sudden-stop", "The leader brakes hard on an otherwise empty road.")
    };
    let mut s = base(
        name,
        description,
        60.0,
        straight_map(1200.0, 2, 25.0),
        ego_on("main", 0, 10.0, 25.0, vec![LaneRef::new("main", 0, 1100.0)]),
    );
    let brake = LaneEvent { trigger: Trigger::AtTime(5.0), action: LaneAction::SetSpeed { speed: 0.0, rate: 8.0 } };
    s.agents.push(with_events(lane_agent("leader", NeighborType::Vehicle, "main", 0, 45.0, 25.0), vec![brake]));
    if traffic {
        s.agents.push(lane_agent("left-car", NeighborType::Vehicle, "main", 1, 0.0, 26.0));
    }
    s
}

/// A queue of slow cars in the turning lane ahead of a right turn.
pub fn high_density_turn() -> Scenario {
    let map = MapSpec {
        nodes: vec![node("a", v(0.0, 0.0)), node("b", v(500.0, 0.0)), node("c", v(1000.0, 0.0)), node("d", v(500.0, -400.0))],
        roads: vec![
            road("main", "a", "b", vec![v(0.0, 0.0), v(485.0, 0.0)], lanes(2, 15.0)),
            road("onward", "b", "c", vec![v(515.0, 0.0), v(1000.0, 0.0)], lanes(2, 15.0)),
            road("side", "b", "d", vec![v(500.0, -15.0), v(500.0, -400.0)], lanes(2, 12.0)),
        ],
    };
    let mut s = base(
        "high-density-turn",
        "Slow traffic fills the outer lane; pass on the inner lane and return before turning right.",
        90.0,
        map,
        ego_on("main", 0, 10.0, 10.0, vec![LaneRef::new("side", 0, 200.0)]),
    );
    for i in 0..4 {
        let at = 40.0 + 14.0 * i as f64;
        s.agents.push(reactive(lane_agent(&format!("slow{i}"), NeighborType::Vehicle, "main", 0, at, 5.0)));
    }
    s
}

/// A car pulls out of a driveway ahead of the ego.
pub fn car_entering(speed_mph: f64, both_lanes: bool) -> Scenario {
    let speed = speed_mph * MPH;
    let name = format!("car-entering-{}mph-{}", speed_mph as u32, if both_lanes { "both" } else { "right" });
    let description = if both_lanes {
        "A car pulls out of a driveway and crosses both lanes ahead of the ego."
    } else {
        "A car pulls out of a driveway into the ego's lane."
    };
    let goal = (speed * 30.0).max(300.0);
    let mut s = base(
        &name,
        description,
        goal / speed + 30.0,
        straight_map(goal + 100.0, 2, speed),
        ego_on("main", 0, 10.0, speed, vec![LaneRef::new("main", 0, goal)]),
    );
    let x = 10.0 + speed * 6.0;
    let (waypoints, cruise, stop) = if both_lanes {
        (vec![v(x, -10.0), v(x, 12.0)], 6.0, true)
    } else {
        (vec![v(x, -10.0), v(x, -6.0), v(x + 3.0, -2.6), v(x + 8.0, -1.85), v(x + 400.0, -1.85)], (0.5 * speed).max(4.0), false)
    };
    let mut car = walker("entering-car", NeighborType::Vehicle, waypoints, cruise, Trigger::EgoWithin(speed * 3.5), 0.5);
    if let MotionSpec::Path { stop_at_end, .. } = &mut car.motion {
        *stop_at_end = stop;
    }
    s.agents.push(car);
    s
}

/// Every car-entering variant.
pub fn car_entering_all() -> Vec<Scenario> {
    let mut out = Vec::new();
    for mph in [10.0, 30.0, 50.0] {
        for both in [false, true] {
            out.push(car_entering(mph, both));
        }
    }
    out
}

/// Alternating tight curves on a single-lane road.
pub fn s_turns(vehicle: &str) -> Scenario {
    let r = 20.0;
    let q = std::f64::consts::FRAC_PI_2;
    let pts = trace(
        v(0.0, 0.0),
        0.0,
        &[(60.0, 0.0), (r * q, 1.0 / r), (r * q, -1.0 / r), (r * q, -1.0 / r), (r * q, 1.0 / r), (80.0, 0.0)],
    );
    let end = *pts.last().unwrap();
    let map = MapSpec {
        nodes: vec![node("a", v(0.0, 0.0)), node("b", end)],
        roads: vec![road("course", "a", "b", pts, lanes(1, 25.0))],
    };
    let mut s = base(
        "s-turns",
        "Four tight curves in alternating directions; cornering speed follows the vehicle's slip limits.",
        60.0,
        map,
        ego_on("course", 0, 5.0, 10.0, Vec::new()),
    );
    let len = crate::geom::Polyline::new(s.map.as_ref().unwrap().roads[0].centerline.clone()).expect("valid centerline").length();
    s.ego.goals = vec![LaneRef::new("course", 0, len - 20.0)];
    s.ego.vehicle = VehicleChoice::Preset(vehicle.into());
    if vehicle != "hatchback" {
        s.name = format!("s-turns-{vehicle}");
    }
    s
}

/// A 3×3 grid of two-way streets with a stoplight in the centre and
/// all-way stops elsewhere.
pub fn city_map() -> MapSpec {
    let spacing = 200.0;
    let setback = 15.0;
    let name = |i: usize, j: usize| format!("n{i}{j}");
    let mut nodes = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let mut n = node(&name(i, j), v(i as f64 * spacing, j as f64 * spacing));
            let degree = [i, j].iter().filter(|&&k| k == 1).count();
            if i == 1 && j == 1 {
                n.control = ControlSpec::Stoplight {
                    phases: vec![
                        PhaseSpec { green: vec!["n01-n11".into(), "n21-n11".into()], duration: 15.0, amber: 3.0 },
                        PhaseSpec { green: vec!["n10-n11".into(), "n12-n11".into()], duration: 15.0, amber: 3.0 },
                    ],
                    offset: 0.0,
                };
            } else if degree == 1 {
                n.control = ControlSpec::AllWayStop;
            }
            nodes.push(n);
        }
    }
    let mut roads = Vec::new();
    let mut link = |a: (usize, usize), b: (usize, usize)| {
        for (from, to) in [(a, b), (b, a)] {
            let p = v(from.0 as f64 * spacing, from.1 as f64 * spacing);
            let q = v(to.0 as f64 * spacing, to.1 as f64 * spacing);
            let d = (q - p).normalized();
            let right = v(d.y, -d.x) * (0.5 * LANE_WIDTH);
            let id = format!("{}-{}", name(from.0, from.1), name(to.0, to.1));
            roads.push(road(
                &id,
                &name(from.0, from.1),
                &name(to.0, to.1),
                vec![p + d * setback + right, q - d * setback + right],
                lanes(1, 12.0),
            ));
        }
    };
    for i in 0..3 {
        for j in 0..3 {
            if i + 1 < 3 {
                link((i, j), (i + 1, j));
            }
            if j + 1 < 3 {
                link((i, j), (i, j + 1));
            }
        }
    }
    MapSpec { nodes, roads }
}

/// A loop through the grid with signals, stop signs, traffic and a
/// pedestrian.
pub fn city_loop() -> Scenario {
    let mut s = base(
        "city-loop",
        "Drive a loop through a small grid of streets with a stoplight, all-way stops and traffic.",
        320.0,
        city_map(),
        ego_on("n00-n10", 0, 20.0, 0.0, Vec::new()),
    );
    s.ego.goals = vec![LaneRef::new("n11-n21", 0, 100.0), LaneRef::new("n22-n12", 0, 100.0), LaneRef::new("n01-n00", 0, 100.0)];
    let traffic = [
        ("n10-n11", 30.0),
        ("n21-n11", 60.0),
        ("n12-n11", 20.0),
        ("n01-n11", 90.0),
        ("n22-n21", 40.0),
        ("n02-n12", 50.0),
        ("n10-n00", 100.0),
    ];
    for (k, (road, at)) in traffic.iter().enumerate() {
        s.agents.push(reactive(lane_agent(&format!("car{k}"), NeighborType::Vehicle, road, 0, *at, 10.0)));
    }
    s.agents.push(walker(
        "pedestrian",
        NeighborType::Pedestrian,
        vec![v(300.0, 205.0), v(300.0, 191.0)],
        1.4,
        Trigger::EgoWithin(45.0),
        1.0,
    ));
    s
}

/// Ego parked on top of an obstruction: a collision is unavoidable.
pub fn overlap_fixture() -> Scenario {
    let mut s = base(
        "overlap-fixture",
        "The ego starts overlapping a parked obstruction.",
        5.0,
        straight_map(200.0, 1, 10.0),
        ego_on("main", 0, 20.0, 0.0, vec![LaneRef::new("main", 0, 150.0)]),
    );
    s.agents.push(AgentSpec {
        id: "parked".into(),
        kind: NeighborType::Obstruction,
        size: None,
        motion: MotionSpec::Static { position: v(21.0, 0.0), heading: 0.0 },
        jitter: 0.0,
    });
    s
}

/// The safety suite, including every listed variant.
pub fn safety_suite() -> Vec<Scenario> {
    let mut out = vec![passing_bicycle(), passing_bicycle_traffic(), jaywalking(), sudden_stop(false), sudden_stop(true)];
    out.push(high_density_turn());
    out.extend(car_entering_all());
    out.push(s_turns("hatchback"));
    out.push(city_loop());
    out
}

/// Every built-in scenario by name.
pub fn all() -> Vec<Scenario> {
    let mut out = vec![straight_road()];
    out.extend(safety_suite());
    out.push(s_turns("sports_car"));
    out.push(s_turns("suv"));
    out.push(overlap_fixture());
    out
}

pub fn by_name(name: &str) -> Option<Scenario> {
    all().into_iter().find(|s| s.name == name)
}
