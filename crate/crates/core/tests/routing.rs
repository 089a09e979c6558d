use std::collections::{BTreeSet, VecDeque};

use navplan::geom::Vec2;
use navplan::road::network::{LanePosition, LaneSpec, MapSpec, NodeSpec, RoadSpec};
use navplan::road::{fsm_transition, plan_route, BehaviorLabel, FsmEvent, RoadNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Graph {
    spec: MapSpec,
    /// Straight reference lines as (start, end).
    lines: Vec<(Vec2, Vec2)>,
    ends: Vec<(usize, usize)>,
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n_nodes = rng.gen_range(2..=12);
    let mut cells = BTreeSet::new();
    while cells.len() < n_nodes {
        cells.insert((rng.gen_range(0..8), rng.gen_range(0..8)));
    }
    let pos: Vec<Vec2> = cells.iter().map(|&(i, j)| Vec2::new(60.0 * i as f64, 60.0 * j as f64)).collect();
    let nodes = (0..n_nodes).map(|i| NodeSpec { id: format!("n{i}"), position: pos[i], control: Default::default() }).collect();
    let n_roads = rng.gen_range(1..=50);
    let mut roads = Vec::new();
    let mut lines = Vec::new();
    let mut ends = Vec::new();
    for k in 0..n_roads {
        let a = rng.gen_range(0..n_nodes);
        let mut b = rng.gen_range(0..n_nodes - 1);
        if b >= a {
            b += 1;
        }
        let d = (pos[b] - pos[a]).normalized();
        let (p, q) = (pos[a] + d * 5.0, pos[b] - d * 5.0);
        roads.push(RoadSpec {
            id: format!("r{k}"),
            from: format!("n{a}"),
            to: format!("n{b}"),
            centerline: vec![p, q],
            lanes: vec![LaneSpec { offset: 0.0, width: 3.5, speed_limit: 15.0 }],
        });
        lines.push((p, q));
        ends.push((a, b));
    }
    Graph { spec: MapSpec { nodes, roads }, lines, ends }
}

/// Dijkstra over road entries using only the map geometry: a road may follow
/// another when it leaves the node the first one enters, unless the turn is a
/// U-turn.
fn dijkstra_length(g: &Graph, rs: usize, start_s: f64, rg: usize, goal_s: f64) -> Option<f64> {
    let len = |r: usize| g.lines[r].0.distance(g.lines[r].1);
    if rs == rg && goal_s >= start_s {
        return Some(goal_s - start_s);
    }
    let heading = |r: usize| (g.lines[r].1 - g.lines[r].0).angle();
    let follows = |a: usize, b: usize| {
        let mut turn = (heading(b) - heading(a)).rem_euclid(std::f64::consts::TAU);
        if turn > std::f64::consts::PI {
            turn -= std::f64::consts::TAU;
        }
        g.ends[a].1 == g.ends[b].0 && turn.abs() <= 165f64.to_radians()
    };
    let n = g.lines.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    for q in 0..n {
        if follows(rs, q) {
            dist[q] = dist[q].min(len(rs) - start_s + g.lines[rs].1.distance(g.lines[q].0));
        }
    }
    while let Some(r) = (0..n).filter(|&r| !done[r] && dist[r].is_finite()).min_by(|&a, &b| dist[a].total_cmp(&dist[b])) {
        done[r] = true;
        for q in 0..n {
            if follows(r, q) {
                let d = dist[r] + len(r) + g.lines[r].1.distance(g.lines[q].0);
                if d < dist[q] {
                    dist[q] = d;
                }
            }
        }
    }
    dist[rg].is_finite().then(|| dist[rg] + goal_s)
}

#[test]
fn astar_matches_dijkstra_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut routed = 0;
    for case in 0..100 {
        let g = random_graph(&mut rng);
        let net = RoadNetwork::from_spec(&g.spec).unwrap();
        let rs = rng.gen_range(0..g.lines.len());
        let rg = rng.gen_range(0..g.lines.len());
        let start_s = rng.gen_range(0.0..net.roads[rs].length());
        let goal_s = rng.gen_range(0.0..net.roads[rg].length());
        let start = LanePosition { lane: net.roads[rs].lanes[0], s: start_s };
        let goal = LanePosition { lane: net.roads[rg].lanes[0], s: goal_s };
        let expected = dijkstra_length(&g, rs, start_s, rg, goal_s);
        match (plan_route(&net, start, goal), expected) {
            (Ok(plan), Some(len)) => {
                assert!((plan.length - len).abs() < 1e-6 * len.max(1.0), "case {case}: {} vs {len}", plan.length);
                assert_eq!(plan.roads.first(), Some(&rs));
                assert_eq!(plan.roads.last(), Some(&rg));
                routed += 1;
            }
            (Err(_), None) => {}
            (got, want) => panic!("case {case}: planner {:?} vs oracle {want:?}", got.map(|p| p.length)),
        }
    }
    assert!(routed > 20, "only {routed} routable cases");
}

#[test]
fn maneuver_triggers_increase_along_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..200 {
        let g = random_graph(&mut rng);
        let net = RoadNetwork::from_spec(&g.spec).unwrap();
        let rs = rng.gen_range(0..g.lines.len());
        let rg = rng.gen_range(0..g.lines.len());
        let start = LanePosition { lane: net.roads[rs].lanes[0], s: 0.0 };
        let goal = LanePosition { lane: net.roads[rg].lanes[0], s: net.roads[rg].length() };
        let Ok(plan) = plan_route(&net, start, goal) else { continue };
        assert_eq!(plan.maneuvers.len(), plan.roads.len() - 1);
        for w in plan.maneuvers.windows(2) {
            assert!(w[1].trigger_s > w[0].trigger_s);
        }
        for (m, r) in plan.maneuvers.iter().zip(plan.roads.windows(2)) {
            assert_eq!((m.from_road, m.to_road), (r[0], r[1]));
            assert!(m.trigger_s <= plan.length + 1e-9);
        }
        checked += plan.maneuvers.len();
    }
    assert!(checked > 20);
}

#[test]
fn every_behavior_is_reachable_and_can_return() {
    let reach = |from: BehaviorLabel| {
        let mut seen = BTreeSet::from([from.as_str()]);
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            for e in FsmEvent::ALL {
                let next = fsm_transition(s, e);
                if seen.insert(next.as_str()) {
                    queue.push_back(next);
                }
            }
        }
        seen
    };
    let all: BTreeSet<_> = BehaviorLabel::ALL.iter().map(|b| b.as_str()).collect();
    assert_eq!(reach(BehaviorLabel::DrivingStraight), all);
    for b in BehaviorLabel::ALL {
        assert!(reach(b).contains("driving_straight"), "{} is a trap", b.as_str());
    }
}
