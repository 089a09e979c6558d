//! Routes across the simulated city grid and lists the road transitions.

use navplan::benchmarks::city_map;
use navplan::road::{plan_route, LanePosition, RoadNetwork};

fn main() {
    let net = RoadNetwork::from_spec(&city_map()).unwrap();
    let lane = |road: &str| net.road_lane(road, 0).unwrap();
    let start = LanePosition { lane: lane("n00-n10"), s: 20.0 };
    let goal = LanePosition { lane: lane("n22-n12"), s: 100.0 };

    let route = plan_route(&net, start, goal).unwrap();
    let names: Vec<&str> = route.roads.iter().map(|&r| net.roads[r].name.as_str()).collect();
    println!("{} roads, {:.0} m: {}", names.len(), route.length, names.join(" -> "));
    for m in &route.maneuvers {
        println!(
            "  at {:>6.1} m  {:<12} {} -> {}",
            m.trigger_s,
            format!("{:?}", m.kind),
            net.roads[m.from_road].name,
            net.roads[m.to_road].name
        );
    }
}
