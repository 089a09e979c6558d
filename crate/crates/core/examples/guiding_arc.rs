//! Guiding arcs along the S-turn road.
//!
//! At several points on the road the ego samples lane waypoints, fits the
//! circle through its position, the median and the last waypoint, and reads
//! off the target speed and steering.

use navplan::benchmarks::s_turns;
use navplan::dynamics::{build_profile, PlantModel};
use navplan::guiding::{compute_guiding_arc, sample_waypoints};
use navplan::road::{LanePath, RoadNetwork};
use navplan::vehicle::VehicleParams;

fn main() {
    let scenario = s_turns("hatchback");
    let net = RoadNetwork::from_spec(scenario.map.as_ref().unwrap()).unwrap();
    let lane = net.road_lane("course", 0).unwrap();
    let params = VehicleParams::hatchback();
    let (profile, _) = build_profile(&PlantModel::hatchback(), &params).unwrap();

    let path = LanePath::single(&net, lane);
    let (tau, speed, limit) = (2.0, 10.0, 25.0);
    println!("{:>6} {:>10} {:>10} {:>10} {:>9}", "s", "radius", "v'", "phi'", "reflected");
    let mut s = 0.0;
    while s < path.length() - 30.0 {
        let p = path.line.point_at(s);
        let heading = path.line.heading_at(s);
        let wp = sample_waypoints(&path, p, tau, 7, speed).unwrap();
        let g = compute_guiding_arc(p, heading, &wp, &params, &profile, limit);
        let radius = g.geometry.radius().map_or("straight".to_string(), |r| format!("{r:.1}"));
        println!("{s:>6.0} {radius:>10} {:>10.2} {:>10.4} {:>9}", g.target_speed, g.target_steering, g.reflected);
        s += 15.0;
    }
}
