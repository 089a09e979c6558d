//! A scenario written as JSON: a delivery van double-parked in the right lane
//! while a faster car comes up in the left lane.

use navplan::sim::{run_scenario, Scenario, WorldOptions};

const SCENARIO: &str = r#"{
  "name": "double-parked-van",
  "seed": 3,
  "duration": 40.0,
  "map": {
    "nodes": [
      {"id": "a", "position": [0.0, 0.0], "control": {"type": "none"}},
      {"id": "b", "position": [400.0, 0.0], "control": {"type": "none"}}
    ],
    "roads": [{
      "id": "main", "from": "a", "to": "b",
      "centerline": [[0.0, 0.0], [400.0, 0.0]],
      "lanes": [
        {"offset": -1.85, "width": 3.7, "speed_limit": 13.0},
        {"offset": 1.85, "width": 3.7, "speed_limit": 13.0}
      ]
    }]
  },
  "ego": {
    "vehicle": "hatchback",
    "start": {"road": "main", "lane": 0, "s": 10.0},
    "speed": 10.0,
    "goals": [{"road": "main", "lane": 0, "s": 350.0}]
  },
  "agents": [
    {"id": "van", "kind": "vehicle", "size": [6.0, 2.2],
     "motion": {"type": "static", "position": [120.0, -1.85], "heading": 0.0}},
    {"id": "passer", "kind": "vehicle",
     "motion": {"type": "lane_follow", "road": "main", "lane": 1, "s": 40.0, "speed": 11.0}}
  ]
}"#;

fn main() {
    let scenario = Scenario::from_json(SCENARIO, "double-parked-van.json").unwrap();
    let run = run_scenario(&scenario, None, WorldOptions::default()).unwrap();
    let m = &run.metrics;
    println!("{:?} at t={:.1}s", m.outcome, m.sim_time);
    println!("closest approach: {:?}", m.min_clearance);
    for lc in &m.lane_changes {
        println!("lane change {} at x={:.0}", lc.direction, lc.position[0]);
    }
    // Lateral position as the ego passes the van.
    for row in run.log.rows.iter().filter(|r| (r.x - 120.0).abs() < 0.2) {
        println!("at the van: y = {:.2}, speed {:.1} m/s", row.y, row.speed);
    }
}
