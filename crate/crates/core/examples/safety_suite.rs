//! Runs the whole safety suite with the dense sampling check enabled.
//!
//! `cargo run --release --example safety_suite`

use std::time::Instant;

use navplan::benchmarks::safety_suite;
use navplan::sim::{run_scenario, WorldOptions};

fn main() {
    let options = WorldOptions { verify_sampling: true, ..Default::default() };
    let start = Instant::now();
    let mut collisions = 0;
    println!("{:<26} {:>10} {:>7} {:>6} {:>6} {:>10} {:>9}", "scenario", "outcome", "t", "lanes", "stops", "clearance", "false+");
    for s in safety_suite() {
        let m = run_scenario(&s, None, options).unwrap().metrics;
        collisions += m.collisions;
        let clearance = m.min_clearance.values().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "{:<26} {:>10} {:>7.1} {:>6} {:>6} {:>10.2} {:>9}",
            m.scenario,
            format!("{:?}", m.outcome),
            m.sim_time,
            m.lane_changes.len(),
            m.stops.len(),
            clearance,
            m.soundness.map_or(0, |r| r.false_positives)
        );
    }
    println!("{collisions} collision(s) in {:.1?}", start.elapsed());
}
