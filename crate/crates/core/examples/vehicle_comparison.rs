//! The same S-turn road driven by each preset vehicle.

use navplan::benchmarks::s_turns;
use navplan::sim::{run_scenario, WorldOptions};

fn main() {
    for vehicle in ["hatchback", "sports_car", "suv"] {
        let m = run_scenario(&s_turns(vehicle), None, WorldOptions::default()).unwrap().metrics;
        println!(
            "{vehicle:<11} {:?} in {:>5.1} s, slowest cornering {:.2} m/s",
            m.outcome,
            m.sim_time,
            m.min_cornering_speed.unwrap_or(f64::NAN)
        );
    }
}
