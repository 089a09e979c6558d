//! Runs one built-in scenario and writes its log and metrics.
//!
//! `cargo run --release --example run_scenario -- jaywalking out/`

use std::path::PathBuf;

use navplan::benchmarks;
use navplan::sim::{run_scenario, WorldOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "jaywalking".into());
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let Some(scenario) = benchmarks::by_name(&name) else {
        let names: Vec<String> = benchmarks::all().into_iter().map(|s| s.name).collect();
        eprintln!("unknown scenario '{name}'; choose from: {}", names.join(", "));
        std::process::exit(2);
    };

    let run = run_scenario(&scenario, None, WorldOptions::default()).unwrap();
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join(format!("{name}.csv")), run.log.to_csv()).unwrap();
    std::fs::write(dir.join(format!("{name}.json")), run.metrics.to_json()).unwrap();

    let m = &run.metrics;
    println!("{name}: {:?} after {:.1} s over {:.0} m", m.outcome, m.sim_time, m.distance);
    for (kind, d) in &m.min_clearance {
        println!("  closest {kind}: {d:.2} m");
    }
    for lc in &m.lane_changes {
        println!("  lane change {} at t={:.1} ({:.0}, {:.0})", lc.direction, lc.t, lc.position[0], lc.position[1]);
    }
    for s in &m.stops {
        println!("  stopped at t={:.1} for {:.1} s", s.t, s.duration);
    }
    println!("  behaviors: {:?}", m.behavior_timeline.iter().map(|(t, b)| format!("{t:.1}:{}", b.as_str())).collect::<Vec<_>>());
    println!("wrote {}", dir.display());
}
