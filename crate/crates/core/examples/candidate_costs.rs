//! Candidate controls of one planning cycle while overtaking a cyclist.
//!
//! `cargo run --example candidate_costs -- 5.0` prints the cheapest safe
//! candidates of the cycle nearest to t = 5 s and the counts of rejected ones.

use navplan::benchmarks::passing_bicycle;
use navplan::sim::{run_scenario, WorldOptions};

fn main() {
    let at: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5.0);
    let mut scenario = passing_bicycle();
    scenario.duration = at + 0.2;
    let run = run_scenario(&scenario, None, WorldOptions { dump_costs: true, ..Default::default() }).unwrap();

    let mut lines = run.cost_dump.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let t_of = |r: &Vec<&str>| r[col("t")].parse::<f64>().unwrap();
    let cycle = rows.iter().map(t_of).min_by(|a, b| (a - at).abs().total_cmp(&(b - at).abs())).unwrap();
    let mut here: Vec<&Vec<&str>> = rows.iter().filter(|r| t_of(r) == cycle).collect();

    let infeasible = here.iter().filter(|r| r[col("feasible")] == "0").count();
    let colliding = here.iter().filter(|r| r[col("feasible")] == "1" && r[col("collision_free")] == "0").count();
    println!("cycle t={cycle:.2}: {} candidates, {infeasible} infeasible, {colliding} colliding", here.len());

    here.retain(|r| r[col("collision_free")] == "1");
    here.sort_by(|a, b| {
        let c = |r: &&Vec<&str>| r[col("total")].parse::<f64>().unwrap();
        c(a).total_cmp(&c(b))
    });
    println!("{:>8} {:>7} {:>8} {:>8} {:>8} {:>8} {:>6}", "source", "v", "phi", "total", "drift", "prog", "lane");
    for r in here.iter().take(8) {
        let f = |name: &str| r[col(name)].parse::<f64>().unwrap();
        println!(
            "{:>8} {:>7.2} {:>8.4} {:>8.3} {:>8.3} {:>8.3} {:>6.2}",
            r[col("source")],
            f("target_speed"),
            f("target_steering"),
            f("total"),
            f("drift"),
            f("prog"),
            f("lane")
        );
    }
}
