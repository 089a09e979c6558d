//! Planner timing against neighbor count and candidate count.
//!
//! Timings depend on the machine; build with `--release`.

use navplan::timing::{candidate_sweep, linear_fit, neighbor_sweep};

fn main() {
    let counts: Vec<usize> = (1..=10).map(|i| 5 * i).collect();
    let rows = neighbor_sweep(&counts, 1).unwrap();
    println!("{:>9} {:>14} {:>10}", "neighbors", "collision (us)", "plan (us)");
    for r in &rows {
        println!("{:>9} {:>14.0} {:>10.0}", r.x, r.collision_us, r.plan_us);
    }
    let f = linear_fit(&rows.iter().map(|r| (r.x, r.collision_us)).collect::<Vec<_>>()).unwrap();
    println!("collision check: {:.1} us per neighbor, R^2 = {:.4}\n", f.slope, f.r2);

    let rows = candidate_sweep(&[3, 5, 7, 9, 11, 13, 15], 1).unwrap();
    println!("{:>10} {:>10}", "evaluated", "cost (us)");
    for r in &rows {
        println!("{:>10} {:>10.0}", r.x, r.cost_us);
    }
    let f = linear_fit(&rows.iter().map(|r| (r.x, r.cost_us)).collect::<Vec<_>>()).unwrap();
    println!("cost evaluation: {:.2} us per candidate, R^2 = {:.4}", f.slope, f.r2);
}
