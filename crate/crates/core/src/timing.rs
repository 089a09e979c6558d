//! Planner timing sweeps: collision-check time against neighbor count and
//! cost-evaluation time against candidate count.
//!
//! Each sweep point is a short closed-loop run of a synthetic scenario. A row
//! holds the median over its planning cycles so that one slow cycle does not
//! dominate the fit.

use serde::{Deserialize, Serialize};

use crate::benchmarks;
use crate::collision::NeighborType;
use crate::sim::{run_scenario, AgentSpec, MotionSpec, PlanTiming, Scenario, WorldOptions};
use crate::Error;

/// Ordinary least squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits `y = slope·x + intercept`. Needs two distinct `x` values.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LinearFit { slope, intercept, r2 })
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// One sweep measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Swept quantity: neighbors in sensing range or candidates per cycle.
    pub x: f64,
    pub repeat: usize,
    pub plan_us: f64,
    pub collision_us: f64,
    pub cost_us: f64,
}

/// Cars in the four lanes flanking the ego on a five-lane road, all moving
/// with the ego so that the neighbor count stays fixed during the run.
pub fn neighbor_field(n: usize) -> Scenario {
    let speed = 15.0;
    let ego_s = 200.0;
    let mut s = benchmarks::straight_road();
    s.name = format!("neighbor-field-{n}");
    s.description = format!("{n} cars pacing the ego in the flanking lanes.");
    s.map = Some(benchmarks::straight_map(3000.0, 5, speed));
    s.ego.start = crate::sim::StartSpec::Lane(crate::sim::LaneRef::new("main", 2, ego_s));
    s.ego.speed = speed;
    s.ego.goals = vec![crate::sim::LaneRef::new("main", 2, 2900.0)];
    s.duration = 3.0;
    let lanes = [0usize, 4, 1, 3];
    s.agents = (0..n)
        .map(|k| {
            let row = (k / lanes.len()) as f64;
            let ahead = if (row as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
            AgentSpec {
                id: format!("car{k}"),
                kind: NeighborType::Vehicle,
                size: None,
                motion: MotionSpec::LaneFollow {
                    road: "main".into(),
                    lane: lanes[k % lanes.len()],
                    s: ego_s + ahead * (6.0 + 11.0 * (row / 2.0).ceil()),
                    speed,
                    lateral: 0.0,
                    reactive: false,
                    events: Vec::new(),
                },
                jitter: 0.0,
            }
        })
        .collect();
    s
}

/// The ego alone on an open road with a `grid × grid` candidate grid.
pub fn candidate_grid(grid: usize) -> Scenario {
    let mut s = neighbor_field(8);
    s.name = format!("candidate-grid-{grid}");
    s.description = format!("Open road planned with a {grid}x{grid} candidate grid.");
    s.planner.grid_speed = grid;
    s.planner.grid_steer = grid;
    s
}

fn sweep_point(scenario: &Scenario, repeat: usize, x: impl Fn(&PlanTiming) -> f64) -> Result<SweepRow, Error> {
    let result = run_scenario(scenario, None, WorldOptions::default())?;
    // The first cycle pays for warm-up.
    let cycles: Vec<&PlanTiming> = result.timings.iter().skip(1).collect();
    let col = |f: &dyn Fn(&PlanTiming) -> f64| median(&mut cycles.iter().map(|t| f(t)).collect::<Vec<_>>());
    Ok(SweepRow {
        x: col(&x),
        repeat,
        plan_us: col(&|t| t.plan_us),
        collision_us: col(&|t| t.collision_us),
        cost_us: col(&|t| t.cost_us),
    })
}

/// Collision-check timing for each neighbor count, `repeat` rows per count.
/// Repeats are interleaved so slow stretches of wall time spread across counts.
pub fn neighbor_sweep(counts: &[usize], repeat: usize) -> Result<Vec<SweepRow>, Error> {
    let scenarios: Vec<Scenario> = counts.iter().map(|&n| neighbor_field(n)).collect();
    sweep(&scenarios, repeat, |t| t.neighbors as f64)
}

/// Cost-evaluation timing for each grid size, `repeat` rows per size. The
/// swept quantity is the number of candidates that reached the cost.
pub fn candidate_sweep(grids: &[usize], repeat: usize) -> Result<Vec<SweepRow>, Error> {
    let scenarios: Vec<Scenario> = grids.iter().map(|&g| candidate_grid(g)).collect();
    sweep(&scenarios, repeat, |t| t.evaluated as f64)
}

fn sweep(scenarios: &[Scenario], repeat: usize, x: impl Fn(&PlanTiming) -> f64 + Copy) -> Result<Vec<SweepRow>, Error> {
    if let Some(first) = scenarios.first() {
        sweep_point(first, 0, x)?;
    }
    let mut rows = Vec::with_capacity(scenarios.len() * repeat);
    for r in 0..repeat {
        for s in scenarios {
            rows.push(sweep_point(s, r, x)?);
        }
    }
    Ok(rows)
}

/// `(x, median y)` for each distinct `x`, in ascending `x`.
pub fn median_by_x(rows: &[SweepRow], y: impl Fn(&SweepRow) -> f64) -> Vec<(f64, f64)> {
    let mut xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter().map(|x| (x, median(&mut rows.iter().filter(|r| r.x == x).map(&y).collect::<Vec<_>>()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        let f = linear_fit(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn medians_grouped_by_x() {
        let row = |x: f64, y: f64| SweepRow { x, repeat: 0, plan_us: y, collision_us: y, cost_us: y };
        let rows = [row(2.0, 5.0), row(1.0, 1.0), row(2.0, 9.0), row(1.0, 3.0), row(2.0, 6.0)];
        assert_eq!(median_by_x(&rows, |r| r.cost_us), vec![(1.0, 2.0), (2.0, 6.0)]);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn field_has_requested_neighbors_without_overlap() {
        for n in [5, 20, 50] {
            let s = neighbor_field(n);
            assert_eq!(s.agents.len(), n);
            let mut slots: Vec<(usize, i64)> = s
                .agents
                .iter()
                .map(|a| match &a.motion {
                    MotionSpec::LaneFollow { lane, s, .. } => (*lane, *s as i64),
                    _ => unreachable!(),
                })
                .collect();
            slots.sort();
            slots.dedup();
            assert_eq!(slots.len(), n);
        }
    }
}
