use super::candidates::{PlannerConfig, TrajSample};
use super::predict::{Forecast, NeighborType};
use crate::geom::{minkowski_sum, wrap_angle, ConvexPolygon};
use crate::sim::pid::PidPair;
use crate::vehicle::{effective_accel, step, yaw_rate, Controls, Dynamics, VehicleParams, VehicleState};

/// Forward-simulates the ego tracking `(v_c, φ_c)` with a copy of its PID
/// loops. Returns `samples` states evenly spaced over `[0, tau]`, each
/// interval integrated in `substeps` RK4 steps.
#[allow(clippy::too_many_arguments)]
pub fn rollout<D: Dynamics + ?Sized>(
    ego: &VehicleState,
    pid: &PidPair,
    params: &VehicleParams,
    dynamics: &D,
    target: (f64, f64),
    tau: f64,
    samples: usize,
    substeps: usize,
) -> Vec<TrajSample> {
    let mut pid = *pid;
    let mut s = *ego;
    let h = tau / (samples - 1) as f64 / substeps as f64;
    let mut out = Vec::with_capacity(samples);
    let controls = |pid: &mut PidPair, s: &VehicleState| {
        Controls::new(pid.speed.update(target.0, s.speed, h), pid.steering.update(target.1, s.steering, h))
    };
    let record = |s: &VehicleState, u: Controls, t: f64| TrajSample {
        t,
        position: s.position,
        heading: s.heading,
        speed: s.speed,
        steering: s.steering,
        accel: effective_accel(dynamics, s.speed, u.throttle),
        yaw_rate: yaw_rate(s.speed, s.steering, params),
    };
    for i in 0..samples {
        let t = tau * i as f64 / (samples - 1) as f64;
        if i + 1 == samples {
            let mut probe = pid;
            let u = controls(&mut probe, &s);
            out.push(record(&s, u, t));
            break;
        }
        for j in 0..substeps {
            let u = controls(&mut pid, &s);
            if j == 0 {
                out.push(record(&s, u, t));
            }
            s = step(&s, params, dynamics, u, h);
        }
    }
    out
}

pub fn clearance_for(cfg: &PlannerConfig, kind: NeighborType) -> f64 {
    match kind {
        NeighborType::Vehicle => cfg.clearance_vehicle,
        NeighborType::Pedestrian => cfg.clearance_pedestrian,
        NeighborType::Cyclist => cfg.clearance_cyclist,
        NeighborType::Obstruction => cfg.clearance_obstruction,
    }
}

/// Result of checking one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub free: bool,
    /// Smallest footprint distance minus required clearance over all samples.
    pub margin: f64,
}

/// Samples the trajectory against every forecast. A sample collides when the
/// ego reference point lies within `clearance + δ` of the configuration
/// obstacle `O_n ⊕ (−O_e)`. With `inflate`, `δ` bounds the relative motion
/// between neighboring samples so that a clear verdict also holds between
/// them; without it the check is the plain per-instant test.
pub fn check_trajectory(
    traj: &[TrajSample],
    ego_shape: &ConvexPolygon,
    forecasts: &[Forecast],
    cfg: &PlannerConfig,
    inflate: bool,
) -> CheckOutcome {
    let re = ego_shape.circumradius();
    let mut margin = f64::INFINITY;
    for f in forecasts {
        let clearance = clearance_for(cfg, f.neighbor.kind);
        let poses: Vec<_> = traj.iter().map(|s| f.pose_at(s.t)).collect();
        let interval = |i: usize| {
            let (a, b) = (&traj[i], &traj[i + 1]);
            let chord = ((b.position - poses[i + 1].position) - (a.position - poses[i].position)).norm();
            0.5 * 1.25 * chord
                + 0.5 * wrap_angle(b.heading - a.heading).abs() * re
                + 0.5 * wrap_angle(poses[i + 1].heading - poses[i].heading).abs() * f.radius
                + 0.05
        };
        for (i, s) in traj.iter().enumerate() {
            let delta = if inflate && traj.len() > 1 {
                let before = if i > 0 { interval(i - 1) } else { 0.0 };
                let after = if i + 1 < traj.len() { interval(i) } else { 0.0 };
                before.max(after)
            } else {
                0.0
            };
            let need = clearance + delta;
            let gap = s.position.distance(poses[i].position) - re - f.radius;
            if gap > need {
                margin = margin.min(gap - need);
                continue;
            }
            let on = f.neighbor.shape.transformed(poses[i].position, poses[i].heading);
            let oe = ego_shape.transformed(crate::geom::Vec2::ZERO, s.heading).negated();
            let d = match minkowski_sum(&on, &oe) {
                Ok(m) if m.contains(s.position) => 0.0,
                Ok(m) => m.distance_to(s.position),
                Err(_) => on.distance_between(&ego_shape.transformed(s.position, s.heading)),
            };
            margin = margin.min(d - need);
            if d <= need {
                return CheckOutcome { free: false, margin };
            }
        }
    }
    CheckOutcome { free: true, margin }
}

pub fn is_collision_free(traj: &[TrajSample], ego_shape: &ConvexPolygon, forecasts: &[Forecast], cfg: &PlannerConfig) -> bool {
    check_trajectory(traj, ego_shape, forecasts, cfg, true).free
}

/// Dense-time reference check: rolls the same candidate out at ten times the
/// sample density and tests each instant without inflation.
#[allow(clippy::too_many_arguments)]
pub fn dense_collision_free<D: Dynamics + ?Sized>(
    ego: &VehicleState,
    pid: &PidPair,
    params: &VehicleParams,
    dynamics: &D,
    target: (f64, f64),
    tau: f64,
    forecasts: &[Forecast],
    cfg: &PlannerConfig,
) -> bool {
    assert!(cfg.substeps.is_multiple_of(10), "dense check needs substeps divisible by 10");
    let samples = (cfg.samples - 1) * 10 + 1;
    let traj = rollout(ego, pid, params, dynamics, target, tau, samples, cfg.substeps / 10);
    check_trajectory(&traj, &params.footprint, forecasts, cfg, false).free
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::NeighborState;
    use crate::dynamics::{build_profile, PlantModel};
    use crate::geom::Vec2;

    fn setup() -> (VehicleParams, crate::dynamics::DynamicsProfile) {
        let params = VehicleParams::hatchback();
        let (p, _) = build_profile(&PlantModel::hatchback(), &params).unwrap();
        (params, p)
    }

    fn block(x: f64, y: f64) -> Forecast {
        let n = NeighborState {
            id: 1,
            shape: ConvexPolygon::rectangle(4.0, 2.0).unwrap(),
            position: Vec2::new(x, y),
            heading: 0.0,
            velocity: Vec2::ZERO,
            lane: None,
            accel: 0.0,
            turn_rate: 0.0,
            kind: NeighborType::Obstruction,
        };
        Forecast::new(&n, None, 4.0)
    }

    #[test]
    fn rollout_grid_matches_dense() {
        let (params, p) = setup();
        let ego = VehicleState::new(Vec2::ZERO, 0.0, 10.0);
        let pid = PidPair::default();
        let a = rollout(&ego, &pid, &params, &p, (13.0, 0.05), 4.0, 20, 10);
        let b = rollout(&ego, &pid, &params, &p, (13.0, 0.05), 4.0, 191, 1);
        assert_eq!(a.len(), 20);
        for (i, s) in a.iter().enumerate() {
            let d = &b[i * 10];
            assert!((s.t - d.t).abs() < 1e-12);
            assert!(s.position.distance(d.position) < 1e-9);
        }
        assert!(a[19].speed > 12.0);
    }

    #[test]
    fn blocked_and_clear() {
        let (params, p) = setup();
        let cfg = PlannerConfig::default();
        let ego = VehicleState::new(Vec2::ZERO, 0.0, 10.0);
        let pid = PidPair::default();
        let traj = rollout(&ego, &pid, &params, &p, (10.0, 0.0), 4.0, 20, 10);
        assert!(!is_collision_free(&traj, &params.footprint, &[block(30.0, 0.0)], &cfg));
        assert!(is_collision_free(&traj, &params.footprint, &[block(30.0, 6.0)], &cfg));
        assert!(is_collision_free(&traj, &params.footprint, &[], &cfg));
    }
}
