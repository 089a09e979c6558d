//! Speed-loop step response of the preset PID gains on the hatchback profile.

use navplan::dynamics::{build_profile, PlantModel};
use navplan::geom::Vec2;
use navplan::sim::{PidController, PidGains, PHYSICS_DT};
use navplan::vehicle::{step, Controls, VehicleParams, VehicleState};

fn main() {
    let params = VehicleParams::hatchback();
    let (profile, _) = build_profile(&PlantModel::hatchback(), &params).unwrap();
    let mut pid = PidController::new(PidGains::speed());
    let mut state = VehicleState::new(Vec2::ZERO, 0.0, 10.0);
    let target = 15.0;

    let mut peak: f64 = 0.0;
    let mut settled_at = None;
    let mut t = 0.0;
    while t < 6.0 {
        let u = Controls::new(pid.update(target, state.speed, PHYSICS_DT), 0.0);
        state = step(&state, &params, &profile, u, PHYSICS_DT);
        t += PHYSICS_DT;
        peak = peak.max(state.speed);
        let inside = (state.speed - target).abs() <= 0.02 * 5.0;
        match (inside, settled_at) {
            (true, None) => settled_at = Some(t),
            (false, Some(_)) => settled_at = None,
            _ => {}
        }
        if (t * 60.0).round() as i64 % 30 == 0 {
            println!("t={t:>4.1}s  v={:>6.3}  throttle={:>6.3}", state.speed, u.throttle);
        }
    }
    println!("overshoot {:.2}% of the step", 100.0 * (peak - target).max(0.0) / 5.0);
    match settled_at {
        Some(ts) => println!("settled within 2% after {ts:.2} s"),
        None => println!("did not settle"),
    }
}
