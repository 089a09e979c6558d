//! Profiles the three preset vehicles and compares their envelopes.
//!
//! Run with `cargo run --example profile_vehicles`.

use navplan::dynamics::{build_profile, fit_report, PlantModel};
use navplan::vehicle::VehicleParams;

fn main() {
    println!("{:<11} {:>9} {:>9} {:>10} {:>8} {:>12}", "vehicle", "a(5)", "a(25)", "brake(20)", "top", "v_safe(r=20)");
    for name in ["hatchback", "sports_car", "suv"] {
        let params = VehicleParams::preset(name).unwrap();
        let plant = PlantModel::preset(name).unwrap();
        let (profile, trials) = build_profile(&plant, &params).unwrap();
        let report = fit_report(&profile, &trials);
        println!(
            "{name:<11} {:>9.2} {:>9.2} {:>10.2} {:>8.1} {:>12.2}   worst fit residual {:.3}% of peak",
            profile.accel_max_at(5.0),
            profile.accel_max_at(25.0),
            profile.decel_max_at(20.0),
            profile.achieved_max_speed,
            profile.max_safe_speed(20.0),
            100.0 * report.worst_relative()
        );
    }
}
