use serde::{Deserialize, Serialize};

use super::GRAVITY;
use crate::vehicle::VehicleParams;
use crate::Error;

/// Sampling rate of the profiling trials.
pub const TRIAL_RATE_HZ: f64 = 60.0;

/// Reference longitudinal/steering plant used to generate profiling data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantModel {
    pub name: String,
    pub mass: f64,
    /// Tractive force at standstill, N.
    pub engine_peak_force: f64,
    /// Engine power, W. Tractive force blends from peak force to `power / v`.
    pub engine_power: f64,
    pub brake_force_max: f64,
    /// Aerodynamic drag `c · v²`, kg/m.
    pub drag_coefficient: f64,
    /// Rolling resistance, N.
    pub rolling_resistance: f64,
    /// Tire-road friction coefficient available to this vehicle.
    pub friction: f64,
    /// Steering actuator rate at centre with full input, rad/s.
    pub steer_rate_max: f64,
    /// Fractional rate loss at full lock.
    pub steer_lock_falloff: f64,
    /// Rate loss per m/s of speed: rate scales by `1 / (1 + k v)`.
    pub steer_speed_falloff: f64,
}

impl PlantModel {
    pub fn hatchback() -> Self {
        Self {
            name: "hatchback".into(),
            mass: 1365.0,
            engine_peak_force: 5500.0,
            engine_power: 85e3,
            brake_force_max: 10500.0,
            drag_coefficient: 0.38,
            rolling_resistance: 150.0,
            friction: 0.9,
            steer_rate_max: 0.7,
            steer_lock_falloff: 0.4,
            steer_speed_falloff: 0.01,
        }
    }

    pub fn sports_car() -> Self {
        Self {
            name: "sports_car".into(),
            mass: 1750.0,
            engine_peak_force: 9000.0,
            engine_power: 220e3,
            brake_force_max: 15000.0,
            drag_coefficient: 0.36,
            rolling_resistance: 180.0,
            friction: 1.0,
            steer_rate_max: 0.9,
            steer_lock_falloff: 0.35,
            steer_speed_falloff: 0.01,
        }
    }

    /// Higher centre of gravity: lateral grip is limited by roll well
    /// below the tire limit.
    pub fn suv() -> Self {
        Self {
            name: "suv".into(),
            mass: 1866.0,
            engine_peak_force: 6500.0,
            engine_power: 150e3,
            brake_force_max: 13000.0,
            drag_coefficient: 0.5,
            rolling_resistance: 220.0,
            friction: 0.75,
            steer_rate_max: 0.6,
            steer_lock_falloff: 0.45,
            steer_speed_falloff: 0.012,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "hatchback" => Some(Self::hatchback()),
            "sports_car" | "sports" => Some(Self::sports_car()),
            "suv" => Some(Self::suv()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let positive = [
            self.mass,
            self.engine_peak_force,
            self.engine_power,
            self.brake_force_max,
            self.drag_coefficient,
            self.rolling_resistance,
            self.steer_rate_max,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Invalid(format!("plant {}: coefficients must be positive", self.name)));
        }
        if !(self.friction > 0.0 && self.friction <= 1.5) {
            return Err(Error::Invalid(format!("plant {}: friction must lie in (0, 1.5]", self.name)));
        }
        if !(0.0..1.0).contains(&self.steer_lock_falloff) || self.steer_speed_falloff < 0.0 {
            return Err(Error::Invalid(format!("plant {}: bad steering falloff", self.name)));
        }
        Ok(())
    }

    /// Friction-limited force budget `μ m g`.
    pub fn traction_budget(&self) -> f64 {
        self.friction * self.mass * GRAVITY
    }

    pub fn engine_force(&self, v: f64) -> f64 {
        let f = self.engine_peak_force;
        let p = self.engine_power;
        f * p / (p * p + (f * v) * (f * v)).sqrt()
    }

    fn resistance(&self, v: f64) -> f64 {
        self.drag_coefficient * v * v + self.rolling_resistance
    }

    /// Net acceleration for a tractive (positive) or braking (negative)
    /// wheel force at speed `v`.
    pub fn acceleration(&self, v: f64, wheel_force: f64) -> f64 {
        (wheel_force - self.resistance(v)) / self.mass
    }

    /// Steering rate for input `u` at angle `phi`, speed `v`.
    pub fn steer_rate(&self, phi: f64, u: f64, v: f64, max_steering: f64) -> f64 {
        let r = phi / max_steering;
        self.steer_rate_max * u * (1.0 - self.steer_lock_falloff * r * r) / (1.0 + self.steer_speed_falloff * v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialField {
    Time,
    Speed,
    Accel,
    Control,
    Steering,
    SteerRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSample {
    pub t: f64,
    pub v: f64,
    pub v_dot: f64,
    /// Throttle/brake or steering input, whichever the trial drives.
    pub u: f64,
    pub phi: f64,
    pub phi_dot: f64,
}

impl TrialSample {
    pub fn get(&self, f: TrialField) -> f64 {
        match f {
            TrialField::Time => self.t,
            TrialField::Speed => self.v,
            TrialField::Accel => self.v_dot,
            TrialField::Control => self.u,
            TrialField::Steering => self.phi,
            TrialField::SteerRate => self.phi_dot,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub samples: Vec<TrialSample>,
    /// Samples dropped because the commanded force exceeded the traction budget.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trials {
    pub acceleration: TrialLog,
    pub braking: TrialLog,
    pub steering: TrialLog,
    /// Highest speed reached in the throttle trial.
    pub achieved_max_speed: f64,
    /// Speed of the steering sweep used for the envelope.
    pub steering_envelope_speed: f64,
}

/// Speeds at which the steering sweeps run.
pub const STEER_SWEEP_SPEEDS: [f64; 3] = [5.0, 15.0, 25.0];
/// Steering inputs swept at each speed.
pub const STEER_SWEEP_INPUTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

const TRIAL_TIME_LIMIT: f64 = 300.0;
const STALL_ACCEL: f64 = 1e-3;

/// Runs full-throttle, full-brake and steering-sweep trials at 60 Hz.
pub fn collect_trials(plant: &PlantModel, params: &VehicleParams) -> Result<Trials, Error> {
    plant.validate()?;
    params.validate()?;
    let dt = 1.0 / TRIAL_RATE_HZ;
    let budget = plant.traction_budget();

    // Throttle: largest effort that keeps the tractive force within budget.
    let mut acceleration = TrialLog::default();
    let mut v: f64 = 0.0;
    let mut step = 0usize;
    loop {
        let t = step as f64 * dt;
        let engine = plant.engine_force(v);
        let throttle = (budget / engine).min(1.0);
        let force = throttle * engine;
        let a = plant.acceleration(v, force);
        if force > budget {
            acceleration.excluded += 1;
        } else {
            acceleration.samples.push(TrialSample { t, v, v_dot: a, u: throttle, phi: 0.0, phi_dot: 0.0 });
        }
        if v >= params.max_speed || t >= TRIAL_TIME_LIMIT || a < STALL_ACCEL {
            break;
        }
        v = (v + rk4_speed(plant, v, dt, |vv| (budget / plant.engine_force(vv)).min(1.0) * plant.engine_force(vv)))
            .min(params.max_speed);
        step += 1;
    }
    let achieved = v;

    // Braking from the achieved maximum down to rest.
    let mut braking = TrialLog::default();
    let brake_effort = (budget / plant.brake_force_max).min(1.0);
    let brake_force = brake_effort * plant.brake_force_max;
    let mut v = achieved;
    let mut step = 0usize;
    loop {
        let t = step as f64 * dt;
        let a = plant.acceleration(v, -brake_force);
        braking.samples.push(TrialSample { t, v, v_dot: a, u: -brake_effort, phi: 0.0, phi_dot: 0.0 });
        if v <= 0.0 {
            break;
        }
        let next = v + rk4_speed(plant, v, dt, |_| -brake_force);
        v = next.max(0.0);
        step += 1;
    }

    // Steering sweeps: from centre to full lock at fixed speed.
    let mut steering = TrialLog::default();
    let mut t = 0.0;
    for &speed in &STEER_SWEEP_SPEEDS {
        for &u in &STEER_SWEEP_INPUTS {
            let mut phi: f64 = 0.0;
            while phi < params.max_steering {
                let rate = plant.steer_rate(phi, u, speed, params.max_steering);
                steering.samples.push(TrialSample { t, v: speed, v_dot: 0.0, u, phi, phi_dot: rate });
                phi += rate * dt;
                t += dt;
            }
        }
    }
    Ok(Trials {
        acceleration,
        braking,
        steering,
        achieved_max_speed: achieved,
        steering_envelope_speed: *STEER_SWEEP_SPEEDS.last().unwrap(),
    })
}

fn rk4_speed(plant: &PlantModel, v: f64, dt: f64, force: impl Fn(f64) -> f64) -> f64 {
    let f = |vv: f64| plant.acceleration(vv, force(vv.max(0.0)));
    let k1 = f(v);
    let k2 = f(v + 0.5 * dt * k1);
    let k3 = f(v + 0.5 * dt * k2);
    let k4 = f(v + dt * k3);
    dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drag_free(force: f64) -> PlantModel {
        PlantModel {
            engine_peak_force: force,
            engine_power: 1e12,
            drag_coefficient: 1e-12,
            rolling_resistance: 1e-12,
            ..PlantModel::hatchback()
        }
    }

    #[test]
    fn drag_free_plant_accelerates_at_f_over_m() {
        let plant = drag_free(4000.0);
        let trials = collect_trials(&plant, &crate::vehicle::VehicleParams::hatchback()).unwrap();
        let expected = 4000.0 / plant.mass;
        for s in &trials.acceleration.samples {
            assert!((s.v_dot - expected).abs() < 1e-6, "{} vs {expected}", s.v_dot);
        }
    }

    #[test]
    fn drag_makes_acceleration_decrease() {
        let trials = collect_trials(&PlantModel::hatchback(), &crate::vehicle::VehicleParams::hatchback()).unwrap();
        let s = &trials.acceleration.samples;
        assert!(s.windows(2).all(|w| w[1].v_dot <= w[0].v_dot + 1e-12));
        assert!(s.iter().all(|x| x.u <= 1.0));
    }

    #[test]
    fn braking_ends_at_rest() {
        let trials = collect_trials(&PlantModel::suv(), &crate::vehicle::VehicleParams::suv()).unwrap();
        assert_eq!(trials.braking.samples.last().unwrap().v, 0.0);
        assert!(trials.braking.samples.iter().all(|s| s.v_dot < 0.0));
    }

    #[test]
    fn weak_plant_truncates() {
        let mut plant = PlantModel::hatchback();
        plant.engine_power = 20e3;
        let trials = collect_trials(&plant, &crate::vehicle::VehicleParams::hatchback()).unwrap();
        assert!(trials.achieved_max_speed < 55.0);
        assert!(trials.achieved_max_speed > 20.0);
    }

    #[test]
    fn traction_limited_throttle() {
        let mut plant = PlantModel::hatchback();
        plant.friction = 0.2;
        let trials = collect_trials(&plant, &crate::vehicle::VehicleParams::hatchback()).unwrap();
        let budget = plant.traction_budget();
        for s in &trials.acceleration.samples {
            assert!(s.u * plant.engine_force(s.v) <= budget * (1.0 + 1e-12));
        }
    }
}
