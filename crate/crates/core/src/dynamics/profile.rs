use serde::{Deserialize, Serialize};

use super::fit::{fit_piecewise_quadratic, PiecewiseQuadratic};
use super::trials::{collect_trials, PlantModel, TrialField, Trials};
use super::GRAVITY;
use crate::vehicle::{step, Controls, Dynamics, VehicleParams, VehicleState};
use crate::Error;

/// Knot spans per fitted envelope.
pub const ENVELOPE_SEGMENTS: usize = 4;

/// Horizon used by [`DynamicsProfile::is_feasible`] to project a control.
pub const FEASIBILITY_HORIZON: f64 = 0.1;

/// Fitted acceleration, braking and steering-rate envelopes for one vehicle
/// at one friction coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsProfile {
    pub vehicle: String,
    pub mu: f64,
    pub g: f64,
    pub max_speed: f64,
    pub max_steering: f64,
    /// Full-throttle acceleration over speed.
    pub accel_max: PiecewiseQuadratic,
    /// Full-brake acceleration over speed (negative).
    pub decel_max: PiecewiseQuadratic,
    /// Full-input steering rate over `|φ|`.
    pub steer_rate_max: PiecewiseQuadratic,
    /// Speed reached in the throttle trial.
    pub achieved_max_speed: f64,
}

/// RMS residuals of the three fits, relative to each envelope's peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub accel_rms: f64,
    pub accel_peak: f64,
    pub decel_rms: f64,
    pub decel_peak: f64,
    pub steer_rms: f64,
    pub steer_peak: f64,
}

impl FitReport {
    pub fn worst_relative(&self) -> f64 {
        (self.accel_rms / self.accel_peak).max(self.decel_rms / self.decel_peak).max(self.steer_rms / self.steer_peak)
    }
}

/// Runs the trials against `plant` and fits the envelopes.
pub fn build_profile(plant: &PlantModel, params: &VehicleParams) -> Result<(DynamicsProfile, Trials), Error> {
    let trials = collect_trials(plant, params)?;
    let accel_max = fit_piecewise_quadratic(&trials.acceleration, TrialField::Speed, TrialField::Accel, ENVELOPE_SEGMENTS)?;
    let decel_max = fit_piecewise_quadratic(&trials.braking, TrialField::Speed, TrialField::Accel, ENVELOPE_SEGMENTS)?;

    // The envelope comes from the full-input sweep at the fastest speed,
    // where the actuator is slowest.
    let mut envelope = trials.steering.clone();
    envelope.samples.retain(|s| s.u == 1.0 && s.v == trials.steering_envelope_speed);
    let steer_rate_max = fit_piecewise_quadratic(&envelope, TrialField::Steering, TrialField::SteerRate, ENVELOPE_SEGMENTS)?;

    let profile = DynamicsProfile {
        vehicle: params.name.clone(),
        mu: plant.friction,
        g: GRAVITY,
        max_speed: params.max_speed.min(trials.achieved_max_speed),
        max_steering: params.max_steering,
        accel_max,
        decel_max,
        steer_rate_max,
        achieved_max_speed: trials.achieved_max_speed,
    };
    Ok((profile, trials))
}

/// Residuals of `profile` against the trial data it was fitted on.
pub fn fit_report(profile: &DynamicsProfile, trials: &Trials) -> FitReport {
    let peak = |f: &PiecewiseQuadratic, xs: &mut dyn Iterator<Item = f64>| xs.map(|x| f.eval(x).abs()).fold(0.0, f64::max);
    FitReport {
        accel_rms: profile.accel_max.rms_residual,
        accel_peak: peak(&profile.accel_max, &mut trials.acceleration.samples.iter().map(|s| s.v)),
        decel_rms: profile.decel_max.rms_residual,
        decel_peak: peak(&profile.decel_max, &mut trials.braking.samples.iter().map(|s| s.v)),
        steer_rms: profile.steer_rate_max.rms_residual,
        steer_peak: peak(&profile.steer_rate_max, &mut trials.steering.samples.iter().map(|s| s.phi)),
    }
}

impl DynamicsProfile {
    pub fn accel_max_at(&self, v: f64) -> f64 {
        self.accel_max.eval(v).max(0.0)
    }

    pub fn decel_max_at(&self, v: f64) -> f64 {
        self.decel_max.eval(v).min(0.0)
    }

    /// Strongest deceleration over the speed range, as a positive number.
    pub fn peak_braking(&self) -> f64 {
        (0..=20).map(|i| -self.decel_max_at(self.max_speed * i as f64 / 20.0)).fold(f64::INFINITY, f64::min)
    }

    /// Highest speed that holds a curve of `radius` without lateral slip.
    pub fn max_safe_speed(&self, radius: f64) -> f64 {
        (self.mu * radius * self.g).sqrt().min(self.max_speed)
    }

    /// Largest steering angle that does not slip at speed `v`.
    pub fn max_safe_steering(&self, params: &VehicleParams, v: f64) -> f64 {
        if v <= 0.0 {
            return params.max_steering;
        }
        (params.wheelbase() * self.mu * self.g / (v * v)).atan().min(params.max_steering)
    }

    /// Control safety predicate: the control is inside the envelopes and the
    /// state reached after a short projection does not exceed the slip limit.
    /// Controls that unwind steering without adding speed are allowed.
    pub fn is_feasible(&self, params: &VehicleParams, state: &VehicleState, u: Controls) -> bool {
        if state.speed <= 0.0 {
            return true;
        }
        if u.throttle.abs() > 1.0 || u.steer.abs() > 1.0 {
            return false;
        }
        let a = self.accel(state.speed, u.throttle);
        if a > self.accel_max_at(state.speed) + 1e-12 || a < self.decel_max_at(state.speed) - 1e-12 {
            return false;
        }
        let next = step(state, params, self, u, FEASIBILITY_HORIZON);
        if next.steering.abs() <= self.max_safe_steering(params, next.speed) {
            return true;
        }
        next.steering.abs() < state.steering.abs() - 1e-9 && next.speed <= state.speed
    }

    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let p: DynamicsProfile = serde_json::from_str(s)?;
        if !(p.mu > 0.0 && p.g > 0.0 && p.max_speed > 0.0) {
            return Err(Error::Invalid("profile: mu, g and max_speed must be positive".into()));
        }
        Ok(p)
    }
}

impl Dynamics for DynamicsProfile {
    fn accel(&self, v: f64, throttle: f64) -> f64 {
        if throttle >= 0.0 {
            throttle * self.accel_max_at(v)
        } else {
            -throttle * self.decel_max_at(v)
        }
    }

    fn steer_rate(&self, steering: f64, steer_input: f64) -> f64 {
        steer_input * self.steer_rate_max.eval(steering.abs()).max(0.0)
    }
}
