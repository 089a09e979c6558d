//! Kinematic bicycle model and fixed-step state evolution.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geom::{ConvexPolygon, TurnDirection, Vec2};
use crate::road::BehaviorLabel;
use crate::Error;

/// Acceleration and steering-rate functions driving the bicycle model.
pub trait Dynamics {
    /// Longitudinal acceleration `A(v, u_t)` in m/s².
    fn accel(&self, v: f64, throttle: f64) -> f64;
    /// Steering rate `Φ(φ, u_s)` in rad/s.
    fn steer_rate(&self, steering: f64, steer_input: f64) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    pub name: String,
    pub mass: f64,
    pub length: f64,
    pub width: f64,
    /// Center of mass to front axle.
    pub lf: f64,
    /// Center of mass to rear axle.
    pub lr: f64,
    pub max_steering: f64,
    pub max_speed: f64,
    /// Body-frame footprint centred on the reference point.
    pub footprint: ConvexPolygon,
}

impl VehicleParams {
    /// Builds a vehicle with a rectangular footprint and `lf = lr = 0.35 * length`.
    pub fn with_defaults(name: &str, mass: f64, length: f64, width: f64, max_steering_deg: f64) -> Self {
        Self {
            name: name.to_string(),
            mass,
            length,
            width,
            lf: 0.35 * length,
            lr: 0.35 * length,
            max_steering: max_steering_deg.to_radians(),
            max_speed: 55.0,
            footprint: ConvexPolygon::rectangle(length, width).expect("positive extents"),
        }
    }

    pub fn hatchback() -> Self {
        Self::with_defaults("hatchback", 1365.0, 3.8, 1.7, 60.0)
    }

    pub fn sports_car() -> Self {
        Self::with_defaults("sports_car", 1750.0, 4.6, 1.85, 63.0)
    }

    pub fn suv() -> Self {
        Self::with_defaults("suv", 1866.0, 4.8, 1.9, 55.0)
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "hatchback" => Some(Self::hatchback()),
            "sports_car" | "sports" => Some(Self::sports_car()),
            "suv" => Some(Self::suv()),
            _ => None,
        }
    }

    pub fn wheelbase(&self) -> f64 {
        self.lf + self.lr
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::Invalid(format!("vehicle {}: {m}", self.name)));
        if !(self.lf > 0.0 && self.lr > 0.0) {
            return bad("axle distances must be positive");
        }
        if !(self.max_steering > 0.0 && self.max_steering < PI / 2.0) {
            return bad("max steering must lie in (0, π/2)");
        }
        if !(self.max_speed > 0.0 && self.mass > 0.0) {
            return bad("mass and max speed must be positive");
        }
        let xs: Vec<f64> = self.footprint.vertices().iter().map(|v| v.x).collect();
        let extent = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        if (extent - self.length).abs() > 0.05 * self.length {
            return bad("footprint length disagrees with `length`");
        }
        Ok(())
    }
}

/// Normalized control inputs, each in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Controls {
    pub throttle: f64,
    pub steer: f64,
}

impl Controls {
    pub fn new(throttle: f64, steer: f64) -> Self {
        Self { throttle, steer }
    }

    pub fn clamped(self) -> Self {
        Self::new(self.throttle.clamp(-1.0, 1.0), self.steer.clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: Vec2,
    pub heading: f64,
    pub speed: f64,
    pub steering: f64,
    pub controls: Controls,
    pub behavior: BehaviorLabel,
}

impl VehicleState {
    pub fn new(position: Vec2, heading: f64, speed: f64) -> Self {
        Self { position, heading, speed, steering: 0.0, controls: Controls::default(), behavior: BehaviorLabel::DrivingStraight }
    }

    pub fn footprint(&self, params: &VehicleParams) -> ConvexPolygon {
        params.footprint.transformed(self.position, self.heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub px: f64,
    pub py: f64,
    pub heading: f64,
    pub speed: f64,
    pub steering: f64,
}

/// Right-hand side of the bicycle model.
pub fn derivative(state: &VehicleState, params: &VehicleParams, accel: f64, steer_rate: f64) -> StateDerivative {
    let v = state.speed;
    StateDerivative {
        px: v * state.heading.cos(),
        py: v * state.heading.sin(),
        heading: v * state.steering.tan() / params.wheelbase(),
        speed: accel,
        steering: steer_rate,
    }
}

/// Yaw rate of the bicycle model at the given speed and steering.
pub fn yaw_rate(speed: f64, steering: f64, params: &VehicleParams) -> f64 {
    speed * steering.tan() / params.wheelbase()
}

/// `A(v, u_t)`, except that braking at rest produces no motion.
pub fn effective_accel<D: Dynamics + ?Sized>(dynamics: &D, v: f64, throttle: f64) -> f64 {
    let a = dynamics.accel(v, throttle);
    if v <= 0.0 && a < 0.0 {
        0.0
    } else {
        a
    }
}

/// One RK4 step of length `dt` under constant controls.
///
/// Speed is clamped to `[0, max_speed]` and steering to `±max_steering`,
/// both inside the stage evaluations and on the result.
pub fn step<D: Dynamics + ?Sized>(
    state: &VehicleState,
    params: &VehicleParams,
    dynamics: &D,
    controls: Controls,
    dt: f64,
) -> VehicleState {
    let u = controls.clamped();
    let vmax = params.max_speed;
    let phimax = params.max_steering;
    let eval = |s: &VehicleState| {
        let v = s.speed.clamp(0.0, vmax);
        let phi = s.steering.clamp(-phimax, phimax);
        let a = effective_accel(dynamics, v, u.throttle);
        let mut rate = dynamics.steer_rate(phi, u.steer);
        if (phi >= phimax && rate > 0.0) || (phi <= -phimax && rate < 0.0) {
            rate = 0.0;
        }
        let clamped = VehicleState { speed: v, steering: phi, ..*s };
        derivative(&clamped, params, a, rate)
    };
    let add = |s: &VehicleState, d: &StateDerivative, h: f64| VehicleState {
        position: Vec2::new(s.position.x + d.px * h, s.position.y + d.py * h),
        heading: s.heading + d.heading * h,
        speed: s.speed + d.speed * h,
        steering: s.steering + d.steering * h,
        ..*s
    };
    let k1 = eval(state);
    let k2 = eval(&add(state, &k1, 0.5 * dt));
    let k3 = eval(&add(state, &k2, 0.5 * dt));
    let k4 = eval(&add(state, &k3, dt));
    let w = |f: fn(&StateDerivative) -> f64| (f(&k1) + 2.0 * f(&k2) + 2.0 * f(&k3) + f(&k4)) / 6.0;
    let mut next = VehicleState {
        position: Vec2::new(state.position.x + dt * w(|d| d.px), state.position.y + dt * w(|d| d.py)),
        heading: state.heading + dt * w(|d| d.heading),
        speed: state.speed + dt * w(|d| d.speed),
        steering: state.steering + dt * w(|d| d.steering),
        controls: u,
        behavior: state.behavior,
    };
    next.speed = next.speed.clamp(0.0, vmax);
    next.steering = next.steering.clamp(-phimax, phimax);
    next
}

/// Steering angle that holds an arc of the given radius, clamped to the
/// steering limit.
pub fn arc_steering(radius: f64, direction: TurnDirection, params: &VehicleParams) -> f64 {
    if direction == TurnDirection::Straight || !radius.is_finite() {
        return 0.0;
    }
    let phi = (params.wheelbase() / radius).atan().min(params.max_steering);
    direction.sign() * phi
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Const {
        accel: f64,
    }

    impl Dynamics for Const {
        fn accel(&self, _v: f64, _u: f64) -> f64 {
            self.accel
        }
        fn steer_rate(&self, _phi: f64, _u: f64) -> f64 {
            0.0
        }
    }

    fn params_l(l: f64) -> VehicleParams {
        let mut p = VehicleParams::hatchback();
        p.lf = l / 2.0;
        p.lr = l / 2.0;
        p
    }

    #[test]
    fn straight_and_axis_aligned_motion() {
        let p = VehicleParams::hatchback();
        let d = derivative(&VehicleState::new(Vec2::ZERO, 0.0, 10.0), &p, 0.0, 0.0);
        assert_eq!((d.px, d.py, d.heading), (10.0, 0.0, 0.0));
        let d = derivative(&VehicleState::new(Vec2::ZERO, PI / 2.0, 5.0), &p, 0.0, 0.0);
        assert!(d.px.abs() < 1e-12 && (d.py - 5.0).abs() < 1e-12 && d.heading == 0.0);
    }

    #[test]
    fn yaw_rate_from_steering() {
        let p = params_l(2.7);
        let mut s = VehicleState::new(Vec2::ZERO, 0.0, 10.0);
        s.steering = 0.27_f64.atan();
        let d = derivative(&s, &p, 0.0, 0.0);
        assert!((d.heading - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_velocity_step() {
        let p = VehicleParams::hatchback();
        let s = step(&VehicleState::new(Vec2::ZERO, 0.0, 10.0), &p, &Const { accel: 0.0 }, Controls::default(), 0.1);
        assert_eq!(s.position, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn uniform_acceleration_from_rest() {
        let p = VehicleParams::hatchback();
        let mut s = VehicleState::new(Vec2::ZERO, 0.0, 0.0);
        for _ in 0..10 {
            s = step(&s, &p, &Const { accel: 2.0 }, Controls::new(1.0, 0.0), 0.1);
        }
        assert!((s.speed - 2.0).abs() < 1e-9);
        assert!((s.position.x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn clamps_hold() {
        let p = VehicleParams::hatchback();
        let mut s = VehicleState::new(Vec2::ZERO, 0.0, 1.0);
        s.steering = p.max_steering;
        for _ in 0..50 {
            s = step(&s, &p, &Const { accel: -5.0 }, Controls::new(-1.0, 1.0), 0.1);
            assert!(s.speed >= 0.0 && s.steering.abs() <= p.max_steering);
        }
        assert_eq!(s.speed, 0.0);
    }

    #[test]
    fn arc_steering_cases() {
        let p = params_l(2.7);
        assert_eq!(arc_steering(10.0, TurnDirection::Straight, &p), 0.0);
        assert!((arc_steering(27.0, TurnDirection::Left, &p) - 0.1_f64.atan()).abs() < 1e-12);
        assert!((arc_steering(27.0, TurnDirection::Right, &p) + 0.099_668_652).abs() < 1e-8);
        assert_eq!(arc_steering(0.01, TurnDirection::Left, &p), p.max_steering);
    }

    #[test]
    fn presets_validate() {
        for p in [VehicleParams::hatchback(), VehicleParams::sports_car(), VehicleParams::suv()] {
            p.validate().unwrap();
        }
        assert_eq!(VehicleParams::suv().mass, 1866.0);
    }
}
