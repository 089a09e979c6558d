use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on the magnitude of the integral state.
    pub integral_limit: f64,
}

impl PidGains {
    pub fn speed() -> Self {
        Self { kp: 1.0, ki: 0.1, kd: 0.0, integral_limit: 5.0 }
    }

    pub fn steering() -> Self {
        Self { kp: 8.0, ki: 0.0, kd: 0.0, integral_limit: 1.0 }
    }
}

/// PID with output clamped to `[-1, 1]`; the integral is frozen while the
/// output saturates in the direction of the error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidController {
    pub gains: PidGains,
    pub integral: f64,
    pub prev_error: Option<f64>,
}

impl PidController {
    pub fn new(gains: PidGains) -> Self {
        Self { gains, integral: 0.0, prev_error: None }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
    }

    pub fn update(&mut self, target: f64, current: f64, dt: f64) -> f64 {
        let g = self.gains;
        let e = target - current;
        let derivative = self.prev_error.map_or(0.0, |p| (e - p) / dt);
        self.prev_error = Some(e);
        let trial = (self.integral + e * dt).clamp(-g.integral_limit, g.integral_limit);
        let raw = g.kp * e + g.ki * trial + g.kd * derivative;
        let out = raw.clamp(-1.0, 1.0);
        let winding = (raw > 1.0 && e > 0.0) || (raw < -1.0 && e < 0.0);
        if !winding {
            self.integral = trial;
        }
        out
    }
}

/// The speed and steering loops tracking one set of targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidPair {
    pub speed: PidController,
    pub steering: PidController,
}

impl PidPair {
    pub fn new(speed: PidGains, steering: PidGains) -> Self {
        Self { speed: PidController::new(speed), steering: PidController::new(steering) }
    }
}

impl Default for PidPair {
    fn default() -> Self {
        Self::new(PidGains::speed(), PidGains::steering())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_zero_output() {
        let mut c = PidController::new(PidGains::speed());
        assert_eq!(c.update(3.0, 3.0, 0.1), 0.0);
    }

    #[test]
    fn proportional_only() {
        let mut c = PidController::new(PidGains { kp: 0.1, ki: 0.0, kd: 0.0, integral_limit: 1.0 });
        assert!((c.update(5.0, 0.0, 0.1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn output_clamped_and_integral_frozen() {
        let mut c = PidController::new(PidGains::speed());
        for _ in 0..100 {
            let u = c.update(100.0, 0.0, 0.1);
            assert!(u <= 1.0);
        }
        assert_eq!(c.integral, 0.0);
    }
}
