use rand::Rng;
use rand_distr::StandardNormal;

use super::config::LampConfig;

/// Xe lamp with a multiplicative random-walk drift and an optional PI loop
/// that trims the drive from a monitor photodiode.
#[derive(Debug, Clone, PartialEq)]
pub struct LampModel {
    pub config: LampConfig,
    /// Accumulated drift of the bare lamp, 1.0 at start.
    drift: f64,
    /// Drive correction applied by the feedback loop.
    drive: f64,
    integral: f64,
    /// Time not yet consumed by a whole control step.
    residual: f64,
}

impl LampModel {
    pub fn new(config: LampConfig) -> Self {
        LampModel {
            config,
            drift: 1.0,
            drive: 1.0,
            integral: 0.0,
            residual: 0.0,
        }
    }

    /// Relative output seen by the monitor photodiode.
    pub fn relative_output(&self) -> f64 {
        self.drift * self.drive
    }

    /// Power leaving the monochromator at peak throughput, W.
    pub fn power_w(&self) -> f64 {
        self.config.base_power_w * self.config.setpoint / 100.0 * self.relative_output()
    }

    pub fn set_feedback(&mut self, on: bool) {
        if on && !self.config.feedback_on {
            self.integral = self.drive - 1.0;
        }
        self.config.feedback_on = on;
    }

    /// Advances by `dt` seconds in whole control steps; the remainder is carried.
    pub fn advance<R: Rng>(&mut self, dt: f64, rng: &mut R) {
        self.residual += dt;
        let h = self.config.step_s;
        // tolerate rounding in sums of small ticks
        while self.residual >= h * (1.0 - 1e-9) {
            self.residual -= h;
            self.step(h, rng);
        }
    }

    fn step<R: Rng>(&mut self, h: f64, rng: &mut R) {
        let z: f64 = rng.sample(StandardNormal);
        self.drift *= (self.config.drift_rate * h.sqrt() * z).exp();
        if self.config.feedback_on {
            let e = 1.0 - self.relative_output();
            self.integral += self.config.feedback_gain_i * e;
            self.drive = (1.0 + self.integral + self.config.feedback_gain_p * e).clamp(0.0, 10.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn feedback_holds_output() {
        let mut lamp = LampModel::new(LampConfig {
            feedback_on: true,
            ..Default::default()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut xs = Vec::new();
        for _ in 0..600 {
            lamp.advance(1.0, &mut rng);
            xs.push(lamp.relative_output());
        }
        let (m, s) = crate::model::repeatability(&xs).unwrap();
        assert!(s / m < 0.002, "relative sd {}", s / m);
    }

    #[test]
    fn fractional_steps_accumulate() {
        let mut a = LampModel::new(LampConfig::default());
        let mut b = a.clone();
        let mut ra = ChaCha8Rng::seed_from_u64(1);
        let mut rb = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..40 {
            a.advance(0.025, &mut ra);
        }
        b.advance(1.0, &mut rb);
        assert!((a.relative_output() - b.relative_output()).abs() < 1e-12);
    }
}
