//! Time sources for the measurement engine.

use std::time::{Duration, Instant};

pub trait Clock: Send {
    /// Seconds since the clock's epoch.
    fn now(&self) -> f64;
    fn sleep(&self, seconds: f64);
}

/// Wall-clock time, optionally accelerated: `scale` clock seconds pass per real second.
pub struct WallClock {
    start: Instant,
    scale: f64,
}

impl WallClock {
    pub fn new(scale: f64) -> Self {
        WallClock {
            start: Instant::now(),
            scale: if scale > 0.0 { scale } else { 1.0 },
        }
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * self.scale
    }

    fn sleep(&self, seconds: f64) {
        if seconds > 0.0 {
            std::thread::sleep(Duration::from_secs_f64(seconds / self.scale));
        }
    }
}
