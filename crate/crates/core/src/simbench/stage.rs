/// One linear axis: constant-velocity moves followed by a settle period.
/// The landing position carries a per-axis accuracy offset and a fresh
/// repeatability draw.
#[derive(Debug, Clone, PartialEq)]
pub struct StageAxis {
    start_um: f64,
    target_um: f64,
    t_start: f64,
    t_arrive: f64,
    t_settled: f64,
    pub accuracy_offset_um: f64,
}

impl StageAxis {
    pub fn new(accuracy_offset_um: f64) -> Self {
        StageAxis {
            start_um: 0.0,
            target_um: 0.0,
            t_start: 0.0,
            t_arrive: 0.0,
            t_settled: 0.0,
            accuracy_offset_um,
        }
    }

    pub fn position(&self, now: f64) -> f64 {
        if now >= self.t_arrive || self.t_arrive <= self.t_start {
            self.target_um
        } else {
            let f = ((now - self.t_start) / (self.t_arrive - self.t_start)).clamp(0.0, 1.0);
            self.start_um + (self.target_um - self.start_um) * f
        }
    }

    pub fn moving(&self, now: f64) -> bool {
        now < self.t_settled
    }

    /// Starts a move from wherever the axis is now to `landing_um`.
    pub fn start_move(&mut self, now: f64, landing_um: f64, velocity_um_s: f64, settle_s: f64) {
        let from = self.position(now);
        self.start_um = from;
        self.target_um = landing_um;
        self.t_start = now;
        self.t_arrive = now + (landing_um - from).abs() / velocity_um_s;
        self.t_settled = self.t_arrive + settle_s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn move_timing() {
        let mut a = StageAxis::new(0.0);
        a.start_move(0.0, 5000.0, 50_000.0, 0.05);
        assert!(a.moving(0.0));
        assert_eq!(a.position(0.05), 2500.0);
        assert!(a.moving(0.12));
        assert!(!a.moving(0.1500001));
        assert_eq!(a.position(1.0), 5000.0);
    }

    #[test]
    fn retarget_mid_move() {
        let mut a = StageAxis::new(0.0);
        a.start_move(0.0, 10_000.0, 10_000.0, 0.0);
        a.start_move(0.5, 0.0, 10_000.0, 0.0);
        assert_eq!(a.position(0.5), 5000.0);
        assert_eq!(a.position(1.0), 0.0);
    }
}
