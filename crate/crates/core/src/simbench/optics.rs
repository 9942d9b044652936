use std::f64::consts::PI;

use crate::engine::select_filter;
use crate::model::{Wavelength, ENGINE_RANGE_NM};

use super::config::{MonoConfig, SplitterConfig};

/// One spectral line of the beam: power at a wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub nm: f64,
    pub watts: f64,
}

/// Which splitter output a detector sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Monitor,
    Dut,
}

/// Piecewise-linear curve clamped at its ends.
pub fn interpolate(table: &[[f64; 2]], x: f64) -> f64 {
    match table {
        [] => 0.0,
        [only] => only[1],
        _ => {
            if x <= table[0][0] {
                return table[0][1];
            }
            let last = table[table.len() - 1];
            if x >= last[0] {
                return last[1];
            }
            let i = table.partition_point(|p| p[0] <= x);
            let (a, b) = (table[i - 1], table[i]);
            a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
        }
    }
}

/// Relative lamp x grating throughput with its peak near 1.
fn builtin_throughput(nm: f64) -> f64 {
    let body = 0.35 + 0.65 * (-((nm - 480.0) / 320.0).powi(2)).exp();
    let uv = ((nm - 200.0) / 120.0).clamp(0.05, 1.0);
    body * uv
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonoModel {
    pub config: MonoConfig,
    pub set_wavelength: f64,
    /// Slot the wheel was told to use; `None` means AUTO.
    pub filter_request: Option<u8>,
    pub shutter_open: bool,
}

impl MonoModel {
    pub fn new(config: MonoConfig) -> Self {
        MonoModel {
            config,
            set_wavelength: 500.0,
            filter_request: None,
            shutter_open: false,
        }
    }

    pub fn throughput(&self, nm: f64) -> f64 {
        if self.config.throughput.is_empty() {
            builtin_throughput(nm)
        } else {
            interpolate(&self.config.throughput, nm)
        }
    }

    /// Slot physically in the beam. AUTO falls back to the open slot when no
    /// filter is admissible.
    pub fn engaged_slot(&self) -> u8 {
        match self.filter_request {
            Some(slot) => slot,
            None => Wavelength::new(self.set_wavelength)
                .ok()
                .and_then(|w| select_filter(w, &self.config.filter_cutons).ok())
                .unwrap_or(0),
        }
    }

    pub fn filter_transmission(&self, slot: u8, nm: f64) -> f64 {
        if slot == 0 {
            return 1.0;
        }
        if nm > self.config.filter_cutons[slot as usize - 1] {
            self.config.filter_pass_transmission
        } else {
            self.config.filter_block_transmission
        }
    }

    /// Output beam for a lamp power at peak throughput: the first order and,
    /// when lambda/2 is inside the source range, a leak at lambda/2.
    pub fn output(&self, lamp_w: f64) -> Vec<Component> {
        let nm = self.set_wavelength;
        let slot = self.engaged_slot();
        let unfiltered = lamp_w * self.throughput(nm);
        let mut out = vec![Component {
            nm,
            watts: unfiltered * self.filter_transmission(slot, nm),
        }];
        let half = nm / 2.0;
        if half >= ENGINE_RANGE_NM.0 && self.config.stray_second_order_frac > 0.0 {
            out.push(Component {
                nm: half,
                watts: unfiltered * self.config.stray_second_order_frac * self.filter_transmission(slot, half),
            });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitterModel {
    pub config: SplitterConfig,
}

impl SplitterModel {
    /// Fraction of incident power sent to the DUT arm.
    pub fn dut_fraction(&self, nm: f64) -> f64 {
        let c = &self.config;
        c.transmitted * (1.0 + c.ripple_amplitude * (2.0 * PI * nm / c.ripple_period_nm).sin())
    }

    pub fn fraction(&self, arm: Arm, nm: f64) -> f64 {
        match arm {
            Arm::Dut => self.dut_fraction(nm),
            Arm::Monitor => 1.0 - self.dut_fraction(nm),
        }
    }

    /// DUT over monitor power.
    pub fn ratio(&self, nm: f64) -> f64 {
        let t = self.dut_fraction(nm);
        t / (1.0 - t)
    }

    pub fn split(&self, beam: &[Component], arm: Arm) -> Vec<Component> {
        beam.iter()
            .map(|c| Component {
                nm: c.nm,
                watts: c.watts * self.fraction(arm, c.nm),
            })
            .collect()
    }
}

pub fn total_watts(beam: &[Component]) -> f64 {
    beam.iter().map(|c| c.watts).sum()
}
