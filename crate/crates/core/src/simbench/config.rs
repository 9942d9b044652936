use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::model::{default_bands, CalibrationBand};
use crate::protocol::InstrumentKind;

use super::cathode::Structure;

/// Everything the virtual bench needs to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub seed: u64,
    pub lamp: LampConfig,
    pub mono: MonoConfig,
    pub splitter: SplitterConfig,
    /// Transmission of the fibre bundle and attenuators between monochromator and splitter.
    pub fiber_transmission: f64,
    /// Top-hat beam spot on the cathode, µm.
    pub beam_diameter_um: f64,
    pub cathode: CathodeConfig,
    pub noise: NoiseConfig,
    pub stage: StageConfig,
    pub timing: TimingConfig,
    pub faults: FaultConfig,
    /// Listen addresses used by `serve`.
    pub endpoints: BTreeMap<InstrumentKind, String>,
    /// Virtual seconds per wall-clock second when served over TCP.
    pub time_scale: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let endpoints = [
            (InstrumentKind::Picoammeter, "127.0.0.1:5101"),
            (InstrumentKind::Monochromator, "127.0.0.1:5102"),
            (InstrumentKind::Powermeter, "127.0.0.1:5103"),
            (InstrumentKind::Stage, "127.0.0.1:5104"),
        ]
        .into_iter()
        .map(|(k, a)| (k, a.to_string()))
        .collect();
        BenchConfig {
            seed: 0,
            lamp: LampConfig::default(),
            mono: MonoConfig::default(),
            splitter: SplitterConfig::default(),
            fiber_transmission: 1.0,
            beam_diameter_um: 1000.0,
            cathode: CathodeConfig::default(),
            noise: NoiseConfig::default(),
            stage: StageConfig::default(),
            timing: TimingConfig::default(),
            faults: FaultConfig::default(),
            endpoints,
            time_scale: 1.0,
        }
    }
}

impl BenchConfig {
    /// Default bench with every random and systematic error switched off.
    pub fn noiseless() -> Self {
        BenchConfig {
            noise: NoiseConfig::noiseless(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("lamp.base_power_w", self.lamp.base_power_w),
            ("lamp.step_s", self.lamp.step_s),
            ("stage.velocity_um_s", self.stage.velocity_um_s),
            ("cathode.pitch_um", self.cathode.pitch_um),
            ("cathode.radius_um", self.cathode.radius_um),
            ("time_scale", self.time_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(200.0..=2000.0).contains(&self.beam_diameter_um) {
            return Err(format!(
                "beam_diameter_um must lie in [200, 2000], got {}",
                self.beam_diameter_um
            ));
        }
        if !(self.fiber_transmission > 0.0 && self.fiber_transmission <= 1.0) {
            return Err(format!("fiber_transmission must lie in (0, 1], got {}", self.fiber_transmission));
        }
        if !(0.0..=100.0).contains(&self.lamp.setpoint) {
            return Err(format!("lamp.setpoint must lie in [0, 100], got {}", self.lamp.setpoint));
        }
        if !(0.0..1.0).contains(&self.mono.stray_second_order_frac) {
            return Err("mono.stray_second_order_frac must lie in [0, 1)".into());
        }
        if self.mono.filter_cutons.windows(2).any(|w| w[0] >= w[1]) {
            return Err("mono.filter_cutons must be strictly increasing".into());
        }
        let t = self.splitter.transmitted;
        let r = self.splitter.ripple_amplitude;
        if t * (1.0 - r) < 0.4 || t * (1.0 + r) > 0.6 {
            return Err(format!("splitter transmitted fraction {t} with ripple {r} leaves [0.4, 0.6]"));
        }
        if self.timing.jitter_s < 0.0 {
            return Err("timing.jitter_s must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LampConfig {
    /// Percent of full lamp power.
    pub setpoint: f64,
    /// Monochromator output at the throughput peak with setpoint 100 %, W.
    pub base_power_w: f64,
    /// Random-walk sigma of the relative lamp output, per sqrt(second).
    pub drift_rate: f64,
    pub feedback_on: bool,
    pub feedback_gain_p: f64,
    /// Integral gain per control step.
    pub feedback_gain_i: f64,
    /// Internal integration step, s.
    pub step_s: f64,
}

impl Default for LampConfig {
    fn default() -> Self {
        LampConfig {
            setpoint: 100.0,
            base_power_w: 2.0e-9,
            drift_rate: 0.001,
            feedback_on: false,
            feedback_gain_p: 0.1,
            feedback_gain_i: 0.8,
            step_s: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonoConfig {
    /// Second-order power at lambda/2, as a fraction of the first-order output.
    pub stray_second_order_frac: f64,
    pub filter_cutons: [f64; 4],
    pub filter_pass_transmission: f64,
    pub filter_block_transmission: f64,
    /// Lamp x monochromator throughput as (nm, relative) points; empty uses the built-in curve.
    pub throughput: Vec<[f64; 2]>,
}

impl Default for MonoConfig {
    fn default() -> Self {
        MonoConfig {
            stray_second_order_frac: 0.01,
            filter_cutons: [320.0, 420.0, 600.0, 900.0],
            filter_pass_transmission: 0.92,
            filter_block_transmission: 1e-6,
            throughput: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitterConfig {
    /// Fraction of the beam sent to the device-under-test arm.
    pub transmitted: f64,
    /// Relative amplitude of the slow wavelength ripple.
    pub ripple_amplitude: f64,
    pub ripple_period_nm: f64,
}

impl Default for SplitterConfig {
    fn default() -> Self {
        SplitterConfig {
            transmitted: 0.52,
            ripple_amplitude: 0.005,
            ripple_period_nm: 350.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CathodeConfig {
    pub radius_um: f64,
    pub pitch_um: f64,
    /// Stage coordinates of the cathode centre, µm.
    pub center_um: [f64; 2],
    /// Spectral QE at nominal response as (nm, QE) points; empty uses the built-in curve.
    pub spectral: Vec<[f64; 2]>,
    /// Regions of modified response, in cathode-centred coordinates.
    pub structures: Vec<Structure>,
    /// Multiplier grid file (CSV or binary) replacing the disc + structures model.
    pub map_file: Option<PathBuf>,
}

impl Default for CathodeConfig {
    fn default() -> Self {
        CathodeConfig {
            radius_um: 40_000.0,
            pitch_um: 100.0,
            center_um: [150_000.0, 150_000.0],
            spectral: Vec::new(),
            structures: vec![
                Structure::Ring {
                    x_um: 0.0,
                    z_um: 0.0,
                    inner_um: 28_000.0,
                    outer_um: 30_000.0,
                    multiplier: 1.15,
                },
                Structure::Rect {
                    x_min_um: -10_000.0,
                    x_max_um: 10_000.0,
                    z_min_um: -20_000.0,
                    z_max_um: -14_000.0,
                    multiplier: 1.2,
                },
            ],
            map_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// White read noise on every reading.
    pub white: bool,
    /// Frozen per-run calibration errors.
    pub systematic: bool,
    pub powermeter_white_rel: f64,
    pub powermeter_floor_w: f64,
    pub picoammeter_white_rel: f64,
    pub picoammeter_floor_a: f64,
    pub picoammeter_systematic_rel: f64,
    pub dark_current_a: f64,
    /// Power-meter calibration bands; each band's uncertainty is the 1-sigma of its frozen draw.
    pub bands: Vec<CalibrationBand>,
    /// Explicit power-meter head gains, replacing the frozen draws.
    pub head_gains: Option<[f64; 2]>,
    /// Explicit picoammeter gain, replacing the frozen draw.
    pub picoammeter_gain: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            white: true,
            systematic: true,
            powermeter_white_rel: 0.001,
            powermeter_floor_w: 1e-15,
            picoammeter_white_rel: 0.0005,
            picoammeter_floor_a: 2e-14,
            picoammeter_systematic_rel: 0.004,
            dark_current_a: 2e-12,
            bands: default_bands(),
            head_gains: None,
            picoammeter_gain: None,
        }
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        NoiseConfig {
            white: false,
            systematic: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageConfig {
    pub velocity_um_s: f64,
    pub settle_s: f64,
    /// Half-width of the uniform bidirectional repeatability draw, µm.
    pub repeatability_um: f64,
    /// Bound of the per-axis constant accuracy offset, µm.
    pub accuracy_um: f64,
    pub travel_um: f64,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            velocity_um_s: 50_000.0,
            settle_s: 0.05,
            repeatability_um: 2.0,
            accuracy_um: 5.0,
            travel_um: 300_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    /// Response latency per instrument, s.
    pub latency_s: BTreeMap<InstrumentKind, f64>,
    /// Extra uniform latency in [0, jitter_s), drawn per response.
    pub jitter_s: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            latency_s: [
                (InstrumentKind::Picoammeter, 0.004),
                (InstrumentKind::Monochromator, 0.004),
                (InstrumentKind::Powermeter, 0.004),
                (InstrumentKind::Stage, 0.002),
            ]
            .into_iter()
            .collect(),
            jitter_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultConfig {
    /// The shutter acknowledges SHUT O but never opens.
    pub shutter_stuck_closed: bool,
    /// The stage faults on every move after this many successful ones.
    pub stage_fault_after_moves: Option<u32>,
}
