use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::model::{default_bands, validate_bands, CalibrationBand, Wavelength, ENGINE_RANGE_NM, PICOAMMETER_ACCURACY_REL};
use crate::protocol::InstrumentKind;
use crate::scan::ScanGrid;

/// What to do at wavelengths no calibration band covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BandPolicy {
    /// Use the larger uncertainty of the neighbouring bands and flag the record.
    #[default]
    Nearest,
    /// Fail the point.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SettleConfig {
    pub wavelength_s: f64,
    pub filter_s: f64,
    /// Wait after the stage reports it has stopped.
    pub stage_s: f64,
}

impl Default for SettleConfig {
    fn default() -> Self {
        SettleConfig {
            wavelength_s: 0.5,
            filter_s: 1.0,
            stage_s: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub endpoints: BTreeMap<InstrumentKind, String>,
    /// Time over which one point's samples are spread, s.
    pub averaging_window_s: f64,
    pub samples_per_point: usize,
    pub wavelengths: Vec<f64>,
    pub grid: Option<ScanGrid>,
    /// Stage position for spectra, µm.
    pub fixed_position: Option<[f64; 2]>,
    pub max_read_skew_ms: f64,
    /// Points between dark re-measurements; 0 measures dark only at the start.
    pub dark_every: usize,
    pub dark_samples: usize,
    pub splitter_table: Option<PathBuf>,
    /// Filter slot used regardless of wavelength. Bypasses the order-sorting check.
    pub force_filter: Option<u8>,
    /// Cut-on wavelengths of filter slots 1..4, nm.
    pub filter_cutons: [f64; 4],
    pub settle: SettleConfig,
    pub lamp_setpoint: f64,
    pub lamp_feedback: bool,
    pub picoammeter_range_a: f64,
    pub uncovered_band_policy: BandPolicy,
    pub bands: Vec<CalibrationBand>,
    pub picoammeter_accuracy_rel: f64,
    /// Monitor readings below this are treated as no light.
    pub min_monitor_power_w: f64,
    pub io_timeout_s: f64,
    pub stage_poll_s: f64,
    pub stage_timeout_s: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            endpoints: BTreeMap::new(),
            averaging_window_s: 1.0,
            samples_per_point: 10,
            wavelengths: Vec::new(),
            grid: None,
            fixed_position: None,
            max_read_skew_ms: 10.0,
            dark_every: 0,
            dark_samples: 10,
            splitter_table: None,
            force_filter: None,
            filter_cutons: [320.0, 420.0, 600.0, 900.0],
            settle: SettleConfig::default(),
            lamp_setpoint: 100.0,
            lamp_feedback: true,
            picoammeter_range_a: 2e-8,
            uncovered_band_policy: BandPolicy::Nearest,
            bands: default_bands(),
            picoammeter_accuracy_rel: PICOAMMETER_ACCURACY_REL,
            min_monitor_power_w: 1e-14,
            io_timeout_s: 5.0,
            stage_poll_s: 0.05,
            stage_timeout_s: 60.0,
        }
    }
}

impl RunConfig {
    /// Checks everything except the grid / fixed-position choice.
    pub fn validate_common(&self) -> Result<(), String> {
        if self.samples_per_point < 2 {
            return Err(format!("samples_per_point must be at least 2, got {}", self.samples_per_point));
        }
        if self.dark_samples < 2 {
            return Err(format!("dark_samples must be at least 2, got {}", self.dark_samples));
        }
        if self.wavelengths.is_empty() {
            return Err("wavelengths must not be empty".into());
        }
        for &nm in &self.wavelengths {
            Wavelength::engine(nm).map_err(|e| e.to_string())?;
        }
        if let Some(slot) = self.force_filter {
            if slot > 4 {
                return Err(format!("force_filter must be 0..4, got {slot}"));
            }
        }
        if !(self.max_read_skew_ms > 0.0) {
            return Err("max_read_skew_ms must be positive".into());
        }
        if !(self.averaging_window_s >= 0.0) {
            return Err("averaging_window_s must be non-negative".into());
        }
        if !(0.0..=100.0).contains(&self.lamp_setpoint) {
            return Err(format!("lamp_setpoint must lie in [0, 100], got {}", self.lamp_setpoint));
        }
        if !(self.stage_poll_s > 0.0 && self.io_timeout_s > 0.0) {
            return Err("stage_poll_s and io_timeout_s must be positive".into());
        }
        validate_bands(&self.bands).map_err(|e| e.to_string())?;
        Ok(())
    }

    /// Full check for a measurement run: exactly one of grid and fixed position.
    pub fn validate(&self) -> Result<(), String> {
        self.validate_common()?;
        match (&self.grid, &self.fixed_position) {
            (Some(_), Some(_)) => Err("set either grid or fixed_position, not both".into()),
            (None, None) => Err("one of grid or fixed_position is required".into()),
            (Some(g), None) => g.validate().map_err(|e| e.to_string()),
            (None, Some(_)) => Ok(()),
        }
    }

    pub fn max_skew_s(&self) -> f64 {
        self.max_read_skew_ms / 1000.0
    }
}

/// Checks a wavelength list against the measurable range.
pub fn check_wavelengths(nms: &[f64]) -> Result<(), String> {
    for &nm in nms {
        Wavelength::new(nm)
            .and_then(|w| w.ensure_in(ENGINE_RANGE_NM))
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}
