use serde::{Deserialize, Serialize};

use crate::model::{
    band_lookup, combined_uncertainty, quantum_efficiency, repeatability, CalibrationBand, ModelError, OpticalPower,
    Photocurrent, QeValue, Wavelength,
};
use crate::scan::PathPoint;

use super::config::BandPolicy;
use super::split::SplitEntry;

/// One accepted power/current pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t_power: f64,
    pub t_current: f64,
    pub p_monitor_w: f64,
    /// Raw picoammeter reading, dark not subtracted.
    pub i_a: f64,
    pub qe: f64,
}

/// QE of one sample: monitor power converted to DUT power, dark-corrected
/// current. Shared by the engine and by offline re-analysis.
pub fn sample_qe(p_monitor_w: f64, split: &SplitEntry, i_a: f64, dark_a: f64, nm: f64) -> Result<f64, ModelError> {
    let p_dut = split.k * p_monitor_w / split.monitor_gain;
    quantum_efficiency(
        Photocurrent::new(i_a - dark_a)?,
        OpticalPower::new(p_dut).map_err(|_| ModelError::ZeroPower)?,
        Wavelength::new(nm)?,
    )
}

/// Mean QE with its relative repeatability and the given systematic.
pub fn assemble_qe(qe_samples: &[f64], systematic_rel: f64) -> Result<QeValue, ModelError> {
    let (mean, sd) = repeatability(qe_samples)?;
    Ok(QeValue {
        mean,
        repeatability_rel: if mean == 0.0 { f64::INFINITY } else { sd / mean.abs() },
        systematic_rel,
        n_samples: qe_samples.len(),
    })
}

/// Calibration systematic at `nm`: power-meter band in quadrature with the
/// picoammeter. The flag is set when the band had to be borrowed from a neighbour.
pub fn systematic_rel(
    bands: &[CalibrationBand],
    policy: BandPolicy,
    picoammeter_rel: f64,
    nm: f64,
) -> Result<(f64, bool), ModelError> {
    let (band, borrowed) = match band_lookup(bands, Wavelength::new(nm)?) {
        Ok(u) => (u, false),
        Err(ModelError::UncoveredWavelength { below, above, .. }) if policy == BandPolicy::Nearest => {
            let u = [below, above]
                .into_iter()
                .flatten()
                .map(|b| b.rel_uncertainty)
                .fold(0.0, f64::max);
            (u, true)
        }
        Err(e) => return Err(e),
    };
    Ok((combined_uncertainty(band, picoammeter_rel)?.total_rel, borrowed))
}

/// Everything measured at one wavelength and position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMeasurement {
    pub nm: f64,
    pub filter_slot: u8,
    pub split: SplitEntry,
    pub dark_a: f64,
    pub samples: Vec<Sample>,
    /// Pairs rejected for skew and read again.
    pub retries: usize,
}

impl PointMeasurement {
    pub fn p_dut_mean(&self) -> f64 {
        mean(self.samples.iter().map(|s| self.split.k * s.p_monitor_w / self.split.monitor_gain))
    }

    /// Mean dark-corrected current.
    pub fn i_mean(&self) -> f64 {
        mean(self.samples.iter().map(|s| s.i_a - self.dark_a))
    }

    pub fn qe_samples(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.qe).collect()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub nm: f64,
    pub qe: QeValue,
    pub p_dut_mean_w: f64,
    pub i_mean_a: f64,
    pub filter_slot: u8,
    /// Virtual (or wall) time the point finished, s.
    pub timestamp: f64,
    pub band_extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub point: PathPoint,
    pub nm: f64,
    pub qe: QeValue,
    pub p_dut_mean_w: f64,
    pub i_mean_a: f64,
    pub timestamp: f64,
}

/// A point that produced no record, with whatever samples were taken.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub index: usize,
    pub nm: f64,
    pub error: String,
    pub partial: Option<PointMeasurement>,
}

/// One accepted sample as logged for offline re-analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSampleRow {
    pub point_index: usize,
    pub wavelength_nm: f64,
    pub ix: usize,
    pub iz: usize,
    pub sample: usize,
    pub t_power_s: f64,
    pub t_current_s: f64,
    pub p_monitor_w: f64,
    pub i_a: f64,
    pub dark_a: f64,
    pub k: f64,
    pub monitor_gain: f64,
    pub filter_slot: u8,
    pub systematic_rel: f64,
}

impl RawSampleRow {
    pub fn from_point(point_index: usize, (ix, iz): (usize, usize), m: &PointMeasurement, systematic_rel: f64) -> Vec<Self> {
        m.samples
            .iter()
            .enumerate()
            .map(|(sample, s)| RawSampleRow {
                point_index,
                wavelength_nm: m.nm,
                ix,
                iz,
                sample,
                t_power_s: s.t_power,
                t_current_s: s.t_current,
                p_monitor_w: s.p_monitor_w,
                i_a: s.i_a,
                dark_a: m.dark_a,
                k: m.split.k,
                monitor_gain: m.split.monitor_gain,
                filter_slot: m.filter_slot,
                systematic_rel,
            })
            .collect()
    }
}

/// Run log line.
#[derive(Debug, Clone, PartialEq)]
pub enum TranscriptEntry {
    Pair {
        point: usize,
        nm: f64,
        sample: usize,
        t_power: f64,
        t_current: f64,
        accepted: bool,
    },
    Dark {
        t: f64,
        mean_a: f64,
        sd_a: f64,
    },
    Note {
        t: f64,
        text: String,
    },
}

impl TranscriptEntry {
    pub fn skew(&self) -> Option<f64> {
        match self {
            TranscriptEntry::Pair { t_power, t_current, .. } => Some((t_power - t_current).abs()),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        match self {
            TranscriptEntry::Pair {
                point,
                nm,
                sample,
                t_power,
                t_current,
                accepted,
            } => format!(
                "pair point={point} nm={nm} sample={sample} t_power={t_power:.6} t_current={t_current:.6} skew_ms={:.3} {}",
                (t_power - t_current).abs() * 1e3,
                if *accepted { "accepted" } else { "rejected" }
            ),
            TranscriptEntry::Dark { t, mean_a, sd_a } => format!("dark t={t:.6} mean_a={mean_a:e} sd_a={sd_a:e}"),
            TranscriptEntry::Note { t, text } => format!("note t={t:.6} {text}"),
        }
    }
}

/// Progress notifications for a front end.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Dark { mean_a: f64 },
    Point { index: usize, total: usize, nm: f64, qe: f64 },
    PointFailed { index: usize, nm: f64, error: String },
    SkewRetry { index: usize, nm: f64, skew_s: f64 },
}
