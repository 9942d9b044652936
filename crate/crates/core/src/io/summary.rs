use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::PointFailure;
use crate::model::{combined_uncertainty, CalibrationBand, ModelError, QeValue};

use super::{atomic_write, load_toml, to_toml, IoError, SCHEMA_VERSION};

pub const SUMMARY_FILE: &str = "summary.toml";

/// Error budget of one calibration band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub power_meter_rel: f64,
    pub picoammeter_rel: f64,
    pub total_rel: f64,
    /// Externally quoted total, when one is known.
    pub quoted_total_rel: Option<f64>,
    /// Computed minus quoted.
    pub discrepancy_rel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSummary {
    pub index: usize,
    pub wavelength_nm: f64,
    pub error: String,
    pub partial_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub run_id: String,
    pub kind: String,
    pub points_planned: usize,
    pub records: usize,
    pub failed: usize,
    pub complete: bool,
    pub checkpoint: Option<usize>,
    pub aborted: Option<String>,
    pub qe_min: Option<f64>,
    pub qe_max: Option<f64>,
    pub repeatability_rel_median: Option<f64>,
    pub repeatability_rel_max: Option<f64>,
    /// Wavelengths whose systematic came from a neighbouring band.
    pub band_extrapolated_nm: Vec<f64>,
    pub bands: Vec<BandSummary>,
    pub failures: Vec<FailureSummary>,
}

pub fn band_summaries(bands: &[CalibrationBand], picoammeter_rel: f64) -> Result<Vec<BandSummary>, ModelError> {
    bands
        .iter()
        .map(|b| {
            let u = combined_uncertainty(b.rel_uncertainty, picoammeter_rel)?;
            Ok(BandSummary {
                lambda_min: b.lambda_min,
                lambda_max: b.lambda_max,
                power_meter_rel: u.power_meter_rel,
                picoammeter_rel: u.picoammeter_rel,
                total_rel: u.total_rel,
                quoted_total_rel: b.quoted_total_rel,
                discrepancy_rel: b.quoted_total_rel.map(|q| u.total_rel - q),
            })
        })
        .collect()
}

impl Summary {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        run_id: &str,
        kind: &str,
        points_planned: usize,
        qe: &[QeValue],
        failures: &[PointFailure],
        checkpoint: Option<usize>,
        aborted: Option<String>,
        band_extrapolated_nm: Vec<f64>,
        bands: &[CalibrationBand],
        picoammeter_rel: f64,
    ) -> Result<Self, ModelError> {
        let means = qe.iter().map(|q| q.mean);
        let mut reps: Vec<f64> = qe.iter().map(|q| q.repeatability_rel).collect();
        reps.sort_by(f64::total_cmp);
        Ok(Summary {
            schema_version: SCHEMA_VERSION,
            run_id: run_id.to_string(),
            kind: kind.to_string(),
            points_planned,
            records: qe.len(),
            failed: failures.len(),
            complete: checkpoint.is_none() && aborted.is_none() && qe.len() + failures.len() == points_planned,
            checkpoint,
            aborted,
            qe_min: means.clone().reduce(f64::min),
            qe_max: means.reduce(f64::max),
            repeatability_rel_median: (!reps.is_empty()).then(|| reps[reps.len() / 2]),
            repeatability_rel_max: reps.last().copied(),
            band_extrapolated_nm,
            bands: band_summaries(bands, picoammeter_rel)?,
            failures: failures
                .iter()
                .map(|f| FailureSummary {
                    index: f.index,
                    wavelength_nm: f.nm,
                    error: f.error.clone(),
                    partial_samples: f.partial.as_ref().map_or(0, |p| p.samples.len()),
                })
                .collect(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), IoError> {
        atomic_write(&dir.join(SUMMARY_FILE), to_toml(self).as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self, IoError> {
        load_toml(&dir.join(SUMMARY_FILE))
    }
}
