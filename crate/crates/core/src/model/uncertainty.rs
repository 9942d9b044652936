//! Error budgets: calibration bands, quadrature combination and repeatability.

use serde::{Deserialize, Serialize};

use super::units::Wavelength;
use super::ModelError;

/// Accuracy of the picoammeter on its 20 nA range, relative.
pub const PICOAMMETER_ACCURACY_REL: f64 = 0.004;

/// A wavelength interval over which the power-meter calibration uncertainty is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBand {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub rel_uncertainty: f64,
    /// Total error quoted by an external reference for this band, kept only so
    /// reports can show it next to the computed quadrature total.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quoted_total_rel: Option<f64>,
}

impl CalibrationBand {
    pub fn new(lambda_min: f64, lambda_max: f64, rel_uncertainty: f64) -> Result<Self, ModelError> {
        let band = CalibrationBand {
            lambda_min,
            lambda_max,
            rel_uncertainty,
            quoted_total_rel: None,
        };
        band.validate()?;
        Ok(band)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if !(self.lambda_min.is_finite() && self.lambda_max.is_finite()) || self.lambda_min >= self.lambda_max {
            return Err(ModelError::InvalidBands(format!(
                "band [{}, {}] is empty",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.rel_uncertainty > 0.0 && self.rel_uncertainty.is_finite()) {
            return Err(ModelError::InvalidBands(format!(
                "band [{}, {}] has non-positive uncertainty {}",
                self.lambda_min, self.lambda_max, self.rel_uncertainty
            )));
        }
        Ok(())
    }

    fn contains(&self, nm: f64) -> bool {
        nm >= self.lambda_min && nm <= self.lambda_max
    }

    /// Distance from `nm` to the nearest edge of the band, zero inside.
    pub fn distance_nm(&self, nm: f64) -> f64 {
        if nm < self.lambda_min {
            self.lambda_min - nm
        } else if nm > self.lambda_max {
            nm - self.lambda_max
        } else {
            0.0
        }
    }
}

/// Power-meter calibration bands and their quoted totals.
pub fn default_bands() -> Vec<CalibrationBand> {
    let row = |min, max, u, quoted| CalibrationBand {
        lambda_min: min,
        lambda_max: max,
        rel_uncertainty: u,
        quoted_total_rel: Some(quoted),
    };
    vec![
        row(220.0, 300.0, 0.0345, 0.0352),
        row(300.0, 430.0, 0.0167, 0.0171),
        row(430.0, 1000.0, 0.0113, 0.0116),
        row(1035.0, 1065.0, 0.0433, 0.0435),
    ]
}

/// Checks that bands are individually valid, sorted and non-overlapping.
/// Adjacent bands may share an edge.
pub fn validate_bands(bands: &[CalibrationBand]) -> Result<(), ModelError> {
    if bands.is_empty() {
        return Err(ModelError::InvalidBands("no calibration bands".into()));
    }
    for b in bands {
        b.validate()?;
    }
    for pair in bands.windows(2) {
        if pair[1].lambda_min < pair[0].lambda_max {
            return Err(ModelError::InvalidBands(format!(
                "bands [{}, {}] and [{}, {}] overlap or are unsorted",
                pair[0].lambda_min, pair[0].lambda_max, pair[1].lambda_min, pair[1].lambda_max
            )));
        }
    }
    Ok(())
}

/// Relative power-meter uncertainty of the band containing `lambda`.
///
/// A wavelength on a shared edge belongs to the band that starts there.
pub fn band_lookup(bands: &[CalibrationBand], lambda: Wavelength) -> Result<f64, ModelError> {
    validate_bands(bands)?;
    let nm = lambda.nm();
    if let Some(band) = bands.iter().rev().find(|b| b.contains(nm)) {
        return Ok(band.rel_uncertainty);
    }
    let below = bands.iter().rev().find(|b| b.lambda_max < nm).copied();
    let above = bands.iter().find(|b| b.lambda_min > nm).copied();
    Err(ModelError::UncoveredWavelength {
        nm,
        below: below.map(Box::new),
        above: above.map(Box::new),
    })
}

/// Per-source relative uncertainties and their quadrature total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBudget {
    pub power_meter_rel: f64,
    pub picoammeter_rel: f64,
    pub total_rel: f64,
}

pub fn combined_uncertainty(power_meter_rel: f64, picoammeter_rel: f64) -> Result<UncertaintyBudget, ModelError> {
    for v in [power_meter_rel, picoammeter_rel] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(ModelError::NegativeUncertainty(v));
        }
    }
    Ok(UncertaintyBudget {
        power_meter_rel,
        picoammeter_rel,
        total_rel: (power_meter_rel * power_meter_rel + picoammeter_rel * picoammeter_rel).sqrt(),
    })
}

/// Mean and sample standard deviation (n - 1 denominator).
///
/// Samples are summed in sorted order so that any permutation of the input
/// gives a bit-identical result.
pub fn repeatability(samples: &[f64]) -> Result<(f64, f64), ModelError> {
    if samples.len() < 2 {
        return Err(ModelError::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = sorted.iter().map(|x| (x - mean) * (x - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let var = dev.iter().sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}
