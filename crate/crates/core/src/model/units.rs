//! Unit-carrying scalars used throughout the engine and the virtual bench.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Planck constant, J·s (exact, SI 2019).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Elementary charge, C (exact, SI 2019).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Wavelengths the engine will measure at, nm.
pub const ENGINE_RANGE_NM: (f64, f64) = (250.0, 1100.0);
/// Wavelengths a calibration band lookup accepts, nm.
pub const CALIBRATION_RANGE_NM: (f64, f64) = (220.0, 1065.0);
/// Full scale of the picoammeter range used for cathode currents, A.
pub const PHOTOCURRENT_FULL_SCALE: f64 = 2.0e-8;

/// The fixed physical constants, grouped so callers can hand them around as one value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub h: f64,
    pub c: f64,
    pub e: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        h: PLANCK,
        c: SPEED_OF_LIGHT,
        e: ELEMENTARY_CHARGE,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Wavelength(f64);

impl Wavelength {
    /// Any positive, finite wavelength in nanometres.
    pub fn new(nm: f64) -> Result<Self, ModelError> {
        if nm.is_finite() && nm > 0.0 {
            Ok(Wavelength(nm))
        } else {
            Err(ModelError::InvalidQuantity {
                quantity: "wavelength",
                value: nm,
            })
        }
    }

    /// A wavelength inside the engine's measurable range.
    pub fn engine(nm: f64) -> Result<Self, ModelError> {
        let w = Self::new(nm)?;
        w.ensure_in(ENGINE_RANGE_NM)?;
        Ok(w)
    }

    pub fn nm(self) -> f64 {
        self.0
    }

    pub fn meters(self) -> f64 {
        self.0 * 1e-9
    }

    pub fn ensure_in(self, (min, max): (f64, f64)) -> Result<(), ModelError> {
        if self.0 >= min && self.0 <= max {
            Ok(())
        } else {
            Err(ModelError::WavelengthOutOfRange {
                nm: self.0,
                min,
                max,
            })
        }
    }
}

impl fmt::Display for Wavelength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nm", self.0)
    }
}

/// Optical power in watts. Never negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpticalPower(f64);

impl OpticalPower {
    pub const ZERO: OpticalPower = OpticalPower(0.0);

    pub fn new(watts: f64) -> Result<Self, ModelError> {
        if watts.is_finite() && watts >= 0.0 {
            Ok(OpticalPower(watts))
        } else {
            Err(ModelError::InvalidQuantity {
                quantity: "optical power",
                value: watts,
            })
        }
    }

    pub fn watts(self) -> f64 {
        self.0
    }
}

/// Photocurrent in amperes. Signed: dark offsets and read noise can push it below zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Photocurrent(f64);

impl Photocurrent {
    pub fn new(amperes: f64) -> Result<Self, ModelError> {
        if amperes.is_finite() {
            Ok(Photocurrent(amperes))
        } else {
            Err(ModelError::InvalidQuantity {
                quantity: "photocurrent",
                value: amperes,
            })
        }
    }

    /// Like [`Photocurrent::new`] but also enforces a measurement range.
    pub fn within_range(amperes: f64, full_scale: f64) -> Result<Self, ModelError> {
        let i = Self::new(amperes)?;
        if amperes.abs() > full_scale {
            return Err(ModelError::OverRange {
                amperes,
                full_scale,
            });
        }
        Ok(i)
    }

    pub fn amperes(self) -> f64 {
        self.0
    }
}

/// A quantum efficiency estimate with its two error classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QeValue {
    pub mean: f64,
    /// Relative sample standard deviation of the per-sample QE values.
    pub repeatability_rel: f64,
    /// Relative calibration (accuracy) uncertainty.
    pub systematic_rel: f64,
    pub n_samples: usize,
}

impl QeValue {
    /// Plausible band for a measured QE once noise is allowed for.
    pub const PLAUSIBLE: (f64, f64) = (-0.01, 1.05);

    pub fn total_rel(&self) -> f64 {
        (self.repeatability_rel * self.repeatability_rel
            + self.systematic_rel * self.systematic_rel)
            .sqrt()
    }

    /// True when the mean falls outside the tolerated physical window.
    pub fn is_flagged(&self) -> bool {
        !(self.mean >= Self::PLAUSIBLE.0 && self.mean <= Self::PLAUSIBLE.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_ranges() {
        assert!(Wavelength::new(0.0).is_err());
        assert!(Wavelength::new(-5.0).is_err());
        assert!(Wavelength::new(f64::NAN).is_err());
        assert!(Wavelength::engine(249.9).is_err());
        assert!(Wavelength::engine(1100.0).is_ok());
        assert!(Wavelength::engine(1100.1).is_err());
        assert!((Wavelength::new(410.0).unwrap().meters() - 410.0e-9).abs() < 1e-20);
    }

    #[test]
    fn power_must_be_non_negative() {
        assert!(OpticalPower::new(-1e-12).is_err());
        assert!(OpticalPower::new(0.0).is_ok());
    }

    #[test]
    fn photocurrent_range() {
        assert!(Photocurrent::new(-1e-12).is_ok());
        assert!(Photocurrent::within_range(1.9e-8, PHOTOCURRENT_FULL_SCALE).is_ok());
        assert!(matches!(
            Photocurrent::within_range(-2.1e-8, PHOTOCURRENT_FULL_SCALE),
            Err(ModelError::OverRange { .. })
        ));
    }

    #[test]
    fn qe_flagging() {
        let mut q = QeValue {
            mean: 0.25,
            repeatability_rel: 0.003,
            systematic_rel: 0.004,
            n_samples: 10,
        };
        assert!(!q.is_flagged());
        assert!((q.total_rel() - 0.005).abs() < 1e-15);
        q.mean = -0.02;
        assert!(q.is_flagged());
        q.mean = 1.06;
        assert!(q.is_flagged());
    }
}
