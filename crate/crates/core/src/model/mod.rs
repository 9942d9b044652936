//! Physical quantities, the QE conversion and uncertainty arithmetic.

mod conversion;
mod uncertainty;
mod units;

use thiserror::Error;

pub use conversion::{photocurrent_for, photon_rate, quantum_efficiency};
pub use uncertainty::{
    band_lookup, combined_uncertainty, default_bands, repeatability, validate_bands, CalibrationBand,
    UncertaintyBudget, PICOAMMETER_ACCURACY_REL,
};
pub use units::{
    OpticalPower, Photocurrent, PhysicalConstants, QeValue, Wavelength, CALIBRATION_RANGE_NM, ELEMENTARY_CHARGE,
    ENGINE_RANGE_NM, PHOTOCURRENT_FULL_SCALE, PLANCK, SPEED_OF_LIGHT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{quantity} value {value} is not valid")]
    InvalidQuantity { quantity: &'static str, value: f64 },
    #[error("wavelength {nm} nm outside [{min}, {max}] nm")]
    WavelengthOutOfRange { nm: f64, min: f64, max: f64 },
    #[error("current {amperes} A exceeds the {full_scale} A range")]
    OverRange { amperes: f64, full_scale: f64 },
    #[error("optical power is zero, QE is undefined")]
    ZeroPower,
    #[error("uncertainty must be non-negative, got {0}")]
    NegativeUncertainty(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("no calibration band covers {nm} nm (nearest below: {below:?}, above: {above:?})")]
    UncoveredWavelength {
        nm: f64,
        below: Option<Box<CalibrationBand>>,
        above: Option<Box<CalibrationBand>>,
    },
    #[error("invalid calibration bands: {0}")]
    InvalidBands(String),
}
