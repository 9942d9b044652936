//! Measurement engine: splitter calibration, dark handling, filter choice,
//! paired power/current sampling, spectra and raster scans.

mod config;
mod filter;
mod records;
mod run;
mod split;

use thiserror::Error;

use crate::model::ModelError;
use crate::protocol::SessionError;
use crate::scan::ScanError;

pub use config::{check_wavelengths, BandPolicy, RunConfig, SettleConfig};
pub use filter::{select_filter, FilterError};
pub use records::{
    assemble_qe, sample_qe, systematic_rel, Event, MapRecord, PointFailure, PointMeasurement, RawSampleRow, Sample,
    SpectrumRecord, TranscriptEntry,
};
pub use run::{ArmMounting, Engine, Instruments, ScanRun, SpectrumRun};
pub use split::{exchange_combine, SplitEntry, SplitMethod, SplitRatioTable};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("run config: {0}")]
    Config(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error("no splitter calibration table loaded")]
    NoSplitterTable,
    #[error("{nm} nm is outside the calibrated span [{min}, {max}] nm")]
    OutsideCalibration { nm: f64, min: f64, max: f64 },
    #[error("splitter calibration: {0}")]
    Calibration(String),
    #[error("read skew {skew_s} s at {nm} nm exceeds {limit_s} s after retry")]
    Skew { nm: f64, skew_s: f64, limit_s: f64 },
    #[error("photocurrent over range at {nm} nm")]
    OverRange {
        nm: f64,
        partial: Option<Box<PointMeasurement>>,
    },
    #[error("stage fault: {0}")]
    StageFault(String),
    #[error("stage did not stop in time")]
    StageTimeout,
}

impl EngineError {
    pub fn is_transport_loss(&self) -> bool {
        matches!(self, EngineError::Session(e) if e.is_transport_loss())
    }

    /// The measurement was refused on safety grounds rather than attempted.
    pub fn is_refusal(&self) -> bool {
        matches!(self, EngineError::Filter(FilterError::UnsafeOrder { .. }))
    }
}
