//! Result files, run manifests and configuration loading.

mod manifest;
mod map;
mod raw;
mod summary;
mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{RunConfig, SplitMethod};
use crate::simbench::BenchConfig;

pub use manifest::{run_id, RunManifest, MANIFEST_FILE};
pub use map::{heatmap_levels, read_map_csv, write_map, MapRow, HEATMAP_FILE, MAP_FILE, MATRIX_FILE};
pub use raw::{
    analyze_raw, read_raw_csv, render_analysis_csv, write_raw_csv, AnalyzedPoint, ANALYSIS_COLUMNS, ANALYSIS_FILE, RAW_FILE,
};
pub use summary::{band_summaries, BandSummary, FailureSummary, Summary, SUMMARY_FILE};
pub use tables::{
    compare_spectra, read_spectrum_csv, read_splitter_csv, render_spectrum_csv, write_spectrum_csv, write_splitter_csv,
    write_transcript, SpectrumRow, COMPARE_FILE, SPECTRUM_COLUMNS, SPECTRUM_FILE, SPLITTER_FILE, TRANSCRIPT_FILE,
};

/// Version of every file layout written here.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("records do not match the grid: {0}")]
    Consistency(String),
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, message: impl ToString) -> Self {
        IoError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

/// Writes `bytes` next to `path` under a temporary name, then renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let name = path
        .file_name()
        .ok_or_else(|| IoError::format(path, "not a file path"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| IoError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        IoError::io(path, e)
    })
}

/// Comment lines opening every result file.
pub fn comment_header(schema: &str, run_id: &str) -> String {
    format!("# schema={schema}/{SCHEMA_VERSION}\n# run_id={run_id} manifest={MANIFEST_FILE}\n")
}

/// Which calibration a `calibrate-splitter` run performs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationPlan {
    pub method: SplitMethod,
    /// Empty means the run wavelengths.
    pub wavelengths: Vec<f64>,
}

impl Default for CalibrationPlan {
    fn default() -> Self {
        CalibrationPlan {
            method: SplitMethod::Exchanged,
            wavelengths: Vec::new(),
        }
    }
}

/// Contents of a station configuration file. A `[bench]` table runs the
/// measurement against an in-process virtual bench.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationConfig {
    pub run: RunConfig,
    pub calibration: CalibrationPlan,
    pub bench: Option<BenchConfig>,
}

impl StationConfig {
    pub fn calibration_wavelengths(&self) -> &[f64] {
        if self.calibration.wavelengths.is_empty() {
            &self.run.wavelengths
        } else {
            &self.calibration.wavelengths
        }
    }
}

pub fn load_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    toml::from_str(&text).map_err(|e| IoError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_station_config(path: &Path) -> Result<StationConfig, IoError> {
    let config: StationConfig = load_toml(path)?;
    let bad = |message: String| IoError::Config {
        path: path.to_path_buf(),
        message,
    };
    if let Some(bench) = &config.bench {
        bench.validate().map_err(bad)?;
    }
    config.run.validate_common().map_err(bad)?;
    Ok(config)
}

pub(crate) fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("plain data serializes to TOML")
}
