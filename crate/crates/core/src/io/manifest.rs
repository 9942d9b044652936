use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{atomic_write, load_toml, to_toml, IoError, StationConfig, SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Identifies a run by its start time and bench seed. Runs against live
/// instruments have no seed.
pub fn run_id(started_at_s: f64, seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("t{started_at_s:.6}-s{s}"),
        None => format!("t{started_at_s:.6}-live"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub command: String,
    pub software_version: String,
    pub seed: Option<u64>,
    pub started_at_s: f64,
    /// Identification strings, keyed by instrument name.
    pub instruments: BTreeMap<String, String>,
    pub calibration_table: Option<String>,
    pub config: StationConfig,
}

impl RunManifest {
    pub fn new(command: &str, started_at_s: f64, seed: Option<u64>, config: StationConfig) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            run_id: run_id(started_at_s, seed),
            command: command.to_string(),
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started_at_s,
            instruments: BTreeMap::new(),
            calibration_table: None,
            config,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), IoError> {
        atomic_write(&dir.join(MANIFEST_FILE), to_toml(self).as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self, IoError> {
        load_toml(&dir.join(MANIFEST_FILE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("spectrum", 0.0, Some(42), StationConfig::default());
        m.instruments.insert("picoammeter".into(), "SIM,6485,0,1".into());
        m.calibration_table = Some("splitter_table.csv".into());
        m.write(dir.path()).unwrap();
        assert_eq!(RunManifest::read(dir.path()).unwrap(), m);
        assert_eq!(m.run_id, "t0.000000-s42");
        assert_eq!(run_id(1.5, None), "t1.500000-live");
    }
}
