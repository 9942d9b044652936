use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{SplitEntry, SplitRatioTable, SpectrumRecord, TranscriptEntry};
use crate::model::QeValue;

use super::{atomic_write, comment_header, IoError};

pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const SPLITTER_FILE: &str = "splitter_table.csv";
pub const TRANSCRIPT_FILE: &str = "transcript.log";
pub const COMPARE_FILE: &str = "compare.dat";

pub const SPECTRUM_COLUMNS: [&str; 9] = [
    "wavelength_nm",
    "qe",
    "qe_repeatability_rel",
    "qe_systematic_rel",
    "qe_total_rel",
    "p_dut_w",
    "i_a",
    "filter_slot",
    "n_samples",
];

/// One line of a spectrum file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub wavelength_nm: f64,
    pub qe: f64,
    pub qe_repeatability_rel: f64,
    pub qe_systematic_rel: f64,
    pub qe_total_rel: f64,
    pub p_dut_w: f64,
    pub i_a: f64,
    pub filter_slot: u8,
    pub n_samples: usize,
}

impl SpectrumRow {
    pub fn qe_value(&self) -> QeValue {
        QeValue {
            mean: self.qe,
            repeatability_rel: self.qe_repeatability_rel,
            systematic_rel: self.qe_systematic_rel,
            n_samples: self.n_samples,
        }
    }
}

/// Shortest text that parses back to the same bits.
pub(crate) fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn render_spectrum_csv(records: &[SpectrumRecord], run_id: &str) -> String {
    let mut out = comment_header("qe-spectrum", run_id);
    out.push_str(&SPECTRUM_COLUMNS.join(","));
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.nm),
            num(r.qe.mean),
            num(r.qe.repeatability_rel),
            num(r.qe.systematic_rel),
            num(r.qe.total_rel()),
            num(r.p_dut_mean_w),
            num(r.i_mean_a),
            r.filter_slot,
            r.qe.n_samples
        );
    }
    out
}

pub fn write_spectrum_csv(path: &Path, records: &[SpectrumRecord], run_id: &str) -> Result<(), IoError> {
    if records.is_empty() {
        return Err(IoError::format(path, "no spectrum records to write"));
    }
    atomic_write(path, render_spectrum_csv(records, run_id).as_bytes())
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>, IoError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => IoError::io(path, io),
            other => IoError::format(path, format!("{other:?}")),
        })
}

pub(crate) fn read_rows<T: serde::de::DeserializeOwned>(path: &Path, columns: &[&str]) -> Result<Vec<T>, IoError> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| IoError::format(path, e))?.clone();
    if header.iter().ne(columns.iter().copied()) {
        return Err(IoError::format(path, format!("unexpected columns {:?}", header.iter().collect::<Vec<_>>())));
    }
    rdr.deserialize()
        .map(|r| r.map_err(|e| IoError::format(path, e)))
        .collect()
}

pub fn read_spectrum_csv(path: &Path) -> Result<Vec<SpectrumRow>, IoError> {
    read_rows(path, &SPECTRUM_COLUMNS)
}

const SPLITTER_COLUMNS: [&str; 5] = ["nm", "k", "method", "uncertainty_rel", "monitor_gain"];

pub fn write_splitter_csv(path: &Path, table: &SplitRatioTable, run_id: &str) -> Result<(), IoError> {
    let mut out = comment_header("qe-splitter", run_id);
    out.push_str(&SPLITTER_COLUMNS.join(","));
    out.push('\n');
    for e in table.entries() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(e.nm),
            num(e.k),
            e.method.name(),
            num(e.uncertainty_rel),
            num(e.monitor_gain)
        );
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_splitter_csv(path: &Path) -> Result<SplitRatioTable, IoError> {
    let entries: Vec<SplitEntry> = read_rows(path, &SPLITTER_COLUMNS)?;
    SplitRatioTable::new(entries).map_err(|e| IoError::format(path, e))
}

pub fn write_transcript(path: &Path, entries: &[TranscriptEntry], run_id: &str) -> Result<(), IoError> {
    let mut out = comment_header("qe-transcript", run_id);
    for e in entries {
        out.push_str(&e.render());
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Whitespace-separated overlay of several spectra on the union of their
/// wavelengths: QE and total relative error per input, `NA` where absent.
pub fn compare_spectra(inputs: &[(String, Vec<SpectrumRow>)]) -> String {
    let mut out = String::from("# overlay of spectrum files\n");
    for (i, (label, _)) in inputs.iter().enumerate() {
        let _ = writeln!(out, "# {}: {label}", i + 1);
    }
    out.push_str("wavelength_nm");
    for i in 1..=inputs.len() {
        let _ = write!(out, " qe_{i} total_rel_{i}");
    }
    out.push('\n');
    let grid: BTreeSet<u64> = inputs
        .iter()
        .flat_map(|(_, rows)| rows.iter().map(|r| r.wavelength_nm.to_bits()))
        .collect();
    let mut nms: Vec<f64> = grid.into_iter().map(f64::from_bits).collect();
    nms.sort_by(f64::total_cmp);
    for nm in nms {
        out.push_str(&num(nm));
        for (_, rows) in inputs {
            match rows.iter().find(|r| r.wavelength_nm == nm) {
                Some(r) => {
                    let _ = write!(out, " {} {}", num(r.qe), num(r.qe_total_rel));
                }
                None => out.push_str(" NA NA"),
            }
        }
        out.push('\n');
    }
    out
}
