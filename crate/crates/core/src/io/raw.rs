use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{assemble_qe, sample_qe, PointMeasurement, RawSampleRow, Sample, SplitEntry, SplitMethod};
use crate::model::QeValue;

use super::tables::{num, read_rows};
use super::{atomic_write, comment_header, IoError};

pub const RAW_FILE: &str = "raw_samples.csv";

const RAW_COLUMNS: [&str; 14] = [
    "point_index",
    "wavelength_nm",
    "ix",
    "iz",
    "sample",
    "t_power_s",
    "t_current_s",
    "p_monitor_w",
    "i_a",
    "dark_a",
    "k",
    "monitor_gain",
    "filter_slot",
    "systematic_rel",
];

pub fn write_raw_csv(path: &Path, rows: &[RawSampleRow], run_id: &str) -> Result<(), IoError> {
    let mut buf = comment_header("qe-raw", run_id).into_bytes();
    {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        w.write_record(RAW_COLUMNS).map_err(|e| IoError::format(path, e))?;
        for r in rows {
            w.serialize(r).map_err(|e| IoError::format(path, e))?;
        }
        w.flush().map_err(|e| IoError::io(path, e))?;
    }
    atomic_write(path, &buf)
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<RawSampleRow>, IoError> {
    read_rows(path, &RAW_COLUMNS)
}

/// A point recomputed from its logged samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzedPoint {
    pub point_index: usize,
    pub wavelength_nm: f64,
    pub ix: usize,
    pub iz: usize,
    pub filter_slot: u8,
    pub qe: QeValue,
    pub p_dut_mean_w: f64,
    pub i_mean_a: f64,
}

/// Recomputes every point's QE from its raw samples with the same arithmetic
/// the engine uses. Points come out in order of first appearance.
pub fn analyze_raw(rows: &[RawSampleRow]) -> Result<Vec<AnalyzedPoint>, crate::model::ModelError> {
    let mut order: Vec<usize> = Vec::new();
    let mut groups: std::collections::HashMap<usize, Vec<&RawSampleRow>> = Default::default();
    for r in rows {
        let g = groups.entry(r.point_index).or_default();
        if g.is_empty() {
            order.push(r.point_index);
        }
        g.push(r);
    }
    order
        .into_iter()
        .map(|index| {
            let mut g = groups.remove(&index).unwrap_or_default();
            g.sort_by_key(|r| r.sample);
            let first = g[0];
            let split = SplitEntry {
                nm: first.wavelength_nm,
                k: first.k,
                method: SplitMethod::Single,
                uncertainty_rel: 0.0,
                monitor_gain: first.monitor_gain,
            };
            let samples = g
                .iter()
                .map(|r| {
                    Ok(Sample {
                        t_power: r.t_power_s,
                        t_current: r.t_current_s,
                        p_monitor_w: r.p_monitor_w,
                        i_a: r.i_a,
                        qe: sample_qe(r.p_monitor_w, &split, r.i_a, r.dark_a, r.wavelength_nm)?,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let m = PointMeasurement {
                nm: first.wavelength_nm,
                filter_slot: first.filter_slot,
                split,
                dark_a: first.dark_a,
                samples,
                retries: 0,
            };
            Ok(AnalyzedPoint {
                point_index: index,
                wavelength_nm: m.nm,
                ix: first.ix,
                iz: first.iz,
                filter_slot: m.filter_slot,
                qe: assemble_qe(&m.qe_samples(), first.systematic_rel)?,
                p_dut_mean_w: m.p_dut_mean(),
                i_mean_a: m.i_mean(),
            })
        })
        .collect()
}

pub const ANALYSIS_FILE: &str = "analysis.csv";

pub const ANALYSIS_COLUMNS: [&str; 12] = [
    "point_index",
    "wavelength_nm",
    "ix",
    "iz",
    "qe",
    "qe_repeatability_rel",
    "qe_systematic_rel",
    "qe_total_rel",
    "p_dut_w",
    "i_a",
    "filter_slot",
    "n_samples",
];

pub fn render_analysis_csv(points: &[AnalyzedPoint], run_id: &str) -> String {
    let mut out = comment_header("qe-analysis", run_id);
    out.push_str(&ANALYSIS_COLUMNS.join(","));
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.point_index,
            num(p.wavelength_nm),
            p.ix,
            p.iz,
            num(p.qe.mean),
            num(p.qe.repeatability_rel),
            num(p.qe.systematic_rel),
            num(p.qe.total_rel()),
            num(p.p_dut_mean_w),
            num(p.i_mean_a),
            p.filter_slot,
            p.qe.n_samples
        );
    }
    out
}
