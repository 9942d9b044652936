use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::MapRecord;
use crate::scan::{snake_path, ScanGrid};

use super::tables::{num, read_rows};
use super::{atomic_write, comment_header, IoError};

pub const MAP_FILE: &str = "map.csv";
pub const MATRIX_FILE: &str = "map_matrix.txt";
pub const HEATMAP_FILE: &str = "map.pgm";

const MAP_COLUMNS: [&str; 8] = ["index", "ix", "iz", "x_um", "z_um", "qe", "rep_rel", "sys_rel"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub index: usize,
    pub ix: usize,
    pub iz: usize,
    pub x_um: f64,
    pub z_um: f64,
    pub qe: f64,
    pub rep_rel: f64,
    pub sys_rel: f64,
}

fn check(grid: &ScanGrid, records: &[MapRecord]) -> Result<(), IoError> {
    let path = snake_path(grid).map_err(|e| IoError::Consistency(e.to_string()))?;
    let mut seen = vec![false; path.len()];
    for r in records {
        let p = r.point;
        let expected = path
            .get(p.index)
            .ok_or_else(|| IoError::Consistency(format!("index {} beyond path of {}", p.index, path.len())))?;
        if *expected != p {
            return Err(IoError::Consistency(format!(
                "record {} at ({}, {}) does not sit on the grid point ({}, {})",
                p.index, p.ix, p.iz, expected.ix, expected.iz
            )));
        }
        if std::mem::replace(&mut seen[p.index], true) {
            return Err(IoError::Consistency(format!("duplicate record for index {}", p.index)));
        }
    }
    Ok(())
}

/// Grey levels for QE values: absent cells are 0, the rest map linearly
/// from the smallest value (1) to the largest (255).
pub fn heatmap_levels(cells: &[Option<f64>]) -> Vec<u8> {
    let present = cells.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = present.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    cells
        .iter()
        .map(|c| match c {
            Some(v) if v.is_finite() => {
                if hi > lo {
                    1 + (254.0 * (v - lo) / (hi - lo)).round() as u8
                } else {
                    255
                }
            }
            _ => 0,
        })
        .collect()
}

/// Writes the long-form map CSV, the dense matrix and a greyscale heatmap.
/// Matrix and image rows run from iz = 0 upward.
pub fn write_map(dir: &Path, grid: &ScanGrid, records: &[MapRecord], run_id: &str, heatmap: bool) -> Result<(), IoError> {
    check(grid, records)?;
    let mut sorted: Vec<&MapRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.point.index);

    let mut csv = comment_header("qe-map", run_id);
    csv.push_str(&MAP_COLUMNS.join(","));
    csv.push('\n');
    for r in &sorted {
        let p = r.point;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            p.index,
            p.ix,
            p.iz,
            num(p.x_um),
            num(p.z_um),
            num(r.qe.mean),
            num(r.qe.repeatability_rel),
            num(r.qe.systematic_rel)
        );
    }

    let mut cells = vec![None; grid.nx * grid.nz];
    for r in &sorted {
        cells[r.point.iz * grid.nx + r.point.ix] = Some(r.qe.mean);
    }
    let mut matrix = comment_header("qe-map-matrix", run_id);
    let _ = writeln!(matrix, "# {} rows (iz) x {} columns (ix), NA = no record", grid.nz, grid.nx);
    for row in cells.chunks(grid.nx) {
        let line: Vec<String> = row
            .iter()
            .map(|c| c.map(num).unwrap_or_else(|| "NA".into()))
            .collect();
        matrix.push_str(&line.join(" "));
        matrix.push('\n');
    }

    atomic_write(&dir.join(MAP_FILE), csv.as_bytes())?;
    atomic_write(&dir.join(MATRIX_FILE), matrix.as_bytes())?;
    if heatmap {
        let mut pgm = format!("P2\n# run_id={run_id}\n{} {}\n255\n", grid.nx, grid.nz);
        for row in heatmap_levels(&cells).chunks(grid.nx) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            pgm.push_str(&line.join(" "));
            pgm.push('\n');
        }
        atomic_write(&dir.join(HEATMAP_FILE), pgm.as_bytes())?;
    }
    Ok(())
}

pub fn read_map_csv(path: &Path) -> Result<Vec<MapRow>, IoError> {
    read_rows(path, &MAP_COLUMNS)
}
