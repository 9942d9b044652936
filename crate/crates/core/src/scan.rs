//! Raster geometry: grids, the snake path and position-to-pixel mapping.
//!
//! X is the fast axis. Even rows run toward +x, odd rows back toward -x.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stage travel on each axis, µm.
pub const STAGE_TRAVEL_UM: (f64, f64) = (0.0, 300_000.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid point ({x}, {z}) µm lies outside the stage travel")]
    OutOfTravel { x: f64, z: f64 },
    #[error("position ({x}, {z}) µm is outside the grid")]
    OutOfGrid { x: f64, z: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub origin_x_um: f64,
    pub origin_z_um: f64,
    pub step_um: f64,
    pub nx: usize,
    pub nz: usize,
    /// Skip points farther than this from the grid centre.
    #[serde(default)]
    pub mask_radius_um: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub index: usize,
    pub ix: usize,
    pub iz: usize,
    pub x_um: f64,
    pub z_um: f64,
}

impl ScanGrid {
    /// A square grid of `n` x `n` points centred on (`cx`, `cz`).
    pub fn centered(cx: f64, cz: f64, step_um: f64, n: usize) -> Self {
        let half = (n.saturating_sub(1)) as f64 / 2.0 * step_um;
        ScanGrid {
            origin_x_um: cx - half,
            origin_z_um: cz - half,
            step_um,
            nx: n,
            nz: n,
            mask_radius_um: None,
        }
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        if !(self.step_um > 0.0 && self.step_um.is_finite()) {
            return Err(ScanError::InvalidGrid(format!("step {} must be positive", self.step_um)));
        }
        if self.nx == 0 || self.nz == 0 {
            return Err(ScanError::InvalidGrid(format!("{}x{} grid is empty", self.nx, self.nz)));
        }
        if let Some(r) = self.mask_radius_um {
            if !(r > 0.0) {
                return Err(ScanError::InvalidGrid(format!("mask radius {r} must be positive")));
            }
        }
        let (lo, hi) = STAGE_TRAVEL_UM;
        for (x, z) in [
            (self.origin_x_um, self.origin_z_um),
            (self.x_of(self.nx - 1), self.z_of(self.nz - 1)),
        ] {
            if !(x >= lo && x <= hi && z >= lo && z <= hi) {
                return Err(ScanError::OutOfTravel { x, z });
            }
        }
        Ok(())
    }

    pub fn x_of(&self, ix: usize) -> f64 {
        self.origin_x_um + ix as f64 * self.step_um
    }

    pub fn z_of(&self, iz: usize) -> f64 {
        self.origin_z_um + iz as f64 * self.step_um
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.origin_x_um + (self.nx - 1) as f64 * self.step_um / 2.0,
            self.origin_z_um + (self.nz - 1) as f64 * self.step_um / 2.0,
        )
    }

    pub fn is_masked(&self, ix: usize, iz: usize) -> bool {
        match self.mask_radius_um {
            None => false,
            Some(r) => {
                let (cx, cz) = self.center();
                (self.x_of(ix) - cx).hypot(self.z_of(iz) - cz) > r
            }
        }
    }
}

/// Every unmasked point in snake order.
pub fn snake_path(grid: &ScanGrid) -> Result<Vec<PathPoint>, ScanError> {
    grid.validate()?;
    let mut out = Vec::with_capacity(grid.nx * grid.nz);
    for iz in 0..grid.nz {
        let row: Box<dyn Iterator<Item = usize>> = if iz % 2 == 0 {
            Box::new(0..grid.nx)
        } else {
            Box::new((0..grid.nx).rev())
        };
        for ix in row {
            if grid.is_masked(ix, iz) {
                continue;
            }
            out.push(PathPoint {
                index: out.len(),
                ix,
                iz,
                x_um: grid.x_of(ix),
                z_um: grid.z_of(iz),
            });
        }
    }
    Ok(out)
}

/// Nearest grid indices for a stage position within half a step of the grid.
pub fn pixel_of(grid: &ScanGrid, x: f64, z: f64) -> Result<(usize, usize), ScanError> {
    grid.validate()?;
    let fx = (x - grid.origin_x_um) / grid.step_um;
    let fz = (z - grid.origin_z_um) / grid.step_um;
    let inside = |f: f64, n: usize| f >= -0.5 && f <= n as f64 - 0.5;
    if !(inside(fx, grid.nx) && inside(fz, grid.nz)) {
        return Err(ScanError::OutOfGrid { x, z });
    }
    let clamp = |f: f64, n: usize| (f.round().max(0.0) as usize).min(n - 1);
    Ok((clamp(fx, grid.nx), clamp(fz, grid.nz)))
}

/// Sum of straight-line moves along a path, µm.
pub fn path_length_um(path: &[PathPoint]) -> f64 {
    path.windows(2)
        .map(|w| (w[1].x_um - w[0].x_um).abs() + (w[1].z_um - w[0].z_um).abs())
        .sum()
}
