//! Browser front end: snake-path preview, spectrum sweeps with automatic or
//! forced order-sorting filter, and a 2D scan of a cathode with a planted cross.

use qe_core::engine::{Engine, RunConfig, SplitMethod};
use qe_core::scan::{snake_path, ScanGrid};
use qe_core::simbench::{Bench, BenchConfig, SharedBench, Structure};
use wasm_bindgen::prelude::*;

const CENTER: [f64; 2] = [150_000.0, 150_000.0];

/// Visit order of an nx x nz grid as flat (ix, iz) pairs. `mask_steps` > 0
/// drops pixels farther than that many steps from the grid centre.
pub fn snake_order(nx: usize, nz: usize, mask_steps: f64) -> Result<Vec<u32>, String> {
    let step = 500.0;
    let mut grid = ScanGrid {
        origin_x_um: CENTER[0] - step * (nx as f64 - 1.0) / 2.0,
        origin_z_um: CENTER[1] - step * (nz as f64 - 1.0) / 2.0,
        step_um: step,
        nx,
        nz,
        mask_radius_um: None,
    };
    if mask_steps > 0.0 {
        grid.mask_radius_um = Some(mask_steps * step);
    }
    let path = snake_path(&grid).map_err(|e| e.to_string())?;
    Ok(path.iter().flat_map(|p| [p.ix as u32, p.iz as u32]).collect())
}

fn quick_run(wavelengths: Vec<f64>) -> RunConfig {
    RunConfig {
        wavelengths,
        samples_per_point: 4,
        averaging_window_s: 0.4,
        ..Default::default()
    }
}

/// Spectrum at the cathode centre as flat (nm, measured QE, true QE) triples.
/// `forced_slot` < 0 lets the engine pick the order-sorting filter.
pub fn spectrum_curve(seed: u64, forced_slot: i32, step_nm: f64) -> Result<Vec<f64>, String> {
    if !(step_nm >= 1.0) {
        return Err("step must be at least 1 nm".into());
    }
    let n = ((1100.0 - 250.0) / step_nm).floor() as usize;
    let wavelengths: Vec<f64> = (0..=n).map(|i| 250.0 + i as f64 * step_nm).collect();
    let bench_config = BenchConfig {
        seed,
        ..Default::default()
    };
    let bench = SharedBench::new(Bench::new(bench_config).map_err(|e| e.to_string())?);
    let mut config = quick_run(wavelengths.clone());
    config.fixed_position = Some(CENTER);
    if forced_slot >= 0 {
        config.force_filter = Some(forced_slot as u8);
    }
    let mut engine = Engine::on_bench(&bench, config).map_err(|e| e.to_string())?;
    engine
        .calibrate_splitter(&mut bench.clone(), &wavelengths, SplitMethod::Exchanged)
        .map_err(|e| e.to_string())?;
    let run = engine.sweep_spectrum().map_err(|e| e.to_string())?;
    let b = bench.lock();
    Ok(run
        .records
        .iter()
        .flat_map(|r| [r.nm, r.qe.mean, b.true_qe(r.nm)])
        .collect())
}

/// QE map (row-major, iz outer) of an n x n scan at 410 nm and 500 µm step over a
/// cathode with a 1.5 mm wide cross at half response. Missing pixels are NaN.
pub fn cross_map(seed: u64, n: usize, noisy: bool) -> Result<Vec<f64>, String> {
    let mut bench_config = if noisy { BenchConfig::default() } else { BenchConfig::noiseless() };
    bench_config.seed = seed;
    bench_config.cathode.structures = vec![Structure::Cross {
        x_um: 0.0,
        z_um: 0.0,
        half_width_um: 750.0,
        multiplier: 0.5,
    }];
    let bench = SharedBench::new(Bench::new(bench_config).map_err(|e| e.to_string())?);
    let mut config = quick_run(vec![410.0]);
    config.grid = Some(ScanGrid::centered(CENTER[0], CENTER[1], 500.0, n));
    let mut engine = Engine::on_bench(&bench, config).map_err(|e| e.to_string())?;
    engine
        .calibrate_splitter(&mut bench.clone(), &[410.0], SplitMethod::Exchanged)
        .map_err(|e| e.to_string())?;
    let run = engine.scan_2d().map_err(|e| e.to_string())?;
    Ok(run.matrix().into_iter().flatten().map(|c| c.unwrap_or(f64::NAN)).collect())
}

#[wasm_bindgen]
pub fn snake(nx: u32, nz: u32, mask_steps: f64) -> Result<Vec<u32>, JsError> {
    snake_order(nx as usize, nz as usize, mask_steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn spectrum(seed: u32, forced_slot: i32, step_nm: f64) -> Result<Vec<f64>, JsError> {
    spectrum_curve(seed as u64, forced_slot, step_nm).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cross(seed: u32, n: u32, noisy: bool) -> Result<Vec<f64>, JsError> {
    cross_map(seed as u64, n as usize, noisy).map_err(|e| JsError::new(&e))
}
