use std::sync::Arc;

use qe_core::engine::{Engine, EngineError, RunConfig, SplitMethod, TranscriptEntry};
use qe_core::model::{ModelError, ELEMENTARY_CHARGE, PLANCK, SPEED_OF_LIGHT};
use qe_core::scan::ScanGrid;
use qe_core::simbench::{Bench, BenchConfig, CathodeMap, SharedBench};

const CENTER: [f64; 2] = [150_000.0, 150_000.0];

fn uniform_bench(config: BenchConfig) -> SharedBench {
    let map = Arc::new(CathodeMap::uniform(0.25, 40_000.0, 250.0));
    SharedBench::new(Bench::with_cathode(config, map).unwrap())
}

fn spectrum_config(wavelengths: Vec<f64>) -> RunConfig {
    RunConfig {
        wavelengths,
        fixed_position: Some(CENTER),
        ..Default::default()
    }
}

fn calibrated(bench: &SharedBench, config: RunConfig, method: SplitMethod) -> Engine {
    let mut engine = Engine::on_bench(bench, config.clone()).unwrap();
    let mut mount = bench.clone();
    engine
        .calibrate_splitter(&mut mount, &config.wavelengths, method)
        .unwrap();
    engine
}

#[test]
fn noiseless_uniform_map_recovers_qe() {
    let bench = uniform_bench(BenchConfig::noiseless());
    let mut engine = calibrated(&bench, spectrum_config(vec![410.0]), SplitMethod::Single);
    let run = engine.sweep_spectrum().unwrap();
    assert_eq!(run.records.len(), 1);
    let r = &run.records[0];
    assert_eq!(r.qe.n_samples, 10);
    assert!((r.qe.mean / 0.25 - 1.0).abs() < 1e-3, "{}", r.qe.mean);
    // dark-corrected current against the closed-form photocurrent for the measured DUT power
    let oracle = 0.25 * r.p_dut_mean_w * 410e-9 / (PLANCK * SPEED_OF_LIGHT) * ELEMENTARY_CHARGE;
    assert!((r.i_mean_a / oracle - 1.0).abs() < 1e-3);
    assert_eq!(r.filter_slot, 1);
    let sys = (0.0167f64.powi(2) + 0.004f64.powi(2)).sqrt();
    assert_eq!(r.qe.systematic_rel, sys);
}

#[test]
fn single_calibration_matches_splitter_ratio() {
    let mut cfg = BenchConfig::noiseless();
    cfg.splitter.ripple_amplitude = 0.0;
    let bench = uniform_bench(cfg);
    let engine = calibrated(&bench, spectrum_config(vec![410.0, 800.0]), SplitMethod::Single);
    // readings travel with finite significant digits
    for e in engine.table().unwrap().entries() {
        assert!((e.k / (0.52 / 0.48) - 1.0).abs() < 1e-5, "{} {}", e.nm, e.k);
        assert_eq!(e.monitor_gain, 1.0);
    }

    let mut cfg = BenchConfig::noiseless();
    cfg.splitter.ripple_amplitude = 0.0;
    cfg.splitter.transmitted = 0.5;
    let bench = uniform_bench(cfg);
    let engine = calibrated(&bench, spectrum_config(vec![500.0]), SplitMethod::Exchanged);
    assert!((engine.table().unwrap().entries()[0].k - 1.0).abs() < 1e-5);
}

#[test]
fn exchanged_calibration_cancels_head_pair() {
    let mut cfg = BenchConfig::noiseless();
    cfg.noise.head_gains = Some([1.02, 0.98]);
    let bench = uniform_bench(cfg);
    let truth = bench.lock().splitter().ratio(600.0);
    let single = calibrated(&bench, spectrum_config(vec![600.0]), SplitMethod::Single);
    let k_single = single.table().unwrap().entries()[0].k;
    assert!((k_single / truth - 0.98 / 1.02).abs() < 1e-5, "{k_single} {truth}");
    let exchanged = calibrated(&bench, spectrum_config(vec![600.0]), SplitMethod::Exchanged);
    let e = exchanged.table().unwrap().entries()[0];
    assert!((e.k / truth - 1.0).abs() < 5e-4);
    assert!((e.monitor_gain - (1.02f64 / 0.98).sqrt()).abs() < 1e-5);
}

#[test]
fn scattered_wavelengths_keep_their_order() {
    let bench = uniform_bench(BenchConfig::default());
    let mut engine = calibrated(&bench, spectrum_config(vec![700.0, 300.0, 500.0]), SplitMethod::Exchanged);
    let run = engine.sweep_spectrum().unwrap();
    let order: Vec<f64> = run.records.iter().map(|r| r.nm).collect();
    assert_eq!(order, [700.0, 300.0, 500.0]);
    assert!(run.failures.is_empty());
    assert_eq!(run.raw.len(), 30);
}

#[test]
fn missing_table_is_an_error() {
    let bench = uniform_bench(BenchConfig::noiseless());
    let mut engine = Engine::on_bench(&bench, spectrum_config(vec![410.0])).unwrap();
    assert!(matches!(engine.sweep_spectrum(), Err(EngineError::NoSplitterTable)));
}

#[test]
fn stuck_shutter_gives_zero_power() {
    let mut cfg = BenchConfig::default();
    let bench = uniform_bench(cfg.clone());
    let engine = calibrated(&bench, spectrum_config(vec![410.0]), SplitMethod::Single);
    let table = engine.table().unwrap().clone();
    cfg.faults.shutter_stuck_closed = true;
    let stuck = uniform_bench(cfg);
    let mut engine = Engine::on_bench(&stuck, spectrum_config(vec![410.0])).unwrap();
    engine.set_table(table);
    let run = engine.sweep_spectrum().unwrap();
    assert!(run.records.is_empty());
    assert_eq!(run.failures.len(), 1);
    assert!(run.failures[0].error.contains(&ModelError::ZeroPower.to_string()));
}

#[test]
fn dark_corrected_current_is_zero_mean_in_the_dark() {
    let bench = uniform_bench(BenchConfig::default());
    let mut engine = Engine::on_bench(&bench, spectrum_config(vec![410.0])).unwrap();
    engine.prepare().unwrap();
    let dark = engine.measure_dark().unwrap();
    engine.shutter(false).unwrap();
    let mut xs = Vec::new();
    for _ in 0..50 {
        let i = bench.lock().photocurrent_read().amperes();
        xs.push(i - dark);
    }
    let (m, sd) = qe_core::model::repeatability(&xs).unwrap();
    // the dark estimate itself carries noise of sd/sqrt(10)
    let bound = 3.0 * (sd * sd / 50.0 + sd * sd / 10.0).sqrt();
    assert!(m.abs() <= bound, "mean {m:e} bound {bound:e}");
}

#[test]
fn skew_violations_are_retried_and_logged() {
    let mut cfg = BenchConfig::noiseless();
    cfg.timing.jitter_s = 0.03;
    let bench = uniform_bench(cfg);
    let mut engine = calibrated(&bench, spectrum_config(vec![410.0, 420.0, 430.0, 440.0]), SplitMethod::Single);
    let run = engine.sweep_spectrum().unwrap();
    let pairs: Vec<&TranscriptEntry> = engine
        .transcript()
        .iter()
        .filter(|e| matches!(e, TranscriptEntry::Pair { .. }))
        .collect();
    let rejected = pairs
        .iter()
        .filter(|e| matches!(e, TranscriptEntry::Pair { accepted: false, .. }))
        .count();
    assert!(rejected > 0);
    for e in &pairs {
        if let TranscriptEntry::Pair { accepted: true, .. } = e {
            assert!(e.skew().unwrap() <= 0.010);
        } else {
            assert!(e.skew().unwrap() > 0.010);
        }
    }
    // every point either produced a record or failed with a skew error
    assert_eq!(run.records.len() + run.failures.len(), 4);
    for f in &run.failures {
        assert!(f.error.contains("skew"), "{}", f.error);
    }
}

#[test]
fn over_range_keeps_partial_samples() {
    let mut cfg = BenchConfig::noiseless();
    cfg.lamp.base_power_w = 2e-6;
    let bench = uniform_bench(cfg);
    let mut config = spectrum_config(vec![410.0]);
    config.picoammeter_range_a = 2e-9;
    let mut engine = calibrated(&bench, config, SplitMethod::Single);
    let run = engine.sweep_spectrum().unwrap();
    assert!(run.records.is_empty());
    let f = &run.failures[0];
    assert!(f.error.contains("over range"));
    assert!(f.partial.is_some());
}

#[test]
fn stage_fault_checkpoint_and_resume() {
    let mut cfg = BenchConfig::noiseless();
    cfg.faults.stage_fault_after_moves = Some(2 * 5);
    let bench = uniform_bench(cfg);
    let config = RunConfig {
        wavelengths: vec![410.0],
        grid: Some(ScanGrid::centered(CENTER[0], CENTER[1], 500.0, 3)),
        ..Default::default()
    };
    let mut engine = calibrated(&bench, config, SplitMethod::Single);
    let first = engine.scan_2d().unwrap();
    assert_eq!(first.records.len(), 5);
    assert_eq!(first.checkpoint, Some(5));
    assert_eq!(first.matrix().iter().flatten().filter(|c| c.is_none()).count(), 4);
    // clear the fault and continue
    let mut bench_cfg = bench.lock().config().clone();
    bench_cfg.faults.stage_fault_after_moves = None;
    let fresh = uniform_bench(bench_cfg);
    let mut engine2 = Engine::on_bench(&fresh, engine.config().clone()).unwrap();
    engine2.set_table(engine.table().unwrap().clone());
    let done = engine2.scan_2d_from(Some(first)).unwrap();
    assert!(done.is_complete());
    assert_eq!(done.records.len(), 9);
    assert!(done.matrix().iter().flatten().all(|c| c.is_some()));
}

#[test]
fn one_pixel_scan_is_one_point() {
    let bench = uniform_bench(BenchConfig::noiseless());
    let config = RunConfig {
        wavelengths: vec![410.0],
        grid: Some(ScanGrid::centered(CENTER[0], CENTER[1], 500.0, 1)),
        ..Default::default()
    };
    let mut engine = calibrated(&bench, config, SplitMethod::Single);
    let run = engine.scan_2d().unwrap();
    assert_eq!(run.records.len(), 1);
    assert!((run.records[0].qe.mean / 0.25 - 1.0).abs() < 1e-3);
}

#[test]
fn unsafe_order_is_refused() {
    let bench = uniform_bench(BenchConfig::noiseless());
    let mut config = spectrum_config(vec![850.0]);
    config.filter_cutons = [900.0, 950.0, 1000.0, 1050.0];
    let mut engine = Engine::on_bench(&bench, config).unwrap();
    let mut mount = bench.clone();
    let err = engine
        .calibrate_splitter(&mut mount, &[850.0], SplitMethod::Single)
        .unwrap_err();
    assert!(err.is_refusal());
}
