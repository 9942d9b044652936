use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use qe_core::clock::WallClock;
use qe_core::engine::{ArmMounting, Engine, EngineError, Event, Instruments, SplitMethod};
use qe_core::io::{self, RunManifest, StationConfig, Summary};
use qe_core::protocol::InstrumentKind;
use qe_core::simbench::{self, Bench, Mount, SharedBench};

use crate::args::{Common, Measure};
use crate::failure::Failure;

/// Where the instruments live.
enum Station {
    Virtual(SharedBench),
    Live,
}

struct Session {
    engine: Engine,
    station: Station,
    config: StationConfig,
    seed: Option<u64>,
    started_at_s: f64,
}

pub fn parse_endpoints(s: &str) -> Result<BTreeMap<InstrumentKind, String>, Failure> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (kind, addr) = part
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("endpoint {part:?} is not kind=host:port")))?;
        let kind: InstrumentKind = kind.trim().parse().map_err(|e| Failure::Usage(format!("{e}")))?;
        out.insert(kind, addr.trim().to_string());
    }
    if out.is_empty() {
        return Err(Failure::Usage("empty endpoint list".into()));
    }
    Ok(out)
}

fn load_config(common: &Common) -> Result<StationConfig, Failure> {
    let mut config = io::load_station_config(&common.config).map_err(|e| match e {
        io::IoError::Io { .. } => Failure::Usage(e.to_string()),
        e => e.into(),
    })?;
    let base = common.config.parent().unwrap_or(Path::new("."));
    if let Some(t) = &config.run.splitter_table {
        if t.is_relative() {
            config.run.splitter_table = Some(base.join(t));
        }
    }
    if let Some(bench) = &mut config.bench {
        if let Some(seed) = common.seed {
            bench.seed = seed;
        }
        if let Some(m) = &bench.cathode.map_file {
            if m.is_relative() {
                bench.cathode.map_file = Some(base.join(m));
            }
        }
    }
    if let Some(e) = &common.endpoints {
        config.run.endpoints = parse_endpoints(e)?;
    }
    Ok(config)
}

fn apply_measure(config: &mut StationConfig, measure: &Measure) {
    if let Some(slot) = measure.force_filter {
        config.run.force_filter = Some(slot);
    }
    if let Some(n) = measure.dark_every {
        config.run.dark_every = n;
    }
    if let Some(t) = &measure.splitter_table {
        config.run.splitter_table = Some(t.clone());
    }
}

fn open(common: &Common, mut config: StationConfig) -> Result<Session, Failure> {
    let live = common.endpoints.is_some() || (config.bench.is_none() && !config.run.endpoints.is_empty());
    let (engine, station, seed, started_at_s) = if live {
        let timeout = Duration::from_secs_f64(config.run.io_timeout_s);
        let instr = Instruments::connect(&config.run.endpoints, timeout)?;
        let scale = config.bench.as_ref().map_or(1.0, |b| b.time_scale);
        let engine = Engine::new(instr, Box::new(WallClock::new(scale)), config.run.clone())?;
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
        (engine, Station::Live, None, now)
    } else {
        let mut bench_config = config.bench.clone().unwrap_or_default();
        if let Some(seed) = common.seed {
            bench_config.seed = seed;
        }
        config.bench = Some(bench_config.clone());
        let bench = SharedBench::new(Bench::new(bench_config.clone())?);
        let engine = Engine::on_bench(&bench, config.run.clone())?;
        let t0 = engine.now();
        (engine, Station::Virtual(bench), Some(bench_config.seed), t0)
    };
    let mut session = Session {
        engine,
        station,
        config,
        seed,
        started_at_s,
    };
    if common.verbose {
        let (tx, rx) = mpsc::channel();
        session.engine.set_events(tx);
        std::thread::spawn(move || {
            for e in rx {
                eprintln!("{}", describe(&e));
            }
        });
    }
    Ok(session)
}

fn describe(e: &Event) -> String {
    match e {
        Event::Dark { mean_a } => format!("dark {mean_a:e} A"),
        Event::Point { index, total, nm, qe } => format!("point {}/{total} {nm} nm qe={qe:.5}", index + 1),
        Event::PointFailed { index, nm, error } => format!("point {} {nm} nm failed: {error}", index + 1),
        Event::SkewRetry { index, nm, skew_s } => format!("point {} {nm} nm skew {:.1} ms, retrying", index + 1, skew_s * 1e3),
    }
}

fn prepare_out(out: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))
}

impl Session {
    fn manifest(&mut self, command: &str) -> Result<RunManifest, Failure> {
        let mut m = RunManifest::new(command, self.started_at_s, self.seed, self.config.clone());
        for (kind, idn) in self.engine.identify()? {
            m.instruments.insert(kind.name().to_string(), idn);
        }
        Ok(m)
    }

    fn load_table(&mut self, manifest: &mut RunManifest) -> Result<(), Failure> {
        let path = self.config.run.splitter_table.clone().ok_or_else(|| {
            Failure::Usage("no splitter table: run calibrate-splitter and set run.splitter_table or --splitter-table".into())
        })?;
        let table = io::read_splitter_csv(&path)?;
        manifest.calibration_table = Some(path.display().to_string());
        self.engine.set_table(table);
        Ok(())
    }

    /// Refuses before any light reaches the cathode if a wavelength has no safe filter.
    fn check_filters(&self) -> Result<(), Failure> {
        for &nm in &self.config.run.wavelengths {
            self.engine.filter_for(nm)?;
        }
        Ok(())
    }
}

/// Asks an operator to swap the heads on a live station.
struct Operator;

impl ArmMounting for Operator {
    fn mount(&mut self, layout: Mount) -> Result<(), EngineError> {
        let what = match layout {
            Mount::Pmt => "remove the reference heads and mount the PMT",
            Mount::HeadsNormal => "mount head 1 on the monitor arm and head 2 on the DUT arm",
            Mount::HeadsSwapped => "mount head 2 on the monitor arm and head 1 on the DUT arm",
        };
        eprint!("{what}, then press Enter: ");
        let _ = std::io::stderr().flush();
        let mut line = String::new();
        match std::io::stdin().lock().read_line(&mut line) {
            Ok(n) if n > 0 => Ok(()),
            _ => Err(EngineError::Calibration("operator did not confirm the head mounting".into())),
        }
    }
}

pub fn simulate(common: &Common, duration: Option<f64>) -> Result<(), Failure> {
    let config = load_config(common)?;
    let mut bench_config = config.bench.unwrap_or_default();
    if let Some(seed) = common.seed {
        bench_config.seed = seed;
    }
    let endpoints = match &common.endpoints {
        Some(e) => parse_endpoints(e)?,
        None => bench_config.endpoints.clone(),
    };
    let scale = bench_config.time_scale;
    let bench = SharedBench::new(Bench::new(bench_config)?);
    let server = simbench::serve(bench, &endpoints, scale)?;
    let mut stdout = std::io::stdout();
    for (kind, addr) in server.addrs() {
        let _ = writeln!(stdout, "{kind} {addr}");
    }
    let _ = stdout.flush();
    match duration {
        Some(s) => {
            std::thread::sleep(Duration::from_secs_f64(s.max(0.0)));
            drop(server);
        }
        None => server.wait(),
    }
    Ok(())
}

pub fn calibrate(common: &Common, out: &Path, method: Option<SplitMethod>) -> Result<(), Failure> {
    let config = load_config(common)?;
    prepare_out(out)?;
    let mut s = open(common, config)?;
    let method = method.unwrap_or(s.config.calibration.method);
    let wavelengths = s.config.calibration_wavelengths().to_vec();
    let manifest = s.manifest("calibrate-splitter")?;
    let result = match &s.station {
        Station::Virtual(bench) => s.engine.calibrate_splitter(&mut bench.clone(), &wavelengths, method),
        Station::Live => s.engine.calibrate_splitter(&mut Operator, &wavelengths, method),
    };
    io::write_transcript(&out.join(io::TRANSCRIPT_FILE), s.engine.transcript(), &manifest.run_id)?;
    let table = result?;
    io::write_splitter_csv(&out.join(io::SPLITTER_FILE), &table, &manifest.run_id)?;
    manifest.write(out)?;
    Ok(())
}

pub fn spectrum(common: &Common, out: &Path, measure: &Measure) -> Result<(), Failure> {
    let mut config = load_config(common)?;
    apply_measure(&mut config, measure);
    if config.run.fixed_position.is_none() {
        return Err(Failure::Usage("spectrum needs run.fixed_position".into()));
    }
    config.run.grid = None;
    config.run.validate().map_err(Failure::Usage)?;
    prepare_out(out)?;
    let mut s = open(common, config)?;
    s.check_filters()?;
    let mut manifest = s.manifest("spectrum")?;
    s.load_table(&mut manifest)?;
    let run = s.engine.sweep_spectrum()?;
    let id = manifest.run_id.clone();
    manifest.write(out)?;
    if !run.records.is_empty() {
        io::write_spectrum_csv(&out.join(io::SPECTRUM_FILE), &run.records, &id)?;
    }
    io::write_raw_csv(&out.join(io::RAW_FILE), &run.raw, &id)?;
    io::write_transcript(&out.join(io::TRANSCRIPT_FILE), s.engine.transcript(), &id)?;
    let qe: Vec<_> = run.records.iter().map(|r| r.qe).collect();
    let extrapolated = run.records.iter().filter(|r| r.band_extrapolated).map(|r| r.nm).collect();
    let run_cfg = &s.config.run;
    let summary = Summary::build(
        &id,
        "spectrum",
        run_cfg.wavelengths.len(),
        &qe,
        &run.failures,
        None,
        run.aborted.clone(),
        extrapolated,
        &run_cfg.bands,
        run_cfg.picoammeter_accuracy_rel,
    )
    .map_err(|e| Failure::Measurement(e.to_string()))?;
    summary.write(out)?;
    finish(run.aborted, None, run.failures.len())
}

pub fn scan2d(common: &Common, out: &Path, measure: &Measure) -> Result<(), Failure> {
    let mut config = load_config(common)?;
    apply_measure(&mut config, measure);
    let grid = config
        .run
        .grid
        .clone()
        .ok_or_else(|| Failure::Usage("scan2d needs run.grid".into()))?;
    config.run.fixed_position = None;
    config.run.validate().map_err(Failure::Usage)?;
    if config.run.wavelengths.len() != 1 {
        return Err(Failure::Usage("scan2d takes exactly one wavelength".into()));
    }
    prepare_out(out)?;
    let mut s = open(common, config)?;
    s.check_filters()?;
    let mut manifest = s.manifest("scan2d")?;
    s.load_table(&mut manifest)?;
    let run = s.engine.scan_2d()?;
    let id = manifest.run_id.clone();
    manifest.write(out)?;
    io::write_map(out, &grid, &run.records, &id, true)?;
    io::write_raw_csv(&out.join(io::RAW_FILE), &run.raw, &id)?;
    io::write_transcript(&out.join(io::TRANSCRIPT_FILE), s.engine.transcript(), &id)?;
    let qe: Vec<_> = run.records.iter().map(|r| r.qe).collect();
    let run_cfg = &s.config.run;
    let summary = Summary::build(
        &id,
        "map",
        run.path.len(),
        &qe,
        &run.failures,
        run.checkpoint,
        run.aborted.clone(),
        Vec::new(),
        &run_cfg.bands,
        run_cfg.picoammeter_accuracy_rel,
    )
    .map_err(|e| Failure::Measurement(e.to_string()))?;
    summary.write(out)?;
    finish(run.aborted, run.checkpoint, run.failures.len())
}

fn finish(aborted: Option<String>, checkpoint: Option<usize>, failed: usize) -> Result<(), Failure> {
    if let Some(why) = aborted {
        return Err(Failure::Io(format!("run aborted, partial results written: {why}")));
    }
    if let Some(index) = checkpoint {
        return Err(Failure::Measurement(format!(
            "stage fault before point {index}, records so far written"
        )));
    }
    if failed > 0 {
        eprintln!("{failed} point(s) failed, see {}", io::SUMMARY_FILE);
    }
    Ok(())
}

/// Largest relative difference between two values, treating exact equality as zero.
fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn analyze(run_dir: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let rows = io::read_raw_csv(&run_dir.join(io::RAW_FILE))?;
    let points = io::analyze_raw(&rows).map_err(|e| Failure::Measurement(e.to_string()))?;
    let run_id = RunManifest::read(run_dir).map_or_else(|_| "unknown".to_string(), |m| m.run_id);
    let out = out.unwrap_or(run_dir);
    prepare_out(out)?;
    io::atomic_write(&out.join(io::ANALYSIS_FILE), io::render_analysis_csv(&points, &run_id).as_bytes())?;

    let mut worst: Option<f64> = None;
    let spectrum = run_dir.join(io::SPECTRUM_FILE);
    let map = run_dir.join(io::MAP_FILE);
    if spectrum.exists() {
        let rows = io::read_spectrum_csv(&spectrum)?;
        if rows.len() != points.len() {
            return Err(Failure::Measurement(format!(
                "{} spectrum rows but {} points in the raw log",
                rows.len(),
                points.len()
            )));
        }
        let d = rows.iter().zip(&points).fold(0.0f64, |acc, (r, p)| {
            acc.max(rel_diff(r.qe, p.qe.mean))
                .max(rel_diff(r.qe_repeatability_rel, p.qe.repeatability_rel))
        });
        worst = Some(d);
    } else if map.exists() {
        let rows = io::read_map_csv(&map)?;
        let by_index: BTreeMap<usize, _> = points.iter().map(|p| (p.point_index, p)).collect();
        let mut d = 0.0f64;
        for r in &rows {
            let p = by_index
                .get(&r.index)
                .ok_or_else(|| Failure::Measurement(format!("map point {} has no raw samples", r.index)))?;
            d = d.max(rel_diff(r.qe, p.qe.mean)).max(rel_diff(r.rep_rel, p.qe.repeatability_rel));
        }
        worst = Some(d);
    }
    println!("{} points recomputed into {}", points.len(), out.join(io::ANALYSIS_FILE).display());
    if let Some(d) = worst {
        println!("max relative deviation from recorded results: {d:e}");
        if d > 1e-12 {
            return Err(Failure::Measurement(format!("recomputed QE differs from the record by {d:e}")));
        }
    }
    Ok(())
}

pub fn compare(spectra: &[PathBuf], out: &Path) -> Result<(), Failure> {
    let mut inputs = Vec::with_capacity(spectra.len());
    for p in spectra {
        inputs.push((p.display().to_string(), io::read_spectrum_csv(p)?));
    }
    prepare_out(out)?;
    let path = out.join(io::COMPARE_FILE);
    io::atomic_write(&path, io::compare_spectra(&inputs).as_bytes())?;
    println!("{}", path.display());
    Ok(())
}
