use std::collections::BTreeMap;
use std::sync::mpsc::Sender;
use std::time::Duration;

use crate::clock::Clock;
use crate::model::{repeatability, ModelError, Wavelength};
use crate::protocol::{
    parse_scientific, CommandFrame, InstrumentKind, ResponseFrame, Session, SessionError, TcpTransport,
    ERR_DEVICE_FAULT, ERR_OVER_RANGE,
};
use crate::scan::{snake_path, PathPoint, ScanGrid};
use crate::simbench::{Mount, SharedBench};

use super::config::RunConfig;
use super::filter::select_filter;
use super::records::{
    assemble_qe, sample_qe, systematic_rel, Event, MapRecord, PointFailure, PointMeasurement, RawSampleRow, Sample,
    SpectrumRecord, TranscriptEntry,
};
use super::split::{exchange_combine, SplitEntry, SplitMethod, SplitRatioTable};
use super::EngineError;

/// Sessions to the four instruments.
pub struct Instruments {
    pub picoammeter: Session,
    pub monochromator: Session,
    pub powermeter: Session,
    pub stage: Session,
}

impl Instruments {
    /// In-process links to a virtual bench.
    pub fn local(bench: &SharedBench) -> Self {
        let s = |k| Session::new(k, Box::new(bench.link(k)));
        Instruments {
            picoammeter: s(InstrumentKind::Picoammeter),
            monochromator: s(InstrumentKind::Monochromator),
            powermeter: s(InstrumentKind::Powermeter),
            stage: s(InstrumentKind::Stage),
        }
    }

    pub fn connect(endpoints: &BTreeMap<InstrumentKind, String>, timeout: Duration) -> Result<Self, EngineError> {
        let s = |k: InstrumentKind| -> Result<Session, EngineError> {
            let addr = endpoints
                .get(&k)
                .ok_or_else(|| EngineError::Config(format!("no endpoint for {k}")))?;
            let t = TcpTransport::connect(addr, timeout).map_err(SessionError::Io)?;
            Ok(Session::new(k, Box::new(t)))
        };
        Ok(Instruments {
            picoammeter: s(InstrumentKind::Picoammeter)?,
            monochromator: s(InstrumentKind::Monochromator)?,
            powermeter: s(InstrumentKind::Powermeter)?,
            stage: s(InstrumentKind::Stage)?,
        })
    }
}

/// Changes which detectors sit on the splitter outputs. On real hardware this
/// is an operator step.
pub trait ArmMounting {
    fn mount(&mut self, layout: Mount) -> Result<(), EngineError>;
}

impl ArmMounting for SharedBench {
    fn mount(&mut self, layout: Mount) -> Result<(), EngineError> {
        self.lock().set_mount(layout);
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SpectrumRun {
    pub records: Vec<SpectrumRecord>,
    pub failures: Vec<PointFailure>,
    pub raw: Vec<RawSampleRow>,
    /// Set when the link to an instrument was lost and the sweep stopped.
    pub aborted: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ScanRun {
    pub grid: ScanGrid,
    pub path: Vec<PathPoint>,
    pub nm: f64,
    pub records: Vec<MapRecord>,
    pub failures: Vec<PointFailure>,
    pub raw: Vec<RawSampleRow>,
    /// Path index to resume from after a stage fault.
    pub checkpoint: Option<usize>,
    pub aborted: Option<String>,
}

impl ScanRun {
    /// Dense nz x nx matrix of QE means; cells without a record are `None`.
    pub fn matrix(&self) -> Vec<Vec<Option<f64>>> {
        let mut m = vec![vec![None; self.grid.nx]; self.grid.nz];
        for r in &self.records {
            m[r.point.iz][r.point.ix] = Some(r.qe.mean);
        }
        m
    }

    pub fn is_complete(&self) -> bool {
        self.checkpoint.is_none() && self.aborted.is_none()
    }
}

struct PairRead {
    t_power: f64,
    p_monitor_w: f64,
    t_current: f64,
    current: Result<f64, (u16, String)>,
}

pub struct Engine {
    instr: Instruments,
    clock: Box<dyn Clock>,
    config: RunConfig,
    table: Option<SplitRatioTable>,
    events: Option<Sender<Event>>,
    transcript: Vec<TranscriptEntry>,
    dark: Option<f64>,
    filter_slot: Option<u8>,
    wavelength: Option<f64>,
}

impl Engine {
    pub fn new(instr: Instruments, clock: Box<dyn Clock>, config: RunConfig) -> Result<Self, EngineError> {
        config.validate_common().map_err(EngineError::Config)?;
        Ok(Engine {
            instr,
            clock,
            config,
            table: None,
            events: None,
            transcript: Vec::new(),
            dark: None,
            filter_slot: None,
            wavelength: None,
        })
    }

    /// Engine wired to an in-process bench through its virtual clock.
    pub fn on_bench(bench: &SharedBench, config: RunConfig) -> Result<Self, EngineError> {
        Self::new(Instruments::local(bench), Box::new(bench.clock()), config)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn set_table(&mut self, table: SplitRatioTable) {
        self.table = Some(table);
    }

    pub fn table(&self) -> Option<&SplitRatioTable> {
        self.table.as_ref()
    }

    pub fn set_events(&mut self, tx: Sender<Event>) {
        self.events = Some(tx);
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    fn emit(&self, e: Event) {
        if let Some(tx) = &self.events {
            let _ = tx.send(e);
        }
    }

    fn note(&mut self, text: String) {
        let t = self.clock.now();
        self.transcript.push(TranscriptEntry::Note { t, text });
    }

    /// `*IDN?` answers, keyed by instrument. Only instruments with an
    /// identification query appear.
    pub fn identify(&mut self) -> Result<BTreeMap<InstrumentKind, String>, EngineError> {
        let r = self.instr.picoammeter.query(&CommandFrame::query("*IDN", &[]))?;
        let idn = match r {
            ResponseFrame::Ok(v) => v.join(","),
            ResponseFrame::Err { code, message } => {
                return Err(SessionError::Instrument {
                    kind: InstrumentKind::Picoammeter,
                    code,
                    message,
                }
                .into())
            }
        };
        Ok([(InstrumentKind::Picoammeter, idn)].into_iter().collect())
    }

    /// Puts lamp and picoammeter in the configured state.
    pub fn prepare(&mut self) -> Result<(), EngineError> {
        let c = &self.config;
        let setpoint = format!("{}", c.lamp_setpoint);
        let range = format!("{:e}", c.picoammeter_range_a);
        let fbk = if c.lamp_feedback { "ON" } else { "OFF" };
        self.instr.picoammeter.command(&CommandFrame::set("ZCH", &["OFF"]))?;
        self.instr.picoammeter.command(&CommandFrame::set("RANG", &[&range]))?;
        self.instr.monochromator.command(&CommandFrame::set("LAMP", &[&setpoint]))?;
        self.instr.monochromator.command(&CommandFrame::set("FBK", &[fbk]))?;
        Ok(())
    }

    pub fn shutter(&mut self, open: bool) -> Result<(), EngineError> {
        let arg = if open { "O" } else { "C" };
        self.instr.monochromator.command(&CommandFrame::set("SHUT", &[arg]))?;
        Ok(())
    }

    /// Slot the run will use at `nm`: the forced one, or the order-sorting choice.
    pub fn filter_for(&self, nm: f64) -> Result<u8, EngineError> {
        match self.config.force_filter {
            Some(slot) => Ok(slot),
            None => Ok(select_filter(Wavelength::engine(nm)?, &self.filter_cutons())?),
        }
    }

    fn filter_cutons(&self) -> [f64; 4] {
        self.config.filter_cutons
    }

    /// Filter, grating and power-meter wavelength for `nm`, with settling.
    pub fn tune(&mut self, nm: f64, slot: u8) -> Result<(), EngineError> {
        if self.filter_slot != Some(slot) {
            let s = slot.to_string();
            self.instr.monochromator.command(&CommandFrame::set("FILT", &[&s]))?;
            self.filter_slot = Some(slot);
            self.clock.sleep(self.config.settle.filter_s);
        }
        if self.wavelength != Some(nm) {
            let w = format!("{nm}");
            self.instr.monochromator.command(&CommandFrame::set("GWAVE", &[&w]))?;
            self.instr.powermeter.command(&CommandFrame::set("PM:LAMBDA", &[&w]))?;
            self.wavelength = Some(nm);
            self.clock.sleep(self.config.settle.wavelength_s);
        }
        Ok(())
    }

    fn sample_interval(&self) -> f64 {
        self.config.averaging_window_s / self.config.samples_per_point as f64
    }

    fn read_current(&mut self) -> Result<f64, EngineError> {
        let r = self.instr.picoammeter.query(&CommandFrame::query("READ", &[]))?;
        self.current_value(r).map_err(|(code, message)| {
            if code == ERR_OVER_RANGE {
                EngineError::OverRange {
                    nm: self.wavelength.unwrap_or(f64::NAN),
                    partial: None,
                }
            } else {
                SessionError::Instrument {
                    kind: InstrumentKind::Picoammeter,
                    code,
                    message,
                }
                .into()
            }
        })
    }

    fn current_value(&self, r: ResponseFrame) -> Result<f64, (u16, String)> {
        match r {
            ResponseFrame::Err { code, message } => Err((code, message)),
            ResponseFrame::Ok(v) => v
                .first()
                .and_then(|s| parse_scientific(s))
                .ok_or((0, format!("bad current payload {v:?}"))),
        }
    }

    fn scientific(&self, kind: InstrumentKind, r: ResponseFrame) -> Result<f64, EngineError> {
        match r {
            ResponseFrame::Err { code, message } => Err(SessionError::Instrument { kind, code, message }.into()),
            ResponseFrame::Ok(v) => v
                .first()
                .and_then(|s| parse_scientific(s))
                .ok_or_else(|| SessionError::Unexpected(kind, v.join(",")).into()),
        }
    }

    /// Dark current with the shutter closed; reopens the shutter afterwards.
    pub fn measure_dark(&mut self) -> Result<f64, EngineError> {
        self.shutter(false)?;
        self.clock.sleep(self.config.settle.stage_s);
        let mut xs = Vec::with_capacity(self.config.dark_samples);
        for i in 0..self.config.dark_samples {
            if i > 0 {
                self.clock.sleep(self.sample_interval());
            }
            xs.push(self.read_current()?);
        }
        self.shutter(true)?;
        let (mean_a, sd_a) = repeatability(&xs)?;
        let t = self.clock.now();
        self.transcript.push(TranscriptEntry::Dark { t, mean_a, sd_a });
        self.emit(Event::Dark { mean_a });
        self.dark = Some(mean_a);
        Ok(mean_a)
    }

    /// Dark-corrected current readings with the shutter left as it is.
    pub fn dark_level(&self) -> Option<f64> {
        self.dark
    }

    /// Issues the monitor-power and current reads back to back on their two
    /// endpoints, then collects both answers.
    fn paired_read(&mut self) -> Result<PairRead, EngineError> {
        self.instr.powermeter.send(&CommandFrame::query("PM:POW", &["1"]))?;
        self.instr.picoammeter.send(&CommandFrame::query("READ", &[]))?;
        let (pr, tp) = self.instr.powermeter.recv()?;
        let t_power = tp.unwrap_or_else(|| self.clock.now());
        let (ir, ti) = self.instr.picoammeter.recv()?;
        let t_current = ti.unwrap_or_else(|| self.clock.now());
        let p_monitor_w = self.scientific(InstrumentKind::Powermeter, pr)?;
        Ok(PairRead {
            t_power,
            p_monitor_w,
            t_current,
            current: self.current_value(ir),
        })
    }

    /// `samples_per_point` paired reads at the current wavelength and position.
    pub fn measure_point(&mut self, index: usize, nm: f64) -> Result<PointMeasurement, EngineError> {
        let split: SplitEntry = self.table.as_ref().ok_or(EngineError::NoSplitterTable)?.at(nm)?;
        let dark_a = match self.dark {
            Some(d) => d,
            None => self.measure_dark()?,
        };
        let slot = self.filter_slot.unwrap_or(0);
        let mut m = PointMeasurement {
            nm,
            filter_slot: slot,
            split,
            dark_a,
            samples: Vec::with_capacity(self.config.samples_per_point),
            retries: 0,
        };
        let limit = self.config.max_skew_s();
        for s in 0..self.config.samples_per_point {
            if s > 0 {
                self.clock.sleep(self.sample_interval());
            }
            let mut attempt = 0;
            let pair = loop {
                let pair = self.paired_read()?;
                let skew = (pair.t_power - pair.t_current).abs();
                let accepted = skew <= limit;
                self.transcript.push(TranscriptEntry::Pair {
                    point: index,
                    nm,
                    sample: s,
                    t_power: pair.t_power,
                    t_current: pair.t_current,
                    accepted,
                });
                if accepted {
                    break pair;
                }
                self.emit(Event::SkewRetry { index, nm, skew_s: skew });
                attempt += 1;
                m.retries += 1;
                if attempt > 1 {
                    return Err(EngineError::Skew {
                        nm,
                        skew_s: skew,
                        limit_s: limit,
                    });
                }
            };
            let i_a = match pair.current {
                Ok(i) => i,
                Err((code, _)) if code == ERR_OVER_RANGE => {
                    return Err(EngineError::OverRange {
                        nm,
                        partial: Some(Box::new(m)),
                    })
                }
                Err((code, message)) => {
                    return Err(SessionError::Instrument {
                        kind: InstrumentKind::Picoammeter,
                        code,
                        message,
                    }
                    .into())
                }
            };
            if !(pair.p_monitor_w >= self.config.min_monitor_power_w) {
                return Err(ModelError::ZeroPower.into());
            }
            let qe = sample_qe(pair.p_monitor_w, &m.split, i_a, dark_a, nm)?;
            m.samples.push(Sample {
                t_power: pair.t_power,
                t_current: pair.t_current,
                p_monitor_w: pair.p_monitor_w,
                i_a,
                qe,
            });
        }
        Ok(m)
    }

    /// Moves the stage and waits for it to stop and settle.
    pub fn move_to(&mut self, x_um: f64, z_um: f64) -> Result<(), EngineError> {
        let (x, z) = (format!("{x_um}"), format!("{z_um}"));
        let stage_cmd = |r: Result<(), SessionError>| match r {
            Err(SessionError::Instrument { code, message, .. }) if code == ERR_DEVICE_FAULT => {
                Err(EngineError::StageFault(message))
            }
            other => other.map_err(EngineError::from),
        };
        stage_cmd(self.instr.stage.command(&CommandFrame::set("MOVX", &[&x])))?;
        stage_cmd(self.instr.stage.command(&CommandFrame::set("MOVZ", &[&z])))?;
        let start = self.clock.now();
        loop {
            let v = self.instr.stage.value(&CommandFrame::query("MOVING", &[]))?;
            if v == "0" {
                break;
            }
            if self.clock.now() - start > self.config.stage_timeout_s {
                return Err(EngineError::StageTimeout);
            }
            self.clock.sleep(self.config.stage_poll_s);
        }
        self.clock.sleep(self.config.settle.stage_s);
        Ok(())
    }

    fn maybe_refresh_dark(&mut self, points_done: usize) -> Result<(), EngineError> {
        let every = self.config.dark_every;
        if self.dark.is_none() || (every > 0 && points_done > 0 && points_done % every == 0) {
            self.measure_dark()?;
        }
        Ok(())
    }

    fn systematic(&self, nm: f64) -> Result<(f64, bool), EngineError> {
        Ok(systematic_rel(
            &self.config.bands,
            self.config.uncovered_band_policy,
            self.config.picoammeter_accuracy_rel,
            nm,
        )?)
    }

    /// Measures every configured wavelength, in the given order, at the fixed position.
    pub fn sweep_spectrum(&mut self) -> Result<SpectrumRun, EngineError> {
        self.config.validate().map_err(EngineError::Config)?;
        let [x, z] = self
            .config
            .fixed_position
            .ok_or_else(|| EngineError::Config("sweep needs fixed_position".into()))?;
        if self.table.is_none() {
            return Err(EngineError::NoSplitterTable);
        }
        self.prepare()?;
        self.move_to(x, z)?;
        let wavelengths = self.config.wavelengths.clone();
        let total = wavelengths.len();
        let mut run = SpectrumRun::default();
        for (index, &nm) in wavelengths.iter().enumerate() {
            match self.spectrum_point(index, total, nm, &mut run) {
                Ok(()) => {}
                Err(e) if e.is_transport_loss() => {
                    run.aborted = Some(e.to_string());
                    break;
                }
                Err(e) => {
                    let error = e.to_string();
                    self.emit(Event::PointFailed {
                        index,
                        nm,
                        error: error.clone(),
                    });
                    self.note(format!("point {index} at {nm} nm failed: {error}"));
                    let partial = match e {
                        EngineError::OverRange { partial, .. } => partial.map(|b| *b),
                        _ => None,
                    };
                    run.failures.push(PointFailure {
                        index,
                        nm,
                        error: error.clone(),
                        partial,
                    });
                }
            }
        }
        Ok(run)
    }

    fn spectrum_point(&mut self, index: usize, total: usize, nm: f64, run: &mut SpectrumRun) -> Result<(), EngineError> {
        let (sys, borrowed) = self.systematic(nm)?;
        let slot = self.filter_for(nm)?;
        self.maybe_refresh_dark(index)?;
        self.tune(nm, slot)?;
        let m = self.measure_point(index, nm)?;
        let qe = assemble_qe(&m.qe_samples(), sys)?;
        self.emit(Event::Point {
            index,
            total,
            nm,
            qe: qe.mean,
        });
        run.raw.extend(RawSampleRow::from_point(index, (0, 0), &m, sys));
        run.records.push(SpectrumRecord {
            nm,
            qe,
            p_dut_mean_w: m.p_dut_mean(),
            i_mean_a: m.i_mean(),
            filter_slot: m.filter_slot,
            timestamp: self.clock.now(),
            band_extrapolated: borrowed,
        });
        Ok(())
    }

    /// Raster scan at a single wavelength along the snake path.
    pub fn scan_2d(&mut self) -> Result<ScanRun, EngineError> {
        self.scan_2d_from(None)
    }

    /// Continues a scan interrupted by a stage fault, keeping its records.
    pub fn scan_2d_from(&mut self, previous: Option<ScanRun>) -> Result<ScanRun, EngineError> {
        self.config.validate().map_err(EngineError::Config)?;
        let grid = self
            .config
            .grid
            .clone()
            .ok_or_else(|| EngineError::Config("scan needs a grid".into()))?;
        if self.config.wavelengths.len() != 1 {
            return Err(EngineError::Config(format!(
                "scan takes exactly one wavelength, got {}",
                self.config.wavelengths.len()
            )));
        }
        if self.table.is_none() {
            return Err(EngineError::NoSplitterTable);
        }
        let nm = self.config.wavelengths[0];
        let path = snake_path(&grid)?;
        let (sys, _) = self.systematic(nm)?;
        let slot = self.filter_for(nm)?;
        let mut run = match previous {
            Some(p) if p.grid == grid && p.nm == nm => ScanRun {
                checkpoint: None,
                aborted: None,
                ..p
            },
            Some(_) => return Err(EngineError::Config("checkpoint belongs to a different scan".into())),
            None => ScanRun {
                grid: grid.clone(),
                path: path.clone(),
                nm,
                records: Vec::new(),
                failures: Vec::new(),
                raw: Vec::new(),
                checkpoint: None,
                aborted: None,
            },
        };
        let done: std::collections::HashSet<usize> = run
            .records
            .iter()
            .map(|r| r.point.index)
            .chain(run.failures.iter().map(|f| f.index))
            .collect();
        self.prepare()?;
        self.tune(nm, slot)?;
        let total = path.len();
        let mut measured = 0;
        for p in path.iter().filter(|p| !done.contains(&p.index)) {
            let step = (|| -> Result<PointMeasurement, EngineError> {
                self.move_to(p.x_um, p.z_um)?;
                self.maybe_refresh_dark(measured)?;
                self.measure_point(p.index, nm)
            })();
            measured += 1;
            match step {
                Ok(m) => {
                    let qe = assemble_qe(&m.qe_samples(), sys)?;
                    self.emit(Event::Point {
                        index: p.index,
                        total,
                        nm,
                        qe: qe.mean,
                    });
                    run.raw.extend(RawSampleRow::from_point(p.index, (p.ix, p.iz), &m, sys));
                    run.records.push(MapRecord {
                        point: *p,
                        nm,
                        qe,
                        p_dut_mean_w: m.p_dut_mean(),
                        i_mean_a: m.i_mean(),
                        timestamp: self.clock.now(),
                    });
                }
                Err(EngineError::StageFault(msg)) => {
                    self.note(format!("stage fault before point {}: {msg}", p.index));
                    run.checkpoint = Some(p.index);
                    break;
                }
                Err(e) if e.is_transport_loss() => {
                    run.aborted = Some(e.to_string());
                    run.checkpoint = Some(p.index);
                    break;
                }
                Err(e) => {
                    let error = e.to_string();
                    self.emit(Event::PointFailed {
                        index: p.index,
                        nm,
                        error: error.clone(),
                    });
                    let partial = match e {
                        EngineError::OverRange { partial, .. } => partial.map(|b| *b),
                        _ => None,
                    };
                    run.failures.push(PointFailure {
                        index: p.index,
                        nm,
                        error: error.clone(),
                        partial,
                    });
                }
            }
        }
        run.records.sort_by_key(|r| r.point.index);
        run.raw.sort_by_key(|r| (r.point_index, r.sample));
        Ok(run)
    }

    /// Measures the DUT/monitor ratio with both reference heads mounted,
    /// once per wavelength and layout.
    pub fn calibrate_splitter(
        &mut self,
        mounting: &mut dyn ArmMounting,
        wavelengths: &[f64],
        method: SplitMethod,
    ) -> Result<SplitRatioTable, EngineError> {
        super::config::check_wavelengths(wavelengths).map_err(EngineError::Config)?;
        if wavelengths.is_empty() {
            return Err(EngineError::Config("no calibration wavelengths".into()));
        }
        self.prepare()?;
        self.shutter(true)?;
        let layouts: &[Mount] = match method {
            SplitMethod::Single => &[Mount::HeadsNormal],
            SplitMethod::Exchanged => &[Mount::HeadsNormal, Mount::HeadsSwapped],
        };
        // per layout, per wavelength: (ratio dut/monitor, relative sd of the mean)
        let mut ratios: Vec<Vec<(f64, f64)>> = Vec::new();
        for &layout in layouts {
            mounting.mount(layout)?;
            self.note(format!("heads mounted {layout:?}"));
            let (dut_ch, mon_ch) = match layout {
                Mount::HeadsSwapped => ("1", "2"),
                _ => ("2", "1"),
            };
            let mut per_layout = Vec::with_capacity(wavelengths.len());
            for &nm in wavelengths {
                let slot = select_filter(Wavelength::engine(nm)?, &self.filter_cutons())?;
                self.tune(nm, slot)?;
                let mut r = Vec::with_capacity(self.config.samples_per_point);
                let (mut sum_mon, mut sum_dut) = (0.0, 0.0);
                for s in 0..self.config.samples_per_point {
                    if s > 0 {
                        self.clock.sleep(self.sample_interval());
                    }
                    let q = |ch| CommandFrame::query("PM:POW", &[ch]);
                    let mon = self.instr.powermeter.query(&q(mon_ch))?;
                    let mon = self.scientific(InstrumentKind::Powermeter, mon)?;
                    let dut = self.instr.powermeter.query(&q(dut_ch))?;
                    let dut = self.scientific(InstrumentKind::Powermeter, dut)?;
                    if !(mon >= self.config.min_monitor_power_w) {
                        mounting.mount(Mount::Pmt)?;
                        return Err(EngineError::Calibration(format!("no monitor power at {nm} nm ({mon:e} W)")));
                    }
                    sum_mon += mon;
                    sum_dut += dut;
                    r.push(dut / mon);
                }
                let (mean_r, sd_r) = repeatability(&r)?;
                per_layout.push((sum_dut / sum_mon, sd_r / mean_r / (r.len() as f64).sqrt()));
            }
            ratios.push(per_layout);
        }
        mounting.mount(Mount::Pmt)?;
        self.note("heads removed, PMT mounted".into());
        let entries = wavelengths
            .iter()
            .enumerate()
            .map(|(i, &nm)| {
                let (rn, un) = ratios[0][i];
                match method {
                    SplitMethod::Single => SplitEntry {
                        nm,
                        k: rn,
                        method,
                        uncertainty_rel: un,
                        monitor_gain: 1.0,
                    },
                    SplitMethod::Exchanged => {
                        let (rs, us) = ratios[1][i];
                        let (k, monitor_gain) = exchange_combine(rn, rs);
                        SplitEntry {
                            nm,
                            k,
                            method,
                            uncertainty_rel: 0.5 * un.hypot(us),
                            monitor_gain,
                        }
                    }
                }
            })
            .collect();
        let table = SplitRatioTable::new(entries)?;
        self.table = Some(table.clone());
        Ok(table)
    }
}
