use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::{photon_rate, OpticalPower, Photocurrent, Wavelength, ELEMENTARY_CHARGE};
use crate::protocol::{
    format_fixed1, format_fixed3, format_scientific, validate, ArgValue, CommandFrame, InstrumentKind, ResponseFrame,
    ERR_DEVICE_FAULT, ERR_OVER_RANGE,
};

use super::cathode::CathodeMap;
use super::config::BenchConfig;
use super::lamp::LampModel;
use super::optics::{total_watts, Arm, Component, MonoModel, SplitterModel};
use super::stage::StageAxis;
use super::BenchError;

/// What sits on the two splitter outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mount {
    /// Measurement layout: head 1 on the monitor arm, the PMT on the DUT arm.
    Pmt,
    /// Calibration layout: head 1 on the monitor arm, head 2 on the DUT arm.
    HeadsNormal,
    /// Calibration layout with the heads exchanged.
    HeadsSwapped,
}

impl Mount {
    /// Arm that power-meter head `channel` (1 or 2) is on, if any.
    pub fn arm_of(self, channel: u8) -> Option<Arm> {
        match (self, channel) {
            (Mount::Pmt, 1) | (Mount::HeadsNormal, 1) | (Mount::HeadsSwapped, 2) => Some(Arm::Monitor),
            (Mount::HeadsNormal, 2) | (Mount::HeadsSwapped, 1) => Some(Arm::Dut),
            _ => None,
        }
    }
}

const STREAM_SYSTEMATIC: u64 = 1;
const STREAM_LAMP: u64 = 2;
const STREAM_STAGE: u64 = 3;
const STREAM_JITTER: u64 = 4;
const STREAM_READ_BASE: u64 = 10;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// The complete virtual bench. Time moves only through [`Bench::tick`].
#[derive(Debug, Clone)]
pub struct Bench {
    config: BenchConfig,
    now: f64,
    lamp: LampModel,
    mono: MonoModel,
    splitter: SplitterModel,
    cathode: Arc<CathodeMap>,
    stage: [StageAxis; 2],
    stage_moves: u32,
    mount: Mount,
    pm_lambda: f64,
    pico_range: f64,
    zero_check: bool,
    /// Frozen standard-normal draws per calibration band, per head.
    head_z: Vec<[f64; 2]>,
    pico_gain: f64,
    rng_lamp: ChaCha8Rng,
    rng_stage: ChaCha8Rng,
    rng_read: [ChaCha8Rng; 4],
    rng_jitter: ChaCha8Rng,
    transcript: Option<Vec<String>>,
}

impl Bench {
    pub fn new(config: BenchConfig) -> Result<Self, BenchError> {
        config.validate().map_err(BenchError::InvalidConfig)?;
        let cathode = Arc::new(CathodeMap::build(&config.cathode)?);
        Self::with_cathode(config, cathode)
    }

    /// Builds a bench around an already constructed ground-truth map.
    pub fn with_cathode(config: BenchConfig, cathode: Arc<CathodeMap>) -> Result<Self, BenchError> {
        config.validate().map_err(BenchError::InvalidConfig)?;
        crate::model::validate_bands(&config.noise.bands)?;
        cathode.validate()?;
        let seed = config.seed;
        let mut sys = stream(seed, STREAM_SYSTEMATIC);
        let head_z: Vec<[f64; 2]> = config
            .noise
            .bands
            .iter()
            .map(|_| [sys.sample(StandardNormal), sys.sample(StandardNormal)])
            .collect();
        let pico_z: f64 = sys.sample(StandardNormal);
        let acc = config.stage.accuracy_um;
        let offsets: [f64; 2] = [sys.random_range(-1.0..=1.0) * acc, sys.random_range(-1.0..=1.0) * acc];
        let pico_gain = match (config.noise.picoammeter_gain, config.noise.systematic) {
            (Some(g), _) => g,
            (None, true) => 1.0 + config.noise.picoammeter_systematic_rel * pico_z,
            (None, false) => 1.0,
        };
        let rng_read = std::array::from_fn(|i| stream(seed, STREAM_READ_BASE + i as u64));
        Ok(Bench {
            lamp: LampModel::new(config.lamp.clone()),
            mono: MonoModel::new(config.mono.clone()),
            splitter: SplitterModel {
                config: config.splitter.clone(),
            },
            cathode,
            stage: [StageAxis::new(offsets[0]), StageAxis::new(offsets[1])],
            stage_moves: 0,
            mount: Mount::Pmt,
            pm_lambda: 500.0,
            pico_range: 2e-8,
            zero_check: false,
            head_z,
            pico_gain,
            rng_lamp: stream(seed, STREAM_LAMP),
            rng_stage: stream(seed, STREAM_STAGE),
            rng_read,
            rng_jitter: stream(seed, STREAM_JITTER),
            transcript: None,
            now: 0.0,
            config,
        })
    }

    pub fn config(&self) -> &BenchConfig {
        &self.config
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn tick(&mut self, dt: f64) -> Result<(), BenchError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(BenchError::NonPositiveTick(dt));
        }
        self.lamp.advance(dt, &mut self.rng_lamp);
        self.now += dt;
        Ok(())
    }

    /// Ticks forward to `t`; a no-op if `t` is not in the future.
    pub fn advance_to(&mut self, t: f64) {
        if t > self.now {
            self.tick(t - self.now).expect("positive finite step");
        }
    }

    pub fn lamp(&self) -> &LampModel {
        &self.lamp
    }

    pub fn mono(&self) -> &MonoModel {
        &self.mono
    }

    pub fn splitter(&self) -> &SplitterModel {
        &self.splitter
    }

    pub fn cathode(&self) -> &Arc<CathodeMap> {
        &self.cathode
    }

    pub fn mount(&self) -> Mount {
        self.mount
    }

    /// Changes what is bolted to the splitter outputs. Not reachable over the wire.
    pub fn set_mount(&mut self, mount: Mount) {
        self.mount = mount;
    }

    pub fn shutter_physically_open(&self) -> bool {
        self.mono.shutter_open && !self.config.faults.shutter_stuck_closed
    }

    /// Beam leaving the fibre, before the splitter.
    pub fn mono_output(&self) -> Vec<Component> {
        if !self.shutter_physically_open() {
            return Vec::new();
        }
        let mut beam = self.mono.output(self.lamp.power_w());
        for c in &mut beam {
            c.watts *= self.config.fiber_transmission;
        }
        beam
    }

    pub fn arm_beam(&self, arm: Arm) -> Vec<Component> {
        self.splitter.split(&self.mono_output(), arm)
    }

    /// Ground-truth power on an arm, all spectral components included.
    pub fn optical_power_at(&self, arm: Arm) -> OpticalPower {
        OpticalPower::new(total_watts(&self.arm_beam(arm))).expect("non-negative beam power")
    }

    /// Actual beam position on the cathode, cathode-centred µm.
    pub fn beam_on_cathode(&self) -> (f64, f64) {
        let c = self.config.cathode.center_um;
        (
            self.stage[0].position(self.now) - c[0],
            self.stage[1].position(self.now) - c[1],
        )
    }

    pub fn stage_position(&self) -> (f64, f64) {
        (self.stage[0].position(self.now), self.stage[1].position(self.now))
    }

    pub fn stage_accuracy_offsets(&self) -> (f64, f64) {
        (self.stage[0].accuracy_offset_um, self.stage[1].accuracy_offset_um)
    }

    /// Spot-averaged planted QE under the beam at the current position.
    pub fn true_qe(&self, nm: f64) -> f64 {
        let (x, z) = self.beam_on_cathode();
        self.cathode.qe_spot(x, z, self.config.beam_diameter_um, nm)
    }

    /// Noise-free cathode current including dark current, A.
    pub fn photocurrent_truth(&self) -> f64 {
        let mut i = self.config.noise.dark_current_a;
        if self.mount == Mount::Pmt {
            let (x, z) = self.beam_on_cathode();
            let spot = self.cathode.spot_multiplier(x, z, self.config.beam_diameter_um);
            for c in self.arm_beam(Arm::Dut) {
                let rate = OpticalPower::new(c.watts)
                    .and_then(|p| photon_rate(p, Wavelength::new(c.nm)?))
                    .unwrap_or(0.0);
                i += ELEMENTARY_CHARGE * rate * spot * self.cathode.spectral_qe(c.nm);
            }
        }
        i
    }

    fn normal(&mut self, kind: InstrumentKind) -> f64 {
        self.rng_read[kind.index()].sample(StandardNormal)
    }

    /// One picoammeter reading, as the instrument would digitise it.
    pub fn photocurrent_read(&mut self) -> Photocurrent {
        let noise = self.config.noise.clone();
        let signal = if self.zero_check {
            0.0
        } else {
            self.photocurrent_truth() * self.pico_gain
        };
        let mut i = signal;
        if noise.white {
            let (z1, z2) = (
                self.normal(InstrumentKind::Picoammeter),
                self.normal(InstrumentKind::Picoammeter),
            );
            i += signal.abs() * noise.picoammeter_white_rel * z1 + noise.picoammeter_floor_a * z2;
        }
        Photocurrent::new(i).expect("finite current")
    }

    /// Calibration gain of power-meter head `channel` at the wavelength set on the meter.
    pub fn head_gain(&self, channel: u8) -> f64 {
        let noise = &self.config.noise;
        if let Some(g) = noise.head_gains {
            return g[channel as usize - 1];
        }
        if !noise.systematic {
            return 1.0;
        }
        let nm = self.pm_lambda;
        let bands = &noise.bands;
        let idx = bands
            .iter()
            .rposition(|b| nm >= b.lambda_min && nm <= b.lambda_max)
            .unwrap_or_else(|| {
                (0..bands.len())
                    .min_by(|&a, &b| bands[a].distance_nm(nm).total_cmp(&bands[b].distance_nm(nm)))
                    .expect("bands validated non-empty")
            });
        1.0 + bands[idx].rel_uncertainty * self.head_z[idx][channel as usize - 1]
    }

    pub fn picoammeter_gain(&self) -> f64 {
        self.pico_gain
    }

    /// One power-meter reading from head `channel`, W.
    pub fn power_read(&mut self, channel: u8) -> f64 {
        let noise = self.config.noise.clone();
        let incident = match self.mount.arm_of(channel) {
            Some(arm) => self.optical_power_at(arm).watts(),
            None => 0.0,
        };
        let signal = incident * self.head_gain(channel);
        let mut p = signal;
        if noise.white {
            let (z1, z2) = (
                self.normal(InstrumentKind::Powermeter),
                self.normal(InstrumentKind::Powermeter),
            );
            p += signal * noise.powermeter_white_rel * z1 + noise.powermeter_floor_w * z2;
        }
        p
    }

    /// Response latency for the next answer from `kind`, jitter included.
    pub fn draw_latency(&mut self, kind: InstrumentKind) -> f64 {
        let base = self.config.timing.latency_s.get(&kind).copied().unwrap_or(0.004);
        let jitter = self.config.timing.jitter_s;
        if jitter > 0.0 {
            base + self.rng_jitter.random_range(0.0..jitter)
        } else {
            base
        }
    }

    pub fn enable_transcript(&mut self) {
        self.transcript.get_or_insert_with(Vec::new);
    }

    pub fn take_transcript(&mut self) -> Vec<String> {
        self.transcript.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Applies a command at the current virtual time and returns the answer
    /// together with the time it becomes readable.
    pub fn respond(&mut self, kind: InstrumentKind, frame: &CommandFrame) -> (ResponseFrame, f64) {
        let response = self.handle(kind, frame);
        let ready = self.now + self.draw_latency(kind);
        if let Some(t) = &mut self.transcript {
            t.push(format!("{:.6} {kind} {frame} -> {response} @{ready:.6}", self.now));
        }
        (response, ready)
    }

    /// Applies one command at the current virtual time.
    pub fn handle(&mut self, kind: InstrumentKind, frame: &CommandFrame) -> ResponseFrame {
        let (spec, args) = match validate(kind, frame) {
            Ok(v) => v,
            Err(e) => return e,
        };
        let num = |i: usize| args[i].as_f64().unwrap_or(f64::NAN);
        let token = |i: usize| match &args[i] {
            ArgValue::Token(t) => *t,
            _ => "",
        };
        match (kind, spec.verb, spec.query) {
            (InstrumentKind::Picoammeter, "*IDN", true) => ResponseFrame::Ok(
                ["QESIM", "PICOAMMETER", &format!("{:016X}", self.config.seed), "1.0"]
                    .map(String::from)
                    .to_vec(),
            ),
            (InstrumentKind::Picoammeter, "READ", true) => {
                let i = self.photocurrent_read().amperes();
                if i.abs() > self.pico_range {
                    ResponseFrame::error(ERR_OVER_RANGE, "OVER-RANGE")
                } else {
                    ResponseFrame::value(format_scientific(i))
                }
            }
            (InstrumentKind::Picoammeter, "RANG", false) => {
                let wanted = num(0);
                let mut r = 2e-9;
                while r < wanted * (1.0 - 1e-9) {
                    r *= 10.0;
                }
                self.pico_range = r;
                ResponseFrame::ack()
            }
            (InstrumentKind::Picoammeter, "RANG", true) => ResponseFrame::value(format_scientific(self.pico_range)),
            (InstrumentKind::Picoammeter, "ZCH", false) => {
                self.zero_check = token(0) == "ON";
                ResponseFrame::ack()
            }
            (InstrumentKind::Monochromator, "GWAVE", false) => {
                self.mono.set_wavelength = num(0);
                ResponseFrame::ack()
            }
            (InstrumentKind::Monochromator, "WAVE", true) => {
                ResponseFrame::value(format_fixed3(self.mono.set_wavelength))
            }
            (InstrumentKind::Monochromator, "FILT", false) => {
                self.mono.filter_request = match &args[0] {
                    ArgValue::Integer(n) => Some(*n as u8),
                    _ => None,
                };
                ResponseFrame::ack()
            }
            (InstrumentKind::Monochromator, "FILT", true) => ResponseFrame::value(self.mono.engaged_slot().to_string()),
            (InstrumentKind::Monochromator, "SHUT", false) => {
                self.mono.shutter_open = token(0) == "O";
                ResponseFrame::ack()
            }
            (InstrumentKind::Monochromator, "SHUT", true) => {
                ResponseFrame::value(if self.mono.shutter_open { "O" } else { "C" })
            }
            (InstrumentKind::Monochromator, "LAMP", false) => {
                self.lamp.config.setpoint = num(0);
                ResponseFrame::ack()
            }
            (InstrumentKind::Monochromator, "LAMP", true) => ResponseFrame::value(format_fixed1(self.lamp.config.setpoint)),
            (InstrumentKind::Monochromator, "FBK", false) => {
                self.lamp.set_feedback(token(0) == "ON");
                ResponseFrame::ack()
            }
            (InstrumentKind::Powermeter, "PM:LAMBDA", false) => {
                self.pm_lambda = num(0);
                ResponseFrame::ack()
            }
            (InstrumentKind::Powermeter, "PM:LAMBDA", true) => ResponseFrame::value(format_fixed3(self.pm_lambda)),
            (InstrumentKind::Powermeter, "PM:POW", true) => {
                let p = self.power_read(num(0) as u8);
                ResponseFrame::value(format_scientific(p))
            }
            (InstrumentKind::Powermeter, "PM:UNIT", true) => ResponseFrame::value("W"),
            (InstrumentKind::Stage, "MOVX", false) => self.move_axis(0, num(0)),
            (InstrumentKind::Stage, "MOVZ", false) => self.move_axis(1, num(0)),
            (InstrumentKind::Stage, "POSX", true) => ResponseFrame::value(format_fixed3(self.stage[0].position(self.now))),
            (InstrumentKind::Stage, "POSZ", true) => ResponseFrame::value(format_fixed3(self.stage[1].position(self.now))),
            (InstrumentKind::Stage, "HOME", false) => {
                let r = self.move_axis(0, 0.0);
                if r.is_ok() {
                    self.move_axis(1, 0.0)
                } else {
                    r
                }
            }
            (InstrumentKind::Stage, "MOVING", true) => {
                let moving = self.stage.iter().any(|a| a.moving(self.now));
                ResponseFrame::value(if moving { "1" } else { "0" })
            }
            _ => unreachable!("verb {} validated against the {kind} table", spec.verb),
        }
    }

    fn move_axis(&mut self, axis: usize, commanded: f64) -> ResponseFrame {
        if let Some(limit) = self.config.faults.stage_fault_after_moves {
            if self.stage_moves >= limit {
                return ResponseFrame::error(ERR_DEVICE_FAULT, "STAGE FAULT");
            }
        }
        self.stage_moves += 1;
        let st = &self.config.stage;
        let rep = st.repeatability_um;
        let jitter = if rep > 0.0 { self.rng_stage.random_range(-rep..=rep) } else { 0.0 };
        let landing = commanded + self.stage[axis].accuracy_offset_um + jitter;
        let (v, settle) = (st.velocity_um_s, st.settle_s);
        self.stage[axis].start_move(self.now, landing, v, settle);
        ResponseFrame::ack()
    }
}
