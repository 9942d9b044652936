//! Per-instrument command tables and argument validation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::frame::{CommandFrame, ResponseFrame};
use super::GrammarError;

pub const ERR_UNKNOWN_COMMAND: u16 = 100;
pub const ERR_ARITY: u16 = 101;
pub const ERR_BAD_ARG: u16 = 102;
pub const ERR_OVER_RANGE: u16 = 201;
pub const ERR_DEVICE_FAULT: u16 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstrumentKind {
    Picoammeter,
    Monochromator,
    Powermeter,
    Stage,
}

impl InstrumentKind {
    pub const ALL: [InstrumentKind; 4] = [
        InstrumentKind::Picoammeter,
        InstrumentKind::Monochromator,
        InstrumentKind::Powermeter,
        InstrumentKind::Stage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstrumentKind::Picoammeter => "picoammeter",
            InstrumentKind::Monochromator => "monochromator",
            InstrumentKind::Powermeter => "powermeter",
            InstrumentKind::Stage => "stage",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for InstrumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstrumentKind {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InstrumentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GrammarError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArgSpec {
    Number { min: f64, max: f64 },
    Integer { min: i64, max: i64 },
    Choice(&'static [&'static str]),
    IntegerOrChoice { min: i64, max: i64, choices: &'static [&'static str] },
}

/// Shape of the payload a command answers with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResponseSchema {
    /// `OK`
    Ack,
    /// Signed scientific notation, six significant digits: `+8.26600E-11`.
    Scientific,
    /// Fixed point with three decimals: `410.000`.
    Fixed3,
    /// Fixed point with one decimal: `55.0`.
    Fixed1,
    Integer,
    Choice(&'static [&'static str]),
    /// Free comma-separated identification fields.
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerbSpec {
    pub verb: &'static str,
    pub query: bool,
    pub args: &'static [ArgSpec],
    pub response: ResponseSchema,
}

const fn spec(verb: &'static str, query: bool, args: &'static [ArgSpec], response: ResponseSchema) -> VerbSpec {
    VerbSpec {
        verb,
        query,
        args,
        response,
    }
}

const ON_OFF: &[&str] = &["ON", "OFF"];

static PICOAMMETER: [VerbSpec; 5] = [
    spec("*IDN", true, &[], ResponseSchema::Text),
    spec("READ", true, &[], ResponseSchema::Scientific),
    spec("RANG", false, &[ArgSpec::Number { min: 2e-9, max: 2e-2 }], ResponseSchema::Ack),
    spec("RANG", true, &[], ResponseSchema::Scientific),
    spec("ZCH", false, &[ArgSpec::Choice(ON_OFF)], ResponseSchema::Ack),
];

static MONOCHROMATOR: [VerbSpec; 9] = [
    spec("GWAVE", false, &[ArgSpec::Number { min: 250.0, max: 1100.0 }], ResponseSchema::Ack),
    spec("WAVE", true, &[], ResponseSchema::Fixed3),
    spec(
        "FILT",
        false,
        &[ArgSpec::IntegerOrChoice {
            min: 0,
            max: 4,
            choices: &["AUTO"],
        }],
        ResponseSchema::Ack,
    ),
    spec("FILT", true, &[], ResponseSchema::Integer),
    spec("SHUT", false, &[ArgSpec::Choice(&["O", "C"])], ResponseSchema::Ack),
    spec("SHUT", true, &[], ResponseSchema::Choice(&["O", "C"])),
    spec("LAMP", false, &[ArgSpec::Number { min: 0.0, max: 100.0 }], ResponseSchema::Ack),
    spec("LAMP", true, &[], ResponseSchema::Fixed1),
    spec("FBK", false, &[ArgSpec::Choice(ON_OFF)], ResponseSchema::Ack),
];

static POWERMETER: [VerbSpec; 4] = [
    spec("PM:LAMBDA", false, &[ArgSpec::Number { min: 200.0, max: 1100.0 }], ResponseSchema::Ack),
    spec("PM:LAMBDA", true, &[], ResponseSchema::Fixed3),
    spec("PM:POW", true, &[ArgSpec::Integer { min: 1, max: 2 }], ResponseSchema::Scientific),
    spec("PM:UNIT", true, &[], ResponseSchema::Choice(&["W"])),
];

static STAGE: [VerbSpec; 6] = [
    spec("MOVX", false, &[ArgSpec::Number { min: 0.0, max: 300_000.0 }], ResponseSchema::Ack),
    spec("MOVZ", false, &[ArgSpec::Number { min: 0.0, max: 300_000.0 }], ResponseSchema::Ack),
    spec("POSX", true, &[], ResponseSchema::Fixed3),
    spec("POSZ", true, &[], ResponseSchema::Fixed3),
    spec("HOME", false, &[], ResponseSchema::Ack),
    spec("MOVING", true, &[], ResponseSchema::Integer),
];

/// The complete command table of an instrument class.
pub fn command_set(kind: InstrumentKind) -> &'static [VerbSpec] {
    match kind {
        InstrumentKind::Picoammeter => &PICOAMMETER,
        InstrumentKind::Monochromator => &MONOCHROMATOR,
        InstrumentKind::Powermeter => &POWERMETER,
        InstrumentKind::Stage => &STAGE,
    }
}

pub fn command_set_named(kind: &str) -> Result<&'static [VerbSpec], GrammarError> {
    Ok(command_set(kind.parse()?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Number(f64),
    Integer(i64),
    Token(&'static str),
}

impl ArgValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ArgValue::Number(v) => Some(*v),
            ArgValue::Integer(v) => Some(*v as f64),
            ArgValue::Token(_) => None,
        }
    }
}

/// Matches a frame against an instrument's table.
///
/// On failure returns the `ERR` response the instrument should send.
pub fn validate(kind: InstrumentKind, frame: &CommandFrame) -> Result<(&'static VerbSpec, Vec<ArgValue>), ResponseFrame> {
    let table = command_set(kind);
    let mut same_verb = table.iter().filter(|s| s.verb == frame.verb).peekable();
    if same_verb.peek().is_none() {
        return Err(ResponseFrame::error(ERR_UNKNOWN_COMMAND, "UNKNOWN COMMAND"));
    }
    let spec = same_verb
        .find(|s| s.query == frame.is_query)
        .ok_or_else(|| ResponseFrame::error(ERR_ARITY, "QUERY FORM MISMATCH"))?;
    if frame.args.len() != spec.args.len() {
        return Err(ResponseFrame::error(ERR_ARITY, "WRONG ARGUMENT COUNT"));
    }
    let values = spec
        .args
        .iter()
        .zip(&frame.args)
        .map(|(a, raw)| parse_arg(a, raw))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| ResponseFrame::error(ERR_BAD_ARG, "BAD ARG"))?;
    Ok((spec, values))
}

fn parse_arg(spec: &ArgSpec, raw: &str) -> Option<ArgValue> {
    match *spec {
        ArgSpec::Number { min, max } => {
            let v: f64 = raw.parse().ok()?;
            (v.is_finite() && v >= min && v <= max).then_some(ArgValue::Number(v))
        }
        ArgSpec::Integer { min, max } => {
            let v: i64 = raw.parse().ok()?;
            (min..=max).contains(&v).then_some(ArgValue::Integer(v))
        }
        ArgSpec::Choice(choices) => choices.iter().find(|c| **c == raw).map(|c| ArgValue::Token(c)),
        ArgSpec::IntegerOrChoice { min, max, choices } => choices
            .iter()
            .find(|c| **c == raw)
            .map(|c| ArgValue::Token(c))
            .or_else(|| parse_arg(&ArgSpec::Integer { min, max }, raw)),
    }
}

/// Whether a successful response payload matches the schema.
pub fn conforms(schema: ResponseSchema, response: &ResponseFrame) -> bool {
    let values = match response {
        ResponseFrame::Ok(v) => v,
        ResponseFrame::Err { .. } => return true,
    };
    let single = || (values.len() == 1).then(|| values[0].as_str());
    match schema {
        ResponseSchema::Ack => values.is_empty(),
        ResponseSchema::Scientific => single().is_some_and(|v| parse_scientific(v).is_some()),
        ResponseSchema::Fixed3 => single().is_some_and(|v| is_fixed(v, 3)),
        ResponseSchema::Fixed1 => single().is_some_and(|v| is_fixed(v, 1)),
        ResponseSchema::Integer => single().is_some_and(|v| v.parse::<i64>().is_ok()),
        ResponseSchema::Choice(c) => single().is_some_and(|v| c.contains(&v)),
        ResponseSchema::Text => !values.is_empty(),
    }
}

fn is_fixed(v: &str, decimals: usize) -> bool {
    match v.split_once('.') {
        Some((int, frac)) => {
            let int = int.strip_prefix('-').unwrap_or(int);
            !int.is_empty()
                && int.bytes().all(|b| b.is_ascii_digit())
                && frac.len() == decimals
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

/// `+8.26600E-11`: mandatory sign, six significant digits, two-digit exponent.
pub fn format_scientific(v: f64) -> String {
    let sign = if v.is_sign_negative() && v != 0.0 { '-' } else { '+' };
    let s = format!("{:.5e}", v.abs());
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}{mantissa}E{esign}{:02}", exp.abs())
}

pub fn parse_scientific(v: &str) -> Option<f64> {
    let body = v.strip_prefix(['+', '-'])?;
    let (mantissa, exp) = body.split_once('E')?;
    if !exp.starts_with(['+', '-']) || mantissa.is_empty() {
        return None;
    }
    v.parse::<f64>().ok().filter(|x| x.is_finite())
}

pub fn format_fixed3(v: f64) -> String {
    format!("{v:.3}")
}

pub fn format_fixed1(v: f64) -> String {
    format!("{v:.1}")
}
