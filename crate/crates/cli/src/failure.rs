use std::fmt;

use qe_core::engine::EngineError;
use qe_core::io::IoError;
use qe_core::simbench::BenchError;

/// A failed command with the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Refused(String),
    Measurement(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Refused(_) => 4,
            Failure::Measurement(_) => 1,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Io(_) => "io",
            Failure::Refused(_) => "refused",
            Failure::Measurement(_) => "measurement",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Failure::Usage(m) | Failure::Io(m) | Failure::Refused(m) | Failure::Measurement(m)) = self;
        write!(f, "error[{}]: {m}", self.category())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Config { .. } => Failure::Usage(e.to_string()),
            IoError::Io { .. } | IoError::Format { .. } => Failure::Io(e.to_string()),
            IoError::Consistency(_) => Failure::Measurement(e.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        if e.is_refusal() {
            return Failure::Refused(e.to_string());
        }
        match &e {
            EngineError::Config(_) | EngineError::NoSplitterTable => Failure::Usage(e.to_string()),
            EngineError::Session(s) if s.is_transport_loss() => Failure::Io(e.to_string()),
            EngineError::Session(qe_core::protocol::SessionError::Io(_)) => Failure::Io(e.to_string()),
            _ => Failure::Measurement(e.to_string()),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::InvalidConfig(_) | BenchError::MapFormat(_) => Failure::Usage(e.to_string()),
            BenchError::Bind { .. } | BenchError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Measurement(e.to_string()),
        }
    }
}
