//! Line-oriented ASCII instrument protocol.
//!
//! Every frame is one line of printable ASCII terminated by CR LF, at most
//! [`MAX_FRAME_LEN`] bytes long. Commands are `VERB[?][ ARG]*`; the instrument
//! answers every command with exactly one line: `OK`, a comma-separated value
//! list, or `ERR <code> <message>`.

mod frame;
mod grammar;
mod parser;
mod transport;

use std::io;

use thiserror::Error;

pub use frame::{CommandFrame, Frame, ResponseFrame, MAX_FRAME_LEN, TERMINATOR};
pub use grammar::{
    command_set, command_set_named, conforms, format_fixed1, format_fixed3, format_scientific, parse_scientific,
    validate, ArgSpec, ArgValue, InstrumentKind, ResponseSchema, VerbSpec, ERR_ARITY, ERR_BAD_ARG,
    ERR_DEVICE_FAULT, ERR_OVER_RANGE, ERR_UNKNOWN_COMMAND,
};
pub use parser::{parse_all, Direction, FrameParser};
pub use transport::{Session, TcpTransport, Transport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("invalid verb {0:?}")]
    InvalidVerb(String),
    #[error("invalid token {0:?}")]
    InvalidToken(String),
    #[error("error code {0} is not three digits")]
    InvalidErrorCode(u16),
    #[error("frame of {0} bytes exceeds the frame limit")]
    TooLong(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolErrorKind {
    Malformed(String),
    FrameTooLong,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("protocol error at byte {offset}: {kind:?}")]
pub struct ProtocolError {
    pub offset: u64,
    pub kind: ProtocolErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("unknown instrument kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("transport: {0}")]
    Io(#[from] io::Error),
    #[error("{0} closed the connection")]
    Closed(InstrumentKind),
    #[error("{0} already has a command outstanding")]
    Busy(InstrumentKind),
    #[error("{kind} answered ERR {code} {message}")]
    Instrument {
        kind: InstrumentKind,
        code: u16,
        message: String,
    },
    #[error("{0} sent an unexpected payload {1:?}")]
    Unexpected(InstrumentKind, String),
}

impl SessionError {
    /// True when the link itself is gone, as opposed to one bad exchange.
    pub fn is_transport_loss(&self) -> bool {
        matches!(self, SessionError::Io(_) | SessionError::Closed(_))
    }
}
