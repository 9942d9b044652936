//! Streaming CR LF line parser.
//!
//! Bytes may arrive in arbitrary chunks; the parser only emits a frame once its
//! terminator has been seen and keeps the remainder for the next call. Every
//! error carries the absolute stream offset of the offending byte.

use super::frame::{is_valid_arg, is_valid_value, is_valid_verb, CommandFrame, Frame, ResponseFrame, MAX_FRAME_LEN};
use super::{ProtocolError, ProtocolErrorKind};

/// Which side of the link the parser sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Instrument side: lines are commands.
    Commands,
    /// Host side: lines are responses.
    Responses,
}

#[derive(Debug)]
pub struct FrameParser {
    direction: Direction,
    buf: Vec<u8>,
    /// Stream offset of `buf[0]`.
    offset: u64,
    discarding: bool,
}

impl FrameParser {
    pub fn new(direction: Direction) -> Self {
        FrameParser {
            direction,
            buf: Vec::new(),
            offset: 0,
            discarding: false,
        }
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Bytes received but not yet part of an emitted frame.
    pub fn pending(&self) -> &[u8] {
        &self.buf
    }

    pub fn next_frame(&mut self) -> Option<Result<Frame, ProtocolError>> {
        if self.discarding {
            match find_crlf(&self.buf) {
                Some(p) => {
                    self.consume(p + 2);
                    self.discarding = false;
                }
                None => {
                    // Keep a trailing CR, it may pair with the next chunk's LF.
                    let keep = usize::from(self.buf.last() == Some(&b'\r'));
                    let n = self.buf.len() - keep;
                    self.consume(n);
                    return None;
                }
            }
        }
        let window = &self.buf[..self.buf.len().min(MAX_FRAME_LEN)];
        match find_crlf(window) {
            Some(p) => {
                let start = self.offset;
                let line: Vec<u8> = self.buf[..p].to_vec();
                self.consume(p + 2);
                Some(parse_line(&line, start, self.direction))
            }
            None if self.buf.len() >= MAX_FRAME_LEN => {
                let start = self.offset;
                self.discarding = true;
                Some(Err(ProtocolError {
                    offset: start,
                    kind: ProtocolErrorKind::FrameTooLong,
                }))
            }
            None => None,
        }
    }

    /// Drains every complete frame currently buffered.
    pub fn drain(&mut self) -> Vec<Result<Frame, ProtocolError>> {
        std::iter::from_fn(|| self.next_frame()).collect()
    }

    fn consume(&mut self, n: usize) {
        self.buf.drain(..n);
        self.offset += n as u64;
    }
}

fn find_crlf(bytes: &[u8]) -> Option<usize> {
    bytes.windows(2).position(|w| w == b"\r\n")
}

/// Parses every frame of a complete buffer in one go.
pub fn parse_all(bytes: &[u8], direction: Direction) -> Vec<Result<Frame, ProtocolError>> {
    let mut p = FrameParser::new(direction);
    p.push(bytes);
    p.drain()
}

fn malformed(offset: u64, why: &str) -> ProtocolError {
    ProtocolError {
        offset,
        kind: ProtocolErrorKind::Malformed(why.to_string()),
    }
}

fn parse_line(line: &[u8], start: u64, direction: Direction) -> Result<Frame, ProtocolError> {
    if let Some(i) = line.iter().position(|b| !(0x20..=0x7e).contains(b)) {
        return Err(malformed(start + i as u64, "non-printable byte"));
    }
    // All bytes are printable ASCII from here on.
    let text = std::str::from_utf8(line).map_err(|_| malformed(start, "invalid text"))?;
    match direction {
        Direction::Commands => parse_command(text, start).map(Frame::Command),
        Direction::Responses => parse_response(text, start).map(Frame::Response),
    }
}

fn parse_command(text: &str, start: u64) -> Result<CommandFrame, ProtocolError> {
    if text.is_empty() {
        return Err(malformed(start, "empty line"));
    }
    let mut tokens = Vec::new();
    let mut pos = 0usize;
    for tok in text.split(' ') {
        if tok.is_empty() {
            return Err(malformed(start + pos as u64, "empty token"));
        }
        tokens.push((pos, tok));
        pos += tok.len() + 1;
    }
    let (_, head) = tokens[0];
    let (verb, is_query) = match head.strip_suffix('?') {
        Some(v) => (v, true),
        None => (head, false),
    };
    if !is_valid_verb(verb) {
        return Err(malformed(start, "invalid verb"));
    }
    let mut args = Vec::with_capacity(tokens.len() - 1);
    for (p, tok) in &tokens[1..] {
        if !is_valid_arg(tok) {
            return Err(malformed(start + *p as u64, "invalid argument"));
        }
        args.push(tok.to_string());
    }
    Ok(CommandFrame {
        verb: verb.to_string(),
        args,
        is_query,
    })
}

fn parse_response(text: &str, start: u64) -> Result<ResponseFrame, ProtocolError> {
    if text == "OK" {
        return Ok(ResponseFrame::ack());
    }
    if let Some(rest) = text.strip_prefix("ERR ") {
        let code = rest.get(..3).filter(|c| c.bytes().all(|b| b.is_ascii_digit()));
        let code = match code {
            Some(c) if !c.starts_with('0') => c.parse::<u16>().map_err(|_| malformed(start + 4, "bad error code"))?,
            _ => return Err(malformed(start + 4, "bad error code")),
        };
        let message = match rest.get(3..) {
            Some(m) if m.len() > 1 && m.starts_with(' ') => &m[1..],
            _ => return Err(malformed(start + 7, "missing error message")),
        };
        return Ok(ResponseFrame::error(code, message));
    }
    if text.is_empty() {
        return Err(malformed(start, "empty line"));
    }
    let mut values = Vec::new();
    let mut pos = 0usize;
    for v in text.split(',') {
        if !is_valid_value(v) {
            return Err(malformed(start + pos as u64, "invalid value"));
        }
        values.push(v.to_string());
        pos += v.len() + 1;
    }
    Ok(ResponseFrame::Ok(values))
}
