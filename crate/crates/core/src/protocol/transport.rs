use std::io::{self, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::frame::{CommandFrame, Frame, ResponseFrame};
use super::grammar::InstrumentKind;
use super::parser::{Direction, FrameParser};
use super::SessionError;

/// A byte stream to one instrument.
pub trait Transport: Send {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()>;

    /// Blocks until at least one byte is available, the peer closes (`Ok(0)`)
    /// or the transport's timeout expires (`ErrorKind::TimedOut`).
    fn recv(&mut self, buf: &mut [u8]) -> io::Result<usize>;

    /// Time at which the bytes last returned by `recv` arrived, on the
    /// transport's own clock, when it keeps one.
    fn arrival_time(&self) -> Option<f64> {
        None
    }
}

pub struct TcpTransport {
    stream: TcpStream,
}

impl TcpTransport {
    pub fn connect(address: &str, timeout: Duration) -> io::Result<Self> {
        let addr = address
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, format!("no address for {address}")))?;
        let stream = TcpStream::connect_timeout(&addr, timeout)?;
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        stream.set_nodelay(true)?;
        Ok(TcpTransport { stream })
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.stream.write_all(bytes)
    }

    fn recv(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        match self.stream.read(buf) {
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => Err(io::Error::new(io::ErrorKind::TimedOut, e)),
            other => other,
        }
    }
}

/// One command/response conversation with an instrument. At most one command
/// may be outstanding at a time.
pub struct Session {
    kind: InstrumentKind,
    transport: Box<dyn Transport>,
    parser: FrameParser,
    outstanding: bool,
}

impl Session {
    pub fn new(kind: InstrumentKind, transport: Box<dyn Transport>) -> Self {
        Session {
            kind,
            transport,
            parser: FrameParser::new(Direction::Responses),
            outstanding: false,
        }
    }

    pub fn kind(&self) -> InstrumentKind {
        self.kind
    }

    pub fn send(&mut self, frame: &CommandFrame) -> Result<(), SessionError> {
        if self.outstanding {
            return Err(SessionError::Busy(self.kind));
        }
        let bytes = frame.encode()?;
        self.transport.send(&bytes)?;
        self.outstanding = true;
        Ok(())
    }

    /// Waits for the response to the outstanding command. The second value is
    /// the arrival time reported by the transport, if it keeps a clock.
    pub fn recv(&mut self) -> Result<(ResponseFrame, Option<f64>), SessionError> {
        let mut buf = [0u8; 512];
        loop {
            if let Some(frame) = self.parser.next_frame() {
                self.outstanding = false;
                return match frame? {
                    Frame::Response(r) => Ok((r, self.transport.arrival_time())),
                    Frame::Command(_) => unreachable!("response parser yields responses"),
                };
            }
            let n = self.transport.recv(&mut buf)?;
            if n == 0 {
                return Err(SessionError::Closed(self.kind));
            }
            self.parser.push(&buf[..n]);
        }
    }

    pub fn query(&mut self, frame: &CommandFrame) -> Result<ResponseFrame, SessionError> {
        self.send(frame)?;
        Ok(self.recv()?.0)
    }

    /// Sends a setting and requires an `OK`.
    pub fn command(&mut self, frame: &CommandFrame) -> Result<(), SessionError> {
        match self.query(frame)? {
            ResponseFrame::Ok(v) if v.is_empty() => Ok(()),
            ResponseFrame::Ok(v) => Err(SessionError::Unexpected(self.kind, v.join(","))),
            ResponseFrame::Err { code, message } => Err(SessionError::Instrument {
                kind: self.kind,
                code,
                message,
            }),
        }
    }

    /// Sends a query and returns its single value.
    pub fn value(&mut self, frame: &CommandFrame) -> Result<String, SessionError> {
        let r = self.query(frame)?;
        self.single_value(r)
    }

    pub fn single_value(&self, r: ResponseFrame) -> Result<String, SessionError> {
        match r {
            ResponseFrame::Ok(mut v) if v.len() == 1 => Ok(v.remove(0)),
            ResponseFrame::Ok(v) => Err(SessionError::Unexpected(self.kind, v.join(","))),
            ResponseFrame::Err { code, message } => Err(SessionError::Instrument {
                kind: self.kind,
                code,
                message,
            }),
        }
    }
}
