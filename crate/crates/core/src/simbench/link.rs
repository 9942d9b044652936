use std::collections::VecDeque;
use std::io;
use std::sync::{Arc, Mutex, MutexGuard};

use crate::clock::Clock;
use crate::protocol::{Direction, Frame, FrameParser, InstrumentKind, ResponseFrame, Transport, ERR_UNKNOWN_COMMAND};

use super::bench::Bench;

/// The one authoritative bench, shared by every endpoint link.
#[derive(Debug, Clone)]
pub struct SharedBench(Arc<Mutex<Bench>>);

impl SharedBench {
    pub fn new(bench: Bench) -> Self {
        SharedBench(Arc::new(Mutex::new(bench)))
    }

    pub fn lock(&self) -> MutexGuard<'_, Bench> {
        // a panicked holder leaves the bench in a consistent state between commands
        self.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// An in-process byte link to one endpoint.
    pub fn link(&self, kind: InstrumentKind) -> LocalLink {
        LocalLink {
            bench: self.clone(),
            kind,
            parser: FrameParser::new(Direction::Commands),
            queue: VecDeque::new(),
            partial: Vec::new(),
            arrival: None,
        }
    }

    pub fn clock(&self) -> BenchClock {
        BenchClock(self.clone())
    }
}

/// Answer to a line that did not parse as a command.
pub(crate) fn malformed_response() -> ResponseFrame {
    ResponseFrame::error(ERR_UNKNOWN_COMMAND, "MALFORMED")
}

/// Feeds raw bytes to the bench and collects the encoded answers with their
/// ready times.
pub(crate) fn serve_bytes(
    bench: &mut Bench,
    kind: InstrumentKind,
    parser: &mut FrameParser,
    bytes: &[u8],
) -> Vec<(f64, Vec<u8>)> {
    parser.push(bytes);
    let mut out = Vec::new();
    while let Some(frame) = parser.next_frame() {
        let (response, ready) = match frame {
            Ok(Frame::Command(cmd)) => bench.respond(kind, &cmd),
            _ => (malformed_response(), bench.now() + bench.draw_latency(kind)),
        };
        out.push((ready, response.encode().expect("bench responses are well formed")));
    }
    out
}

/// Transport whose responses become readable at their virtual ready time.
/// Receiving advances the bench clock to that time if it is still in the future.
pub struct LocalLink {
    bench: SharedBench,
    kind: InstrumentKind,
    parser: FrameParser,
    queue: VecDeque<(f64, Vec<u8>)>,
    partial: Vec<u8>,
    arrival: Option<f64>,
}

impl Transport for LocalLink {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()> {
        let mut bench = self.bench.lock();
        let answers = serve_bytes(&mut bench, self.kind, &mut self.parser, bytes);
        self.queue.extend(answers);
        Ok(())
    }

    fn recv(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if self.partial.is_empty() {
            let (ready, bytes) = self
                .queue
                .pop_front()
                .ok_or_else(|| io::Error::new(io::ErrorKind::TimedOut, "no response pending"))?;
            self.bench.lock().advance_to(ready);
            self.arrival = Some(ready);
            self.partial = bytes;
        }
        let n = buf.len().min(self.partial.len());
        buf[..n].copy_from_slice(&self.partial[..n]);
        self.partial.drain(..n);
        Ok(n)
    }

    fn arrival_time(&self) -> Option<f64> {
        self.arrival
    }
}

/// The bench's virtual clock; sleeping ticks the bench.
#[derive(Debug, Clone)]
pub struct BenchClock(SharedBench);

impl Clock for BenchClock {
    fn now(&self) -> f64 {
        self.0.lock().now()
    }

    fn sleep(&self, seconds: f64) {
        if seconds > 0.0 {
            let _ = self.0.lock().tick(seconds);
        }
    }
}
