use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::protocol::{Direction, FrameParser, InstrumentKind, ResponseFrame, ERR_DEVICE_FAULT};

use super::link::{serve_bytes, SharedBench};
use super::BenchError;

const POLL: Duration = Duration::from_millis(10);

/// Bench endpoints listening on TCP. The virtual clock follows the wall clock
/// times `time_scale`. Dropping the server stops every endpoint.
pub struct BenchServer {
    addrs: BTreeMap<InstrumentKind, SocketAddr>,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl BenchServer {
    pub fn addrs(&self) -> &BTreeMap<InstrumentKind, SocketAddr> {
        &self.addrs
    }

    pub fn stop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    /// Blocks until the server is stopped from another thread or a listener dies.
    pub fn wait(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    pub fn stop_handle(&self) -> Arc<AtomicBool> {
        self.stop.clone()
    }
}

impl Drop for BenchServer {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Binds every endpoint before serving any, so a busy address fails startup cleanly.
pub fn serve(
    bench: SharedBench,
    endpoints: &BTreeMap<InstrumentKind, String>,
    time_scale: f64,
) -> Result<BenchServer, BenchError> {
    let mut listeners = Vec::new();
    let mut addrs = BTreeMap::new();
    for kind in InstrumentKind::ALL {
        let addr = endpoints
            .get(&kind)
            .ok_or_else(|| BenchError::InvalidConfig(format!("no endpoint configured for {kind}")))?;
        let listener = TcpListener::bind(addr.as_str()).map_err(|e| BenchError::Bind {
            address: addr.clone(),
            source: e,
        })?;
        listener.set_nonblocking(true)?;
        addrs.insert(kind, listener.local_addr()?);
        listeners.push((kind, listener));
    }
    let stop = Arc::new(AtomicBool::new(false));
    let epoch = Instant::now();
    let virtual_epoch = bench.lock().now();
    let sync = Arc::new(move |b: &SharedBench| {
        let target = virtual_epoch + epoch.elapsed().as_secs_f64() * time_scale;
        b.lock().advance_to(target);
    });
    let threads = listeners
        .into_iter()
        .map(|(kind, listener)| {
            let bench = bench.clone();
            let stop = stop.clone();
            let sync = sync.clone();
            thread::spawn(move || {
                let busy = Arc::new(AtomicBool::new(false));
                let mut sessions: Vec<JoinHandle<()>> = Vec::new();
                while !stop.load(Ordering::SeqCst) {
                    match listener.accept() {
                        Ok((mut stream, _)) => {
                            if busy.swap(true, Ordering::SeqCst) {
                                let _ = stream.write_all(
                                    &ResponseFrame::error(ERR_DEVICE_FAULT, "SESSION BUSY").encode().unwrap(),
                                );
                                continue;
                            }
                            let (bench, stop, busy, sync) = (bench.clone(), stop.clone(), busy.clone(), sync.clone());
                            sessions.push(thread::spawn(move || {
                                let _ = session(stream, kind, &bench, &stop, &*sync);
                                busy.store(false, Ordering::SeqCst);
                            }));
                        }
                        Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
                        Err(_) => thread::sleep(POLL),
                    }
                }
                for s in sessions {
                    let _ = s.join();
                }
            })
        })
        .collect();
    Ok(BenchServer { addrs, stop, threads })
}

fn session(
    mut stream: TcpStream,
    kind: InstrumentKind,
    bench: &SharedBench,
    stop: &AtomicBool,
    sync: &dyn Fn(&SharedBench),
) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(POLL * 5))?;
    stream.set_nodelay(true)?;
    let mut parser = FrameParser::new(Direction::Commands);
    let mut buf = [0u8; 1024];
    while !stop.load(Ordering::SeqCst) {
        let n = match stream.read(&mut buf) {
            Ok(0) => return Ok(()),
            Ok(n) => n,
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
            Err(e) => return Err(e),
        };
        sync(bench);
        let answers = {
            let mut b = bench.lock();
            serve_bytes(&mut b, kind, &mut parser, &buf[..n])
        };
        for (_, bytes) in answers {
            stream.write_all(&bytes)?;
        }
    }
    Ok(())
}
