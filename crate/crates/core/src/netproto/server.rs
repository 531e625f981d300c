//! Multi-threaded worker service.
//!
//! Each connection has one reader and one writer. The reader keeps pulling
//! frames while fewer than `max_concurrent` requests are in flight on that
//! connection, so the next request's bytes arrive while earlier ones are
//! being solved. Responses are written by the single writer in completion
//! order and matched to requests by task id.

use std::io::{self, BufReader, BufWriter};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};

use log::{debug, info, warn};

use super::wire::{
    decode_request_body, encode_response, read_frame, status, write_frame, ErrorClass, WireError, WireResponse,
};
use crate::graph::{CutResult, GridGraph};
use crate::maxflow::{maxflow_pushrelabel_oriented, SolveError};

/// Solves a composite graph. The mask marks pixels of swapped segments,
/// which take the maximal source-side labelling.
pub type Solver = Arc<dyn Fn(&GridGraph, &[bool]) -> Result<CutResult, SolveError> + Send + Sync>;

/// The default solver: push-relabel.
pub fn pushrelabel_solver() -> Solver {
    Arc::new(maxflow_pushrelabel_oriented)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServerConfig {
    /// Requests read ahead per connection before a response must be written.
    pub max_concurrent: usize,
    /// Solves running at once across all connections.
    pub solver_threads: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            max_concurrent: 2,
            solver_threads: 2,
        }
    }
}

/// Counting semaphore.
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Permits {
    fn new(n: usize) -> Arc<Self> {
        Arc::new(Permits {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        })
    }

    fn acquire(self: &Arc<Self>) -> PermitGuard {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        PermitGuard(Arc::clone(self))
    }
}

struct PermitGuard(Arc<Permits>);

impl Drop for PermitGuard {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub struct WorkerServer {
    listener: TcpListener,
    config: ServerConfig,
    solver: Solver,
}

impl WorkerServer {
    pub fn bind<A: ToSocketAddrs>(addr: A, config: ServerConfig, solver: Solver) -> io::Result<Self> {
        Ok(WorkerServer {
            listener: TcpListener::bind(addr)?,
            config,
            solver,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until the process exits.
    pub fn run(self) -> io::Result<()> {
        let stop = Arc::new(AtomicBool::new(false));
        self.accept_loop(&stop)
    }

    /// Serves on a background thread.
    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let thread = thread::Builder::new()
            .name(format!("worker-{addr}"))
            .spawn(move || {
                if let Err(e) = self.accept_loop(&flag) {
                    warn!("accept loop on {addr} ended: {e}");
                }
            })?;
        Ok(ServerHandle {
            addr,
            stop,
            thread: Some(thread),
        })
    }

    fn accept_loop(self, stop: &AtomicBool) -> io::Result<()> {
        info!(
            "worker listening on {} (max_concurrent={}, solver_threads={})",
            self.local_addr()?,
            self.config.max_concurrent,
            self.config.solver_threads
        );
        let solve_permits = Permits::new(self.config.solver_threads);
        for stream in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let solver = Arc::clone(&self.solver);
            let permits = Arc::clone(&solve_permits);
            let max_concurrent = self.config.max_concurrent;
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = serve_connection(stream, max_concurrent, solver, permits) {
                    debug!("connection {peer:?} closed: {e}");
                }
            });
        }
        Ok(())
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting new connections. Open connections finish on their own.
    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.thread.is_some() {
            self.stop_now();
        }
    }
}

fn serve_connection(stream: TcpStream, max_concurrent: usize, solver: Solver, solve_permits: Arc<Permits>) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let write_half = stream.try_clone()?;
    let (tx, rx) = mpsc::channel::<Vec<u8>>();
    let writer = thread::spawn(move || -> io::Result<()> {
        let mut w = BufWriter::new(write_half);
        for frame in rx {
            write_frame(&mut w, &frame)?;
        }
        Ok(())
    });

    let inflight = Permits::new(max_concurrent);
    loop {
        let slot = inflight.acquire();
        let body = match read_frame(&mut reader) {
            Ok(Some(body)) => body,
            Ok(None) => break,
            Err(e) => {
                debug!("unreadable frame: {e}");
                let _ = tx.send(encode_response(&WireResponse::error(0, e.class().status())));
                break;
            }
        };
        match decode_request_body(&body) {
            Ok(req) => {
                let tx = tx.clone();
                let solver = Arc::clone(&solver);
                let permits = Arc::clone(&solve_permits);
                thread::spawn(move || {
                    let _slot = slot;
                    let result = {
                        let _p = permits.acquire();
                        solver(&req.graph, &req.orientation())
                    };
                    let resp = match result {
                        Ok(cut) => WireResponse::ok(req.task_id, cut.flow, &cut.labels),
                        Err(SolveError::Admission(e)) => {
                            debug!("task {} rejected: {e}", req.task_id);
                            WireResponse::error(req.task_id, status::ADMISSION)
                        }
                        Err(e) => {
                            warn!("task {} failed: {e}", req.task_id);
                            WireResponse::error(req.task_id, status::SOLVER_FAILURE)
                        }
                    };
                    let _ = tx.send(encode_response(&resp));
                });
            }
            Err(e) => {
                let task_id = match &e {
                    WireError::CapacityOutOfRange { task_id, .. } => *task_id,
                    WireError::BadMagic(_) => 0,
                    _ => peek_task_id(&body),
                };
                let _ = tx.send(encode_response(&WireResponse::error(task_id, e.class().status())));
                drop(slot);
                if matches!(e.class(), ErrorClass::BadMagic | ErrorClass::LengthMismatch | ErrorClass::Io) {
                    break;
                }
            }
        }
    }

    drop(tx);
    let result = writer.join().unwrap_or_else(|_| Err(io::Error::other("writer panicked")));
    let _ = stream.shutdown(Shutdown::Write);
    result
}

fn peek_task_id(body: &[u8]) -> u64 {
    body.get(8..16)
        .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
        .unwrap_or(0)
}
