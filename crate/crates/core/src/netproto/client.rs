//! Client side of the worker protocol.

use std::io::{self, BufReader, BufWriter, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use thiserror::Error;

use super::wire::{
    decode_response_body, encode_request, read_frame, status, unpack_bits, WireError, WireRequest, WireResponse,
};
use crate::graph::{cut_cost, CutResult};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("transport: {0}")]
    Transport(io::Error),
    #[error("timed out after {0:?}")]
    Timeout(Duration),
    #[error("worker answered task {task_id} with status {status}")]
    Status { task_id: u64, status: u16 },
    #[error("protocol: {0}")]
    Wire(WireError),
    #[error("response for task {got}, expected {expected}")]
    TaskMismatch { expected: u64, got: u64 },
    #[error("integrity check failed for task {task_id}: worker claimed flow {claimed}, labels cost {recomputed}")]
    Integrity {
        task_id: u64,
        claimed: u64,
        recomputed: u64,
    },
}

impl RemoteError {
    /// Failures that indicate the worker or link, not the task itself.
    pub fn is_worker_fault(&self) -> bool {
        !matches!(
            self,
            RemoteError::Status {
                status: status::ADMISSION | status::CAPACITY_OUT_OF_RANGE,
                ..
            }
        )
    }

    fn from_io(e: io::Error, timeout: Duration) -> Self {
        match e.kind() {
            io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock => RemoteError::Timeout(timeout),
            _ => RemoteError::Transport(e),
        }
    }

    fn from_wire(e: WireError, timeout: Duration) -> Self {
        match e {
            WireError::Io(io) => RemoteError::from_io(io, timeout),
            other => RemoteError::Wire(other),
        }
    }
}

/// One connection to a worker. Requests may be pipelined: call
/// [`Connection::send`] several times before collecting responses.
pub struct Connection {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    timeout: Duration,
}

impl Connection {
    pub fn connect(endpoint: &str, timeout: Duration) -> Result<Self, RemoteError> {
        let addrs: Vec<_> = endpoint
            .to_socket_addrs()
            .map_err(RemoteError::Transport)?
            .collect();
        let mut last = io::Error::new(io::ErrorKind::AddrNotAvailable, format!("{endpoint} did not resolve"));
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, timeout) {
                Ok(stream) => {
                    let to = |e| RemoteError::from_io(e, timeout);
                    stream.set_nodelay(true).map_err(to)?;
                    stream.set_read_timeout(Some(timeout)).map_err(to)?;
                    stream.set_write_timeout(Some(timeout)).map_err(to)?;
                    let reader = BufReader::new(stream.try_clone().map_err(to)?);
                    return Ok(Connection {
                        reader,
                        writer: BufWriter::new(stream),
                        timeout,
                    });
                }
                Err(e) => last = e,
            }
        }
        Err(RemoteError::from_io(last, timeout))
    }

    pub fn send(&mut self, req: &WireRequest) -> Result<(), RemoteError> {
        self.send_raw(&encode_request(req))
    }

    /// Writes pre-encoded bytes as-is.
    pub fn send_raw(&mut self, frame: &[u8]) -> Result<(), RemoteError> {
        let timeout = self.timeout;
        self.writer
            .write_all(frame)
            .and_then(|_| self.writer.flush())
            .map_err(|e| RemoteError::from_io(e, timeout))
    }

    pub fn recv(&mut self) -> Result<WireResponse, RemoteError> {
        let timeout = self.timeout;
        let body = read_frame(&mut self.reader)
            .map_err(|e| RemoteError::from_wire(e, timeout))?
            .ok_or_else(|| {
                RemoteError::Transport(io::Error::new(
                    io::ErrorKind::UnexpectedEof,
                    "worker closed the connection",
                ))
            })?;
        decode_response_body(&body).map_err(RemoteError::Wire)
    }
}

/// Checks a response against the request it answers and recomputes the cut
/// cost of the returned labels.
pub fn accept_response(req: &WireRequest, resp: &WireResponse) -> Result<CutResult, RemoteError> {
    if resp.task_id != req.task_id {
        return Err(RemoteError::TaskMismatch {
            expected: req.task_id,
            got: resp.task_id,
        });
    }
    if resp.status != status::OK {
        return Err(RemoteError::Status {
            task_id: resp.task_id,
            status: resp.status,
        });
    }
    let labels = unpack_bits(&resp.bitmap, req.graph.len()).map_err(RemoteError::Wire)?;
    let recomputed = cut_cost(&req.graph, &labels).expect("labels sized from the request graph");
    if recomputed != resp.flow {
        return Err(RemoteError::Integrity {
            task_id: req.task_id,
            claimed: resp.flow,
            recomputed,
        });
    }
    Ok(CutResult {
        flow: resp.flow,
        labels,
    })
}

/// Solves `req` on the worker at `endpoint` over a fresh connection.
pub fn call_remote(endpoint: &str, req: &WireRequest, timeout: Duration) -> Result<CutResult, RemoteError> {
    let mut conn = Connection::connect(endpoint, timeout)?;
    conn.send(req)?;
    let resp = conn.recv()?;
    accept_response(req, &resp)
}
