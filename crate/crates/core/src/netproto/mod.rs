//! Binary worker protocol: frame codec, multi-threaded worker service, client
//! calls with end-to-end integrity checks, and a virtual-time pipelining model.

pub mod client;
pub mod paced;
pub mod server;
pub mod wire;

pub use client::{accept_response, call_remote, Connection, RemoteError, DEFAULT_TIMEOUT};
pub use paced::{simulate_paced, PacedParams, PacedTimeline};
pub use server::{pushrelabel_solver, ServerConfig, ServerHandle, Solver, WorkerServer};
pub use wire::{
    decode_request, decode_response, encode_request, encode_response, ErrorClass, WireError, WireRequest,
    WireResponse, WireSegment,
};
