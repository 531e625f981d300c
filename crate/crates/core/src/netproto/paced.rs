//! Virtual-time model of a client pipelining requests to one worker over a
//! paced link.
//!
//! The uplink carries one request at a time and each takes `transfer` ticks.
//! The worker reads a request only while it has fewer than `max_concurrent`
//! outstanding on the connection, solves on `solver_slots` devices for
//! `solve` ticks each, and the downlink returns one response at a time in
//! `reply` ticks. Everything is integer ticks, so timelines are exact.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacedParams {
    pub transfer: u64,
    pub solve: u64,
    pub reply: u64,
    pub requests: usize,
    pub max_concurrent: usize,
    pub solver_slots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RequestTimeline {
    pub upload_start: u64,
    pub received: u64,
    pub solve_start: u64,
    pub solve_end: u64,
    pub completed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PacedTimeline {
    pub requests: Vec<RequestTimeline>,
}

impl PacedTimeline {
    pub fn total(&self) -> u64 {
        self.requests.iter().map(|r| r.completed).max().unwrap_or(0)
    }
}

pub fn simulate_paced(p: PacedParams) -> PacedTimeline {
    let window = p.max_concurrent.max(1);
    let mut solvers = vec![0u64; p.solver_slots.max(1)];
    let mut uplink_free = 0u64;
    let mut downlink_free = 0u64;
    let mut out: Vec<RequestTimeline> = Vec::with_capacity(p.requests);

    for i in 0..p.requests {
        // The window opens once request i - window has been answered.
        let window_open = if i >= window { out[i - window].completed } else { 0 };
        let upload_start = uplink_free.max(window_open);
        let received = upload_start + p.transfer;
        uplink_free = received;

        let (slot, &free_at) = solvers
            .iter()
            .enumerate()
            .min_by_key(|&(idx, &t)| (t, idx))
            .unwrap();
        let solve_start = received.max(free_at);
        let solve_end = solve_start + p.solve;
        solvers[slot] = solve_end;

        let completed = solve_end.max(downlink_free) + p.reply;
        downlink_free = completed;
        out.push(RequestTimeline {
            upload_start,
            received,
            solve_start,
            solve_end,
            completed,
        });
    }
    PacedTimeline { requests: out }
}
