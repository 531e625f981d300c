//! Dispatch of supergraph cut tasks to local and remote workers.
//!
//! Three policies:
//!
//! * static: task `i` runs on worker `i mod n`, each worker working through
//!   its class sequentially in index order;
//! * dynamic: a FIFO list of free worker slots; each task goes to the head,
//!   and a slot rejoins the tail when its task completes. Dispatch blocks
//!   while the list is empty;
//! * LPT (offline only): durations known up front, sorted non-increasing,
//!   each placed on the least-loaded machine.
//!
//! Static and dynamic run either for real ([`run_static`], [`run_dynamic`])
//! or on a simulated clock with supplied durations ([`simulate_static`],
//! [`simulate_dynamic`]). Both dynamic backends share [`FifoDispatcher`].

mod exec;
mod fifo;
mod lpt;
mod realtime;
mod sim;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CutResult, GridGraph};
use crate::supergraph::SupergraphLayout;

pub use exec::{ExecError, Executor, SolverExecutor};
pub use fifo::FifoDispatcher;
pub use lpt::{lpt_offline, makespan_report, MakespanReport, PolicyMakespan, PolicyRatio};
pub use realtime::{run_dynamic, run_static};
pub use sim::{simulate_dynamic, simulate_static};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskPayload {
    pub graph: GridGraph,
    pub layout: SupergraphLayout,
}

#[derive(Debug, Clone)]
pub struct Task {
    pub id: u64,
    pub payload: Arc<TaskPayload>,
    /// Known duration, for offline LPT and simulation.
    pub duration: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WorkerKind {
    Local,
    Remote { endpoint: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerHandle {
    pub id: usize,
    #[serde(flatten)]
    pub kind: WorkerKind,
    /// Tasks this worker may run at once.
    pub slots: usize,
}

impl WorkerHandle {
    pub fn local(id: usize) -> Self {
        WorkerHandle {
            id,
            kind: WorkerKind::Local,
            slots: 1,
        }
    }

    pub fn remote(id: usize, endpoint: impl Into<String>, slots: usize) -> Self {
        WorkerHandle {
            id,
            kind: WorkerKind::Remote {
                endpoint: endpoint.into(),
            },
            slots,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    /// Index of the task in the batch.
    pub task: usize,
    pub worker: usize,
    pub start: u64,
    pub finish: u64,
}

/// Where and when each task ran. Times are simulated ticks or wall-clock
/// nanoseconds since the batch started.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TaskSchedule {
    /// One entry per task, ordered by task index.
    pub entries: Vec<ScheduleEntry>,
}

impl TaskSchedule {
    pub fn makespan(&self) -> u64 {
        self.entries.iter().map(|e| e.finish).max().unwrap_or(0)
    }

    /// Total busy time per worker.
    pub fn loads(&self, workers: usize) -> Vec<u64> {
        let mut loads = vec![0; workers];
        for e in &self.entries {
            loads[e.worker] += e.finish - e.start;
        }
        loads
    }

    /// Checks that every task appears exactly once and no worker exceeds its
    /// slot count at any instant.
    pub fn validate(&self, tasks: usize, slots: &[usize]) -> Result<(), String> {
        let mut seen = vec![false; tasks];
        for e in &self.entries {
            if e.task >= tasks || std::mem::replace(&mut seen[e.task], true) {
                return Err(format!("task {} missing or repeated", e.task));
            }
            if e.worker >= slots.len() {
                return Err(format!("task {} on unknown worker {}", e.task, e.worker));
            }
            if e.finish < e.start {
                return Err(format!("task {} finishes before it starts", e.task));
            }
        }
        if let Some(t) = seen.iter().position(|s| !s) {
            return Err(format!("task {t} never scheduled"));
        }
        for (w, &cap) in slots.iter().enumerate() {
            let mut events: Vec<(u64, i32)> = self
                .entries
                .iter()
                .filter(|e| e.worker == w && e.finish > e.start)
                .flat_map(|e| [(e.start, 1), (e.finish, -1)])
                .collect();
            // ends sort before starts at equal times
            events.sort();
            let mut running = 0i32;
            for (_, delta) in events {
                running += delta;
                if running > cap as i32 {
                    return Err(format!("worker {w} exceeds {cap} slots"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SchedError {
    #[error("no workers configured")]
    NoWorkers,
    #[error("worker {worker} has zero slots")]
    ZeroSlots { worker: usize },
    #[error("task {task} failed on worker {worker}: {source}")]
    TaskFailed {
        task: usize,
        worker: usize,
        source: ExecError,
    },
    #[error("task {task} failed twice, last on worker {worker}: {source}")]
    RetryExhausted {
        task: usize,
        worker: usize,
        source: ExecError,
    },
    #[error("all workers failed with {pending} tasks outstanding")]
    AllWorkersFailed { pending: usize },
}

pub(crate) fn check_workers(workers: &[WorkerHandle]) -> Result<(), SchedError> {
    if workers.is_empty() {
        return Err(SchedError::NoWorkers);
    }
    if let Some(w) = workers.iter().position(|w| w.slots == 0) {
        return Err(SchedError::ZeroSlots { worker: w });
    }
    Ok(())
}

/// Results aligned with the input task order.
pub type BatchOutcome = (Vec<CutResult>, TaskSchedule);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_catches_slot_overrun_and_duplicates() {
        let ok = TaskSchedule {
            entries: vec![
                ScheduleEntry { task: 0, worker: 0, start: 0, finish: 3 },
                ScheduleEntry { task: 1, worker: 0, start: 3, finish: 4 },
            ],
        };
        assert!(ok.validate(2, &[1]).is_ok());
        assert_eq!(ok.makespan(), 4);
        assert_eq!(ok.loads(1), vec![4]);

        let overlap = TaskSchedule {
            entries: vec![
                ScheduleEntry { task: 0, worker: 0, start: 0, finish: 3 },
                ScheduleEntry { task: 1, worker: 0, start: 2, finish: 4 },
            ],
        };
        assert!(overlap.validate(2, &[1]).is_err());
        assert!(overlap.validate(2, &[2]).is_ok());

        let dup = TaskSchedule {
            entries: vec![
                ScheduleEntry { task: 0, worker: 0, start: 0, finish: 1 },
                ScheduleEntry { task: 0, worker: 0, start: 1, finish: 2 },
            ],
        };
        assert!(dup.validate(2, &[1]).is_err());
    }

    #[test]
    fn worker_handle_serde_shape() {
        let w = WorkerHandle::remote(3, "127.0.0.1:7000", 2);
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"{"id":3,"kind":"remote","endpoint":"127.0.0.1:7000","slots":2}"#);
        assert_eq!(serde_json::from_str::<WorkerHandle>(&json).unwrap(), w);
    }
}
