use std::time::Duration;

use thiserror::Error;

use super::{Task, WorkerHandle, WorkerKind};
use crate::graph::CutResult;
use crate::maxflow::SolveError;
use crate::netproto::{call_remote, pushrelabel_solver, RemoteError, Solver, WireRequest, DEFAULT_TIMEOUT};

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("local solve: {0}")]
    Local(#[from] SolveError),
    #[error("remote: {0}")]
    Remote(#[from] RemoteError),
}

impl ExecError {
    /// Whether the failure should retire the worker (as opposed to the task
    /// being unsolvable anywhere).
    pub fn is_worker_fault(&self) -> bool {
        match self {
            ExecError::Local(_) => false,
            ExecError::Remote(e) => e.is_worker_fault(),
        }
    }
}

/// Runs one task on one worker and returns the composite cut.
pub trait Executor: Sync {
    fn execute(&self, worker: &WorkerHandle, task: &Task) -> Result<CutResult, ExecError>;
}

/// Local workers call `solver` in-process; remote workers get a wire request
/// over a fresh connection.
#[derive(Clone)]
pub struct SolverExecutor {
    pub solver: Solver,
    pub timeout: Duration,
}

impl Default for SolverExecutor {
    fn default() -> Self {
        SolverExecutor {
            solver: pushrelabel_solver(),
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

impl Executor for SolverExecutor {
    fn execute(&self, worker: &WorkerHandle, task: &Task) -> Result<CutResult, ExecError> {
        match &worker.kind {
            WorkerKind::Local => Ok((self.solver)(&task.payload.graph, &task.payload.layout.orientation())?),
            WorkerKind::Remote { endpoint } => {
                let req = WireRequest::new(task.id, task.payload.graph.clone(), &task.payload.layout);
                Ok(call_remote(endpoint, &req, self.timeout)?)
            }
        }
    }
}
