//! Wall-clock backends. Schedule times are nanoseconds since the batch start.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;
use std::time::Instant;

use super::fifo::FailureAction;
use super::{
    check_workers, BatchOutcome, ExecError, Executor, FifoDispatcher, SchedError, ScheduleEntry, Task, TaskSchedule,
    WorkerHandle,
};
use crate::graph::CutResult;

fn nanos(since: Instant) -> u64 {
    since.elapsed().as_nanos() as u64
}

/// Task `i` on worker `i mod n`, one thread per worker. The first failure
/// stops every worker after its current task and the batch fails with the
/// lowest failing task index.
pub fn run_static<E: Executor>(tasks: &[Task], workers: &[WorkerHandle], exec: &E) -> Result<BatchOutcome, SchedError> {
    check_workers(workers)?;
    let n = workers.len();
    let t0 = Instant::now();
    let abort = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<(CutResult, ScheduleEntry)>>> = Mutex::new(vec![None; tasks.len()]);
    let failures: Mutex<Vec<(usize, usize, ExecError)>> = Mutex::new(Vec::new());

    thread::scope(|s| {
        for (w, worker) in workers.iter().enumerate() {
            let (abort, slots, failures) = (&abort, &slots, &failures);
            s.spawn(move || {
                for task in (w..tasks.len()).step_by(n) {
                    if abort.load(Ordering::SeqCst) {
                        return;
                    }
                    let start = nanos(t0);
                    let out = exec.execute(worker, &tasks[task]);
                    let finish = nanos(t0);
                    match out {
                        Ok(cut) => {
                            let entry = ScheduleEntry {
                                task,
                                worker: w,
                                start,
                                finish,
                            };
                            slots.lock().unwrap()[task] = Some((cut, entry));
                        }
                        Err(e) => {
                            log::warn!("task {task} failed on worker {w}: {e}");
                            abort.store(true, Ordering::SeqCst);
                            failures.lock().unwrap().push((task, w, e));
                            return;
                        }
                    }
                }
            });
        }
    });

    let mut failures = failures.into_inner().unwrap();
    if !failures.is_empty() {
        failures.sort_by_key(|f| f.0);
        let (task, worker, source) = failures.swap_remove(0);
        return Err(SchedError::TaskFailed { task, worker, source });
    }
    Ok(collect(slots.into_inner().unwrap()))
}

fn collect(done: Vec<Option<(CutResult, ScheduleEntry)>>) -> BatchOutcome {
    let (cuts, entries) = done.into_iter().map(|d| d.expect("every task completed")).unzip();
    (cuts, TaskSchedule { entries })
}

struct Done {
    task: usize,
    worker: usize,
    start: u64,
    finish: u64,
    out: Result<CutResult, ExecError>,
}

/// FIFO dispatch of free worker slots. A worker whose task fails is
/// retired and the task re-dispatched once; a second failure, or a failure
/// that no worker could avoid, aborts the batch after in-flight tasks drain.
pub fn run_dynamic<E: Executor>(tasks: &[Task], workers: &[WorkerHandle], exec: &E) -> Result<BatchOutcome, SchedError> {
    check_workers(workers)?;
    let slots: Vec<usize> = workers.iter().map(|w| w.slots).collect();
    let mut fifo = FifoDispatcher::new(tasks.len(), &slots);
    let mut done: Vec<Option<(CutResult, ScheduleEntry)>> = vec![None; tasks.len()];
    let t0 = Instant::now();
    let (tx, rx) = mpsc::channel::<Done>();

    thread::scope(|s| {
        let mut error: Option<SchedError> = None;
        loop {
            if error.is_none() {
                while let Some((task, worker)) = fifo.next_assignment() {
                    let tx = tx.clone();
                    let handle = &workers[worker];
                    s.spawn(move || {
                        let start = nanos(t0);
                        let out = exec.execute(handle, &tasks[task]);
                        let finish = nanos(t0);
                        let _ = tx.send(Done {
                            task,
                            worker,
                            start,
                            finish,
                            out,
                        });
                    });
                }
                if fifo.is_stalled() {
                    error = Some(SchedError::AllWorkersFailed {
                        pending: fifo.pending(),
                    });
                }
            }
            if fifo.in_flight() == 0 {
                break;
            }
            let d = rx.recv().expect("sender held by the coordinator");
            match d.out {
                Ok(cut) => {
                    fifo.complete(d.task, d.worker);
                    let entry = ScheduleEntry {
                        task: d.task,
                        worker: d.worker,
                        start: d.start,
                        finish: d.finish,
                    };
                    done[d.task] = Some((cut, entry));
                }
                Err(e) => {
                    log::warn!("task {} failed on worker {}: {e}", d.task, d.worker);
                    if !e.is_worker_fault() {
                        fifo.complete(d.task, d.worker);
                        error.get_or_insert(SchedError::TaskFailed {
                            task: d.task,
                            worker: d.worker,
                            source: e,
                        });
                    } else if fifo.fail(d.task, d.worker) == FailureAction::Abort {
                        error.get_or_insert(SchedError::RetryExhausted {
                            task: d.task,
                            worker: d.worker,
                            source: e,
                        });
                    }
                }
            }
        }
        match error {
            Some(e) => Err(e),
            None => Ok(collect(std::mem::take(&mut done))),
        }
    })
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::AtomicUsize;
    use std::sync::Arc;
    use std::time::Duration;

    use super::*;
    use crate::graph::GridGraph;
    use crate::maxflow::SolveError;
    use crate::netproto::RemoteError;
    use crate::scheduler::TaskPayload;
    use crate::supergraph::join;

    fn tasks(n: usize) -> Vec<Task> {
        (0..n)
            .map(|i| {
                let mut g = GridGraph::zeros(2, 1);
                g.src_cap[0] = i as i32 + 1;
                g.snk_cap[1] = 3;
                g.set_edge(0, crate::graph::Dir::Right, 2);
                let (graph, layout) = join(&[g], false).unwrap();
                Task {
                    id: i as u64,
                    payload: Arc::new(TaskPayload { graph, layout }),
                    duration: None,
                }
            })
            .collect()
    }

    struct Flaky {
        bad_worker: usize,
        sleep: Duration,
        calls: AtomicUsize,
    }

    impl Executor for Flaky {
        fn execute(&self, w: &WorkerHandle, t: &Task) -> Result<CutResult, ExecError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            thread::sleep(self.sleep);
            if w.id == self.bad_worker {
                return Err(ExecError::Remote(RemoteError::Timeout(Duration::ZERO)));
            }
            Ok(crate::maxflow::maxflow_pushrelabel(&t.payload.graph)?)
        }
    }

    fn workers(n: usize) -> Vec<WorkerHandle> {
        (0..n).map(WorkerHandle::local).collect()
    }

    #[test]
    fn both_backends_solve_every_task() {
        let ts = tasks(7);
        let exec = super::super::SolverExecutor::default();
        let (a, sa) = run_static(&ts, &workers(3), &exec).unwrap();
        let (b, sb) = run_dynamic(&ts, &workers(3), &exec).unwrap();
        assert_eq!(a, b);
        for (i, c) in a.iter().enumerate() {
            assert_eq!(c.flow, (i as u64 + 1).min(2));
        }
        assert!(sa.validate(7, &[1, 1, 1]).is_ok());
        assert!(sb.validate(7, &[1, 1, 1]).is_ok());
        assert!(sa.entries.iter().all(|e| e.worker == e.task % 3));
    }

    #[test]
    fn dynamic_retires_failed_worker_and_recovers() {
        let ts = tasks(6);
        let exec = Flaky {
            bad_worker: 1,
            sleep: Duration::from_millis(2),
            calls: AtomicUsize::new(0),
        };
        let (cuts, sched) = run_dynamic(&ts, &workers(3), &exec).unwrap();
        assert_eq!(cuts.len(), 6);
        assert!(sched.entries.iter().all(|e| e.worker != 1));
        assert_eq!(exec.calls.load(Ordering::SeqCst), 7);
    }

    #[test]
    fn dynamic_aborts_on_second_failure() {
        let exec = Flaky {
            bad_worker: 0,
            sleep: Duration::ZERO,
            calls: AtomicUsize::new(0),
        };
        let err = run_dynamic(&tasks(3), &workers(1), &exec).unwrap_err();
        assert!(matches!(err, SchedError::AllWorkersFailed { pending: 3 }), "{err}");
    }

    #[test]
    fn static_aborts_with_failing_task() {
        let exec = Flaky {
            bad_worker: 1,
            sleep: Duration::ZERO,
            calls: AtomicUsize::new(0),
        };
        let err = run_static(&tasks(4), &workers(2), &exec).unwrap_err();
        assert!(matches!(err, SchedError::TaskFailed { task: 1, worker: 1, .. }), "{err}");
    }

    #[test]
    fn task_level_errors_do_not_retire_workers() {
        struct Bad;
        impl Executor for Bad {
            fn execute(&self, _: &WorkerHandle, _: &Task) -> Result<CutResult, ExecError> {
                Err(SolveError::ResidualShape { width: 0, height: 0 }.into())
            }
        }
        let err = run_dynamic(&tasks(2), &workers(2), &Bad).unwrap_err();
        assert!(matches!(err, SchedError::TaskFailed { .. }));
    }

    #[test]
    fn rejects_empty_or_slotless_workers() {
        let exec = super::super::SolverExecutor::default();
        assert!(matches!(run_dynamic(&tasks(1), &[], &exec), Err(SchedError::NoWorkers)));
        let mut w = workers(1);
        w[0].slots = 0;
        assert!(matches!(run_static(&tasks(1), &w, &exec), Err(SchedError::ZeroSlots { worker: 0 })));
    }
}
