//! Simulated-clock backends. Durations are integer ticks.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{FifoDispatcher, ScheduleEntry, TaskSchedule};

/// Task `i` on worker `i mod n`, each class run back to back in index order.
pub fn simulate_static(durations: &[u64], workers: usize) -> TaskSchedule {
    assert!(workers >= 1, "at least one worker");
    let mut clock = vec![0u64; workers];
    let entries = durations
        .iter()
        .enumerate()
        .map(|(task, &d)| {
            let worker = task % workers;
            let start = clock[worker];
            clock[worker] += d;
            ScheduleEntry {
                task,
                worker,
                start,
                finish: start + d,
            }
        })
        .collect();
    TaskSchedule { entries }
}

/// FIFO dispatch on a virtual clock. All completions at an instant are
/// processed (in dispatch order) before any new dispatch at that instant.
pub fn simulate_dynamic(durations: &[u64], slots: &[usize]) -> TaskSchedule {
    assert!(!slots.is_empty() && slots.iter().all(|&s| s >= 1), "every worker needs a slot");
    let mut fifo = FifoDispatcher::new(durations.len(), slots);
    let mut events: BinaryHeap<Reverse<(u64, u64, usize, usize)>> = BinaryHeap::new();
    let mut entries: Vec<Option<ScheduleEntry>> = vec![None; durations.len()];
    let mut now = 0u64;
    let mut seq = 0u64;

    loop {
        while let Some((task, worker)) = fifo.next_assignment() {
            let finish = now + durations[task];
            entries[task] = Some(ScheduleEntry {
                task,
                worker,
                start: now,
                finish,
            });
            events.push(Reverse((finish, seq, task, worker)));
            seq += 1;
        }
        let Some(Reverse((t, _, task, worker))) = events.pop() else {
            break;
        };
        now = t;
        fifo.complete(task, worker);
        while let Some(Reverse((t2, _, task, worker))) = events.peek().copied() {
            if t2 != now {
                break;
            }
            events.pop();
            fifo.complete(task, worker);
        }
    }
    debug_assert!(fifo.is_done());
    TaskSchedule {
        entries: entries.into_iter().map(|e| e.expect("every task dispatched")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_vs_dynamic_example() {
        let d = [3, 1, 3, 1];
        let s = simulate_static(&d, 2);
        assert_eq!(s.makespan(), 6);
        assert_eq!(s.loads(2), vec![6, 2]);
        let y = simulate_dynamic(&d, &[1, 1]);
        assert_eq!(y.makespan(), 4);
        let on: Vec<usize> = y.entries.iter().map(|e| e.worker).collect();
        assert_eq!(on, vec![0, 1, 1, 0]);
        assert_eq!(y.loads(2), vec![4, 4]);
    }

    #[test]
    fn one_worker_policies_coincide() {
        let d = [4, 2, 7, 1, 1];
        let s = simulate_static(&d, 1);
        assert_eq!(s.makespan(), 15);
        assert_eq!(simulate_dynamic(&d, &[1]), s);
    }

    #[test]
    fn slots_allow_overlap() {
        let y = simulate_dynamic(&[5, 5, 5, 5], &[2]);
        assert_eq!(y.makespan(), 10);
        assert!(y.validate(4, &[2]).is_ok());
        assert!(y.validate(4, &[1]).is_err());
    }

    #[test]
    fn empty_batch() {
        assert_eq!(simulate_dynamic(&[], &[1, 1]).makespan(), 0);
        assert_eq!(simulate_static(&[], 3).makespan(), 0);
    }
}
