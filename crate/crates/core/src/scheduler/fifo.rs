use std::collections::VecDeque;

/// Bookkeeping of the dynamic policy, shared by the simulated and real-time
/// backends.
///
/// The available list holds one entry per free slot. Initially slot 0 of
/// every worker is queued in id order, then slot 1 of every worker with two
/// or more slots, and so on. A failed worker is removed for good and its
/// task goes back to the front of the pending queue, once.
#[derive(Debug, Clone)]
pub struct FifoDispatcher {
    available: VecDeque<usize>,
    pending: VecDeque<usize>,
    attempts: Vec<u8>,
    dead: Vec<bool>,
    in_flight: usize,
    completed: usize,
}

/// What to do after a task failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureAction {
    Redispatch,
    Abort,
}

impl FifoDispatcher {
    pub fn new(tasks: usize, slots: &[usize]) -> Self {
        let mut available = VecDeque::new();
        let max_slots = slots.iter().copied().max().unwrap_or(0);
        for round in 0..max_slots {
            for (w, &s) in slots.iter().enumerate() {
                if s > round {
                    available.push_back(w);
                }
            }
        }
        FifoDispatcher {
            available,
            pending: (0..tasks).collect(),
            attempts: vec![0; tasks],
            dead: vec![false; slots.len()],
            in_flight: 0,
            completed: 0,
        }
    }

    /// Pops the next (task, worker) pair, or `None` if either queue is empty.
    pub fn next_assignment(&mut self) -> Option<(usize, usize)> {
        if self.pending.is_empty() {
            return None;
        }
        let worker = loop {
            let w = self.available.pop_front()?;
            if !self.dead[w] {
                break w;
            }
        };
        let task = self.pending.pop_front().expect("checked non-empty");
        self.attempts[task] += 1;
        self.in_flight += 1;
        Some((task, worker))
    }

    pub fn complete(&mut self, _task: usize, worker: usize) {
        self.in_flight -= 1;
        self.completed += 1;
        if !self.dead[worker] {
            self.available.push_back(worker);
        }
    }

    pub fn fail(&mut self, task: usize, worker: usize) -> FailureAction {
        self.in_flight -= 1;
        self.dead[worker] = true;
        self.available.retain(|&w| w != worker);
        if self.attempts[task] >= 2 {
            FailureAction::Abort
        } else {
            self.pending.push_front(task);
            FailureAction::Redispatch
        }
    }

    pub fn is_done(&self) -> bool {
        self.pending.is_empty() && self.in_flight == 0
    }

    /// Work remains but nothing is running and no live worker is free.
    pub fn is_stalled(&self) -> bool {
        !self.pending.is_empty() && self.in_flight == 0 && self.available.iter().all(|&w| self.dead[w])
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn completed(&self) -> usize {
        self.completed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_interleave_round_robin() {
        let mut d = FifoDispatcher::new(5, &[2, 1, 3]);
        let order: Vec<usize> = std::iter::from_fn(|| d.next_assignment().map(|(_, w)| w)).collect();
        assert_eq!(order, vec![0, 1, 2, 0, 2]);
    }

    #[test]
    fn completion_requeues_at_tail() {
        let mut d = FifoDispatcher::new(4, &[1, 1]);
        assert_eq!(d.next_assignment(), Some((0, 0)));
        assert_eq!(d.next_assignment(), Some((1, 1)));
        assert_eq!(d.next_assignment(), None);
        d.complete(1, 1);
        assert_eq!(d.next_assignment(), Some((2, 1)));
        d.complete(0, 0);
        assert_eq!(d.next_assignment(), Some((3, 0)));
        d.complete(2, 1);
        d.complete(3, 0);
        assert!(d.is_done());
    }

    #[test]
    fn single_retry_then_abort() {
        let mut d = FifoDispatcher::new(1, &[1, 1, 1]);
        assert_eq!(d.next_assignment(), Some((0, 0)));
        assert_eq!(d.fail(0, 0), FailureAction::Redispatch);
        assert_eq!(d.next_assignment(), Some((0, 1)));
        assert_eq!(d.fail(0, 1), FailureAction::Abort);
    }

    #[test]
    fn dead_workers_never_return() {
        let mut d = FifoDispatcher::new(2, &[1]);
        let (t, w) = d.next_assignment().unwrap();
        d.fail(t, w);
        assert_eq!(d.next_assignment(), None);
        assert!(d.is_stalled());
    }
}
