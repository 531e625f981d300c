//! FIFO push-relabel specialised to four-connected grids.
//!
//! Phase one computes a maximum preflow toward the sink; phase two returns
//! stranded excess to the source so the residual describes a true flow and
//! the source-reachable set is the minimal min cut. Both phases share one
//! engine, parameterised by the terminal they drain into.
//!
//! Ordering is fully deterministic: the active queue is FIFO, rebuilt in
//! pixel-index order after every global relabel, and arcs are scanned as
//! terminal, left, right, up, down.

use std::collections::VecDeque;

use super::{extract_canonical_cut, extract_oriented_cut, ResidualState, SolveError};
use crate::graph::{CutResult, Dir, GridGraph};

const DEAD: u32 = u32::MAX;

/// Arc slots per pixel: the terminal arc followed by the four directions.
const ARCS: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Sink,
    Source,
}

struct Engine<'g> {
    g: &'g GridGraph,
    res: ResidualState,
    excess: Vec<i64>,
    height: Vec<u32>,
    current: Vec<u8>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    relabels: usize,
    relabel_budget: usize,
    target: Target,
}

impl<'g> Engine<'g> {
    fn new(g: &'g GridGraph) -> Self {
        let n = g.len();
        Engine {
            g,
            res: ResidualState::zero_flow(g),
            excess: vec![0; n],
            height: vec![DEAD; n],
            current: vec![0; n],
            queue: VecDeque::new(),
            queued: vec![false; n],
            relabels: 0,
            relabel_budget: n.max(16),
            target: Target::Sink,
        }
    }

    /// Saturates every source arc and drains what can go straight to the sink.
    fn initial_preflow(&mut self) {
        for v in 0..self.g.len() {
            let supply = self.res.src_res[v];
            self.res.src_res[v] = 0;
            let direct = supply.min(self.res.snk_res[v]);
            self.res.snk_res[v] -= direct;
            self.excess[v] = supply - direct;
        }
    }

    #[inline]
    fn terminal_residual(&self, v: usize) -> i64 {
        match self.target {
            Target::Sink => self.res.snk_res[v],
            Target::Source => self.g.src_cap[v] as i64 - self.res.src_res[v],
        }
    }

    #[inline]
    fn push_terminal(&mut self, v: usize, amount: i64) {
        match self.target {
            Target::Sink => self.res.snk_res[v] -= amount,
            Target::Source => self.res.src_res[v] += amount,
        }
        self.excess[v] -= amount;
    }

    #[inline]
    fn enqueue(&mut self, v: usize) {
        if !self.queued[v] && self.height[v] != DEAD && self.excess[v] > 0 {
            self.queued[v] = true;
            self.queue.push_back(v);
        }
    }

    /// Exact distance labels to the current target by reverse BFS.
    fn global_relabel(&mut self) {
        let n = self.g.len();
        self.height.fill(DEAD);
        self.current.fill(0);
        self.relabels = 0;

        let mut bfs = VecDeque::new();
        for v in 0..n {
            if self.terminal_residual(v) > 0 {
                self.height[v] = 1;
                bfs.push_back(v);
            }
        }
        while let Some(u) = bfs.pop_front() {
            let next = self.height[u] + 1;
            for dir in Dir::ALL {
                if let Some(w) = self.g.neighbor(u, dir) {
                    // residual arc w -> u
                    if self.height[w] == DEAD && self.res.nbr_res[w][dir.opposite().index()] > 0 {
                        self.height[w] = next;
                        bfs.push_back(w);
                    }
                }
            }
        }

        self.queue.clear();
        self.queued.fill(false);
        for v in 0..n {
            self.enqueue(v);
        }
    }

    fn relabel(&mut self, v: usize) {
        let n = self.g.len() as u64;
        let mut lowest = u64::MAX;
        if self.terminal_residual(v) > 0 {
            lowest = 0;
        }
        for dir in Dir::ALL {
            if let Some(u) = self.g.neighbor(v, dir) {
                if self.res.nbr_res[v][dir.index()] > 0 && self.height[u] != DEAD {
                    lowest = lowest.min(self.height[u] as u64);
                }
            }
        }
        self.height[v] = if lowest == u64::MAX || lowest + 1 > n {
            DEAD
        } else {
            (lowest + 1) as u32
        };
        self.current[v] = 0;
        self.relabels += 1;
    }

    /// Pushes excess out of `v` until it is empty, dead, or a global relabel
    /// is due. Returns `true` when the relabel budget is exhausted.
    fn discharge(&mut self, v: usize) -> bool {
        while self.excess[v] > 0 {
            if self.current[v] == ARCS {
                self.relabel(v);
                if self.height[v] == DEAD {
                    return false;
                }
                if self.relabels >= self.relabel_budget {
                    return true;
                }
                continue;
            }
            let arc = self.current[v];
            if arc == 0 {
                let r = self.terminal_residual(v);
                if r > 0 && self.height[v] == 1 {
                    let amount = r.min(self.excess[v]);
                    self.push_terminal(v, amount);
                }
            } else {
                let dir = Dir::ALL[(arc - 1) as usize];
                if let Some(u) = self.g.neighbor(v, dir) {
                    let r = self.res.nbr_res[v][dir.index()];
                    if r > 0 && self.height[u] != DEAD && self.height[v] == self.height[u] + 1 {
                        let amount = r.min(self.excess[v]);
                        self.res.nbr_res[v][dir.index()] -= amount;
                        self.res.nbr_res[u][dir.opposite().index()] += amount;
                        self.excess[v] -= amount;
                        self.excess[u] += amount;
                        self.enqueue(u);
                    }
                }
            }
            if self.excess[v] > 0 {
                self.current[v] += 1;
            }
        }
        false
    }

    fn run(&mut self, target: Target) {
        self.target = target;
        self.global_relabel();
        while let Some(v) = self.queue.pop_front() {
            self.queued[v] = false;
            if self.height[v] == DEAD || self.excess[v] == 0 {
                continue;
            }
            if self.discharge(v) {
                self.global_relabel();
            }
        }
    }
}

/// Maximum flow and canonical minimal source-side cut by push-relabel.
pub fn maxflow_pushrelabel(g: &GridGraph) -> Result<CutResult, SolveError> {
    let flow = solve(g)?;
    let labels = extract_canonical_cut(g, &flow)?;
    Ok(CutResult {
        flow: flow.flow_value(g),
        labels,
    })
}

/// Maximum flow with the labelling of [`extract_oriented_cut`].
pub fn maxflow_pushrelabel_oriented(g: &GridGraph, maximal: &[bool]) -> Result<CutResult, SolveError> {
    let flow = solve(g)?;
    let labels = extract_oriented_cut(g, &flow, maximal)?;
    Ok(CutResult {
        flow: flow.flow_value(g),
        labels,
    })
}

fn solve(g: &GridGraph) -> Result<ResidualState, SolveError> {
    g.check()?;
    let mut engine = Engine::new(g);
    engine.initial_preflow();
    engine.run(Target::Sink);
    engine.run(Target::Source);
    Ok(engine.res)
}
