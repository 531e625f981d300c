//! Shortest-augmenting-path (Edmonds-Karp) oracle.
//!
//! Deliberately naive and kept separate from the push-relabel engine: it owns
//! its residual bookkeeping and reads the canonical cut off its final failed
//! BFS instead of calling [`super::extract_canonical_cut`]. Intended for
//! graphs up to roughly 10^4 pixels.

use std::collections::VecDeque;

use super::SolveError;
use crate::graph::{CutResult, Dir, GridGraph};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Parent {
    Unseen,
    Source,
    Pixel(usize, Dir),
}

pub fn maxflow_reference(g: &GridGraph) -> Result<CutResult, SolveError> {
    g.check()?;
    let n = g.len();
    let mut src: Vec<i64> = g.src_cap.iter().map(|&c| c as i64).collect();
    let mut snk: Vec<i64> = g.snk_cap.iter().map(|&c| c as i64).collect();
    let mut nbr: Vec<[i64; 4]> = g
        .nbr_cap
        .iter()
        .map(|a| [a[0] as i64, a[1] as i64, a[2] as i64, a[3] as i64])
        .collect();
    let mut flow: u64 = 0;
    let mut parent = vec![Parent::Unseen; n];

    loop {
        parent.fill(Parent::Unseen);
        let mut queue = VecDeque::new();
        for v in 0..n {
            if src[v] > 0 {
                parent[v] = Parent::Source;
                queue.push_back(v);
            }
        }
        let mut end = None;
        while let Some(v) = queue.pop_front() {
            if snk[v] > 0 {
                end = Some(v);
                break;
            }
            for dir in Dir::ALL {
                if let Some(u) = g.neighbor(v, dir) {
                    if parent[u] == Parent::Unseen && nbr[v][dir.index()] > 0 {
                        parent[u] = Parent::Pixel(v, dir);
                        queue.push_back(u);
                    }
                }
            }
        }

        let Some(last) = end else {
            let labels = parent.iter().map(|p| *p != Parent::Unseen).collect();
            return Ok(CutResult { flow, labels });
        };

        let mut bottleneck = snk[last];
        let mut v = last;
        loop {
            match parent[v] {
                Parent::Source => {
                    bottleneck = bottleneck.min(src[v]);
                    break;
                }
                Parent::Pixel(p, dir) => {
                    bottleneck = bottleneck.min(nbr[p][dir.index()]);
                    v = p;
                }
                Parent::Unseen => unreachable!("augmenting path broken at pixel {v}"),
            }
        }

        snk[last] -= bottleneck;
        let mut v = last;
        loop {
            match parent[v] {
                Parent::Source => {
                    src[v] -= bottleneck;
                    break;
                }
                Parent::Pixel(p, dir) => {
                    nbr[p][dir.index()] -= bottleneck;
                    nbr[v][dir.opposite().index()] += bottleneck;
                    v = p;
                }
                Parent::Unseen => unreachable!(),
            }
        }
        flow += bottleneck as u64;
    }
}
