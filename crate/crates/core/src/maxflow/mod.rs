//! Max-flow solvers over [`GridGraph`] and canonical cut extraction.
//!
//! Both solvers return the minimal source-side minimum cut: the set of
//! pixels reachable from the source in the residual graph of a maximum flow.
//! That set is unique, so the two solvers agree label-for-label.
//!
//! [`maxflow_pushrelabel_oriented`] can instead give selected pixels the
//! maximal source-side labelling (everything that cannot reach the sink).
//! On an s-t swapped graph that is exactly the complement of the original
//! graph's minimal cut, which keeps decoded labels canonical.

mod pushrelabel;
mod reference;

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{AdmissionError, Cap, Dir, GridGraph};

pub use pushrelabel::{maxflow_pushrelabel, maxflow_pushrelabel_oriented};
pub use reference::maxflow_reference;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("graph rejected: {0}")]
    Admission(#[from] AdmissionError),
    #[error("residual state does not match a {width}x{height} graph")]
    ResidualShape { width: usize, height: usize },
    #[error("residual state is not a flow: pixel {pixel} has excess {excess}")]
    NotAFlow { pixel: usize, excess: i64 },
    #[error("flow is not maximal: pixel {pixel} still has residual capacity to the sink")]
    NotMaximal { pixel: usize },
    #[error("orientation mask has {actual} entries for {expected} pixels")]
    OrientationShape { expected: usize, actual: usize },
}

/// Residual capacities of a flow on a grid graph.
///
/// `src_res[v]` is the residual of `s -> v`; the reverse residual `v -> s`
/// equals the flow already sent, `src_cap[v] - src_res[v]`. Likewise for
/// `snk_res`. Neighbour arcs are stored pairwise: pushing `d` units along
/// `v -> u` lowers `nbr_res[v][dir]` and raises `nbr_res[u][dir.opposite()]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualState {
    pub src_res: Vec<i64>,
    pub snk_res: Vec<i64>,
    pub nbr_res: Vec<[i64; 4]>,
}

impl ResidualState {
    /// Residual state of the zero flow.
    pub fn zero_flow(g: &GridGraph) -> Self {
        let widen = |c: &Cap| *c as i64;
        ResidualState {
            src_res: g.src_cap.iter().map(widen).collect(),
            snk_res: g.snk_cap.iter().map(widen).collect(),
            nbr_res: g
                .nbr_cap
                .iter()
                .map(|a| [a[0] as i64, a[1] as i64, a[2] as i64, a[3] as i64])
                .collect(),
        }
    }

    /// Total flow into the sink.
    pub fn flow_value(&self, g: &GridGraph) -> u64 {
        g.snk_cap
            .iter()
            .zip(&self.snk_res)
            .map(|(&c, &r)| (c as i64 - r) as u64)
            .sum()
    }

    fn excess(&self, g: &GridGraph, v: usize) -> i64 {
        let inflow = g.src_cap[v] as i64 - self.src_res[v];
        let outflow = g.snk_cap[v] as i64 - self.snk_res[v];
        let net_nbr: i64 = Dir::ALL
            .iter()
            .map(|d| g.nbr_cap[v][d.index()] as i64 - self.nbr_res[v][d.index()])
            .sum();
        inflow - outflow - net_nbr
    }
}

/// Marks exactly the pixels reachable from the source in the residual graph.
///
/// The residual must describe a maximum flow: conservation is checked at
/// every pixel, and reaching a pixel with leftover sink capacity means an
/// augmenting path still exists.
pub fn extract_canonical_cut(
    g: &GridGraph,
    residual: &ResidualState,
) -> Result<Vec<bool>, SolveError> {
    let n = g.len();
    if residual.src_res.len() != n || residual.snk_res.len() != n || residual.nbr_res.len() != n
    {
        return Err(SolveError::ResidualShape {
            width: g.width,
            height: g.height,
        });
    }
    for v in 0..n {
        let excess = residual.excess(g, v);
        if excess != 0 {
            return Err(SolveError::NotAFlow { pixel: v, excess });
        }
    }

    let reached_init: Vec<bool> = residual.src_res.iter().map(|&r| r > 0).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| reached_init[v]).collect();
    let mut reached = reached_init;
    while let Some(v) = queue.pop_front() {
        if residual.snk_res[v] > 0 {
            return Err(SolveError::NotMaximal { pixel: v });
        }
        for dir in Dir::ALL {
            if let Some(u) = g.neighbor(v, dir) {
                if !reached[u] && residual.nbr_res[v][dir.index()] > 0 {
                    reached[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    Ok(reached)
}

/// Like [`extract_canonical_cut`], except pixels with `maximal[v]` set are
/// labelled source-side iff they cannot reach the sink in the residual graph.
///
/// Mixing the two labellings is only a minimum cut when marked and unmarked
/// pixels lie in components with no edges between them, as in the segments
/// of a supergraph.
pub fn extract_oriented_cut(
    g: &GridGraph,
    residual: &ResidualState,
    maximal: &[bool],
) -> Result<Vec<bool>, SolveError> {
    if maximal.len() != g.len() {
        return Err(SolveError::OrientationShape {
            expected: g.len(),
            actual: maximal.len(),
        });
    }
    let mut labels = extract_canonical_cut(g, residual)?;
    if !maximal.contains(&true) {
        return Ok(labels);
    }

    let n = g.len();
    let mut to_sink: Vec<bool> = residual.snk_res.iter().map(|&r| r > 0).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| to_sink[v]).collect();
    while let Some(v) = queue.pop_front() {
        for dir in Dir::ALL {
            if let Some(u) = g.neighbor(v, dir) {
                if !to_sink[u] && residual.nbr_res[u][dir.opposite().index()] > 0 {
                    to_sink[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    for ((label, &flip), &reach) in labels.iter_mut().zip(maximal).zip(&to_sink) {
        if flip {
            *label = !reach;
        }
    }
    Ok(labels)
}


#[cfg(test)]
mod tests {
    use super::fixtures::two_pixel;
    use super::*;
    use crate::graph::CAP_MAX;

    #[test]
    fn zero_capacity_graph_has_empty_foreground() {
        let g = GridGraph::zeros(3, 2);
        let r = ResidualState::zero_flow(&g);
        assert_eq!(extract_canonical_cut(&g, &r).unwrap(), vec![false; 6]);
    }

    #[test]
    fn zero_flow_on_path_graph_is_not_maximal() {
        let g = two_pixel();
        let r = ResidualState::zero_flow(&g);
        assert!(matches!(
            extract_canonical_cut(&g, &r),
            Err(SolveError::NotMaximal { .. })
        ));
    }

    #[test]
    fn hand_augmented_two_pixel_cut() {
        let g = two_pixel();
        let mut r = ResidualState::zero_flow(&g);
        // s -> p0 -> p1 -> t, 2 units
        r.src_res[0] -= 2;
        r.nbr_res[0][Dir::Right.index()] -= 2;
        r.nbr_res[1][Dir::Left.index()] += 2;
        r.snk_res[1] -= 2;
        assert_eq!(r.flow_value(&g), 2);
        assert_eq!(extract_canonical_cut(&g, &r).unwrap(), vec![true, false]);
    }

    #[test]
    fn preflow_with_excess_is_rejected() {
        let g = two_pixel();
        let mut r = ResidualState::zero_flow(&g);
        r.src_res[0] = 0;
        assert!(matches!(
            extract_canonical_cut(&g, &r),
            Err(SolveError::NotAFlow { pixel: 0, excess: 5 })
        ));
    }

    #[test]
    fn seed_pixel_is_never_severed() {
        let mut g = GridGraph::zeros(3, 1);
        g.src_cap = vec![CAP_MAX, 0, 0];
        g.snk_cap = vec![4, 1, 6];
        g.set_edge(0, Dir::Right, 3);
        g.set_edge(1, Dir::Right, 3);
        for solve in [maxflow_pushrelabel, maxflow_reference] {
            let res = solve(&g).unwrap();
            assert!(res.labels[0]);
        }
    }
}
