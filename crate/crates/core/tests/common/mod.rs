//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use superflow::graph::{cut_cost, Dir, GridGraph};
use superflow::parametric::SeedProblem;

/// Random grid, every capacity uniform in `0..=max_cap`.
pub fn random_grid<R: Rng>(rng: &mut R, max_w: usize, max_h: usize, max_cap: i32) -> GridGraph {
    let (w, h) = (rng.gen_range(1..=max_w), rng.gen_range(1..=max_h));
    random_grid_sized(rng, w, h, max_cap)
}

pub fn random_grid_sized<R: Rng>(rng: &mut R, w: usize, h: usize, max_cap: i32) -> GridGraph {
    let mut g = GridGraph::zeros(w, h);
    for v in 0..g.len() {
        g.src_cap[v] = rng.gen_range(0..=max_cap);
        g.snk_cap[v] = rng.gen_range(0..=max_cap);
        for dir in Dir::ALL {
            if g.neighbor(v, dir).is_some() {
                g.set_edge(v, dir, rng.gen_range(0..=max_cap));
            }
        }
    }
    g
}

/// Minimum cut cost over every labelling, and the lexicographically
/// smallest-by-size minimal mask set (the intersection of all minimum cuts).
pub fn brute_force_min_cut(g: &GridGraph) -> (u64, Vec<bool>) {
    let n = g.len();
    assert!(n <= 16, "brute force only for tiny grids");
    let mut best = u64::MAX;
    let mut minimal: Option<Vec<bool>> = None;
    for mask in 0u32..(1 << n) {
        let labels: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let c = cut_cost(g, &labels).unwrap();
        if c < best {
            best = c;
            minimal = Some(labels);
        } else if c == best {
            let m = minimal.as_mut().unwrap();
            for (a, b) in m.iter_mut().zip(&labels) {
                *a &= *b;
            }
        }
    }
    (best, minimal.unwrap())
}

/// A problem whose source capacity grows with lambda and whose sink side is
/// fixed, with seeds somewhere on the grid.
pub fn random_monotone_problem<R: Rng>(rng: &mut R, w: usize, h: usize) -> SeedProblem {
    let n = w * h;
    let mut p = SeedProblem::zeros(w, h);
    let probe = GridGraph::zeros(w, h);
    for v in 0..n {
        p.unary_base[v] = rng.gen_range(0..=20);
        p.unary_slope[v] = rng.gen_range(0..=3);
        p.sink_base[v] = rng.gen_range(0..=400);
        for dir in Dir::ALL {
            if probe.neighbor(v, dir).is_some() {
                p.pairwise[v][dir.index()] = rng.gen_range(0..=30);
            }
        }
    }
    let fg = rng.gen_range(0..n);
    p.fg_seeds = BTreeSet::from([fg]);
    let bg: BTreeSet<usize> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..n)).filter(|&v| v != fg).collect();
    p.bg_seeds = bg;
    p
}

pub fn is_subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}
