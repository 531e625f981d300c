//! Four-connected grid graphs with per-pixel terminal capacities.
//!
//! Every pixel `v` has an edge from the source (`src_cap[v]`), an edge to the
//! sink (`snk_cap[v]`) and up to four directed edges to its neighbours
//! (`nbr_cap[v][dir]`). Capacities are stored as `i32` so that wire frames and
//! hand-built inputs can carry out-of-range values into [`GridGraph::admit`],
//! which is the single gate every solver goes through.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Capacity scalar as stored in the graph and on the wire.
pub type Cap = i32;

/// Surrogate for an infinite capacity, used to clamp seed pixels.
pub const CAP_MAX: Cap = 1 << 30;

/// Upper bound on the sum of all capacities of an admitted graph.
pub const TOTAL_CAP_LIMIT: u64 = 1 << 62;

/// Neighbour directions, in the fixed scan order used by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    Left = 0,
    Right = 1,
    Up = 2,
    Down = 3,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Left, Dir::Right, Dir::Up, Dir::Down];

    pub fn opposite(self) -> Dir {
        match self {
            Dir::Left => Dir::Right,
            Dir::Right => Dir::Left,
            Dir::Up => Dir::Down,
            Dir::Down => Dir::Up,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Which capacity array a rejected value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapField {
    Source,
    Sink,
    Neighbor(Dir),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdmissionError {
    #[error("grid must have at least one pixel (got {width}x{height})")]
    EmptyGrid { width: usize, height: usize },
    #[error("capacity array {field} has {actual} entries, expected {expected}")]
    SizeMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("negative capacity {value} at pixel {pixel} ({field:?})")]
    NegativeCapacity {
        pixel: usize,
        field: CapField,
        value: Cap,
    },
    #[error("capacity {value} at pixel {pixel} ({field:?}) exceeds CAP_MAX")]
    CapacityTooLarge {
        pixel: usize,
        field: CapField,
        value: Cap,
    },
    #[error("pixel {pixel} has nonzero capacity {value} toward the image border ({dir:?})")]
    BorderEdge { pixel: usize, dir: Dir, value: Cap },
    #[error("capacity sums risk overflow: finite sum {finite_sum}, total {total_sum}")]
    OverflowRisk { finite_sum: u64, total_sum: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("label mask has {actual} entries, graph has {expected} pixels")]
pub struct MaskSizeMismatch {
    pub expected: usize,
    pub actual: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridGraph {
    pub width: usize,
    pub height: usize,
    pub src_cap: Vec<Cap>,
    pub snk_cap: Vec<Cap>,
    /// Indexed by pixel, then by [`Dir::index`].
    pub nbr_cap: Vec<[Cap; 4]>,
}

impl GridGraph {
    /// An all-zero graph of the given size.
    pub fn zeros(width: usize, height: usize) -> Self {
        let n = width * height;
        GridGraph {
            width,
            height,
            src_cap: vec![0; n],
            snk_cap: vec![0; n],
            nbr_cap: vec![[0; 4]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Neighbour of `v` in direction `dir`, or `None` at the border.
    #[inline]
    pub fn neighbor(&self, v: usize, dir: Dir) -> Option<usize> {
        let (x, y) = (v % self.width, v / self.width);
        match dir {
            Dir::Left if x > 0 => Some(v - 1),
            Dir::Right if x + 1 < self.width => Some(v + 1),
            Dir::Up if y > 0 => Some(v - self.width),
            Dir::Down if y + 1 < self.height => Some(v + self.width),
            _ => None,
        }
    }

    /// Sets the directed capacity `v -> neighbor(v, dir)`.
    ///
    /// Panics if there is no neighbour in that direction.
    pub fn set_edge(&mut self, v: usize, dir: Dir, cap: Cap) {
        assert!(
            self.neighbor(v, dir).is_some(),
            "pixel {v} has no neighbour {dir:?}"
        );
        self.nbr_cap[v][dir.index()] = cap;
    }

    /// Verifies every structural and numeric invariant, returning the graph
    /// unchanged on success.
    pub fn admit(self) -> Result<GridGraph, AdmissionError> {
        self.check()?;
        Ok(self)
    }

    /// Borrowing form of [`GridGraph::admit`].
    pub fn check(&self) -> Result<(), AdmissionError> {
        if self.width == 0 || self.height == 0 {
            return Err(AdmissionError::EmptyGrid {
                width: self.width,
                height: self.height,
            });
        }
        let n = self.len();
        for (field, actual) in [
            ("src_cap", self.src_cap.len()),
            ("snk_cap", self.snk_cap.len()),
            ("nbr_cap", self.nbr_cap.len()),
        ] {
            if actual != n {
                return Err(AdmissionError::SizeMismatch {
                    field,
                    expected: n,
                    actual,
                });
            }
        }

        let mut finite_sum: u64 = 0;
        let mut total_sum: u64 = 0;
        let mut account = |pixel: usize, field: CapField, value: Cap| {
            if value < 0 {
                return Err(AdmissionError::NegativeCapacity {
                    pixel,
                    field,
                    value,
                });
            }
            if value > CAP_MAX {
                return Err(AdmissionError::CapacityTooLarge {
                    pixel,
                    field,
                    value,
                });
            }
            total_sum += value as u64;
            if value < CAP_MAX {
                finite_sum += value as u64;
            }
            Ok(())
        };

        for v in 0..n {
            account(v, CapField::Source, self.src_cap[v])?;
            account(v, CapField::Sink, self.snk_cap[v])?;
            for dir in Dir::ALL {
                let value = self.nbr_cap[v][dir.index()];
                account(v, CapField::Neighbor(dir), value)?;
                if value != 0 && self.neighbor(v, dir).is_none() {
                    return Err(AdmissionError::BorderEdge {
                        pixel: v,
                        dir,
                        value,
                    });
                }
            }
        }

        if finite_sum >= CAP_MAX as u64 || total_sum >= TOTAL_CAP_LIMIT {
            return Err(AdmissionError::OverflowRisk {
                finite_sum,
                total_sum,
            });
        }
        Ok(())
    }

    /// Sum of all source capacities.
    pub fn total_src(&self) -> u64 {
        self.src_cap.iter().map(|&c| c.max(0) as u64).sum()
    }

    /// Sum of all sink capacities.
    pub fn total_snk(&self) -> u64 {
        self.snk_cap.iter().map(|&c| c.max(0) as u64).sum()
    }
}

/// Result of a max-flow solve.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutResult {
    /// Max-flow value, equal to the min-cut cost.
    pub flow: u64,
    /// `true` for pixels on the source (foreground) side.
    pub labels: Vec<bool>,
}

impl CutResult {
    pub fn foreground_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

/// Cost of the s-t cut induced by `labels` (`true` = source side).
pub fn cut_cost(g: &GridGraph, labels: &[bool]) -> Result<u64, MaskSizeMismatch> {
    if labels.len() != g.len() {
        return Err(MaskSizeMismatch {
            expected: g.len(),
            actual: labels.len(),
        });
    }
    let mut cost: u64 = 0;
    for v in 0..g.len() {
        if labels[v] {
            cost += g.snk_cap[v].max(0) as u64;
            for dir in Dir::ALL {
                if let Some(u) = g.neighbor(v, dir) {
                    if !labels[u] {
                        cost += g.nbr_cap[v][dir.index()].max(0) as u64;
                    }
                }
            }
        } else {
            cost += g.src_cap[v].max(0) as u64;
        }
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pixel() -> GridGraph {
        let mut g = GridGraph::zeros(2, 1);
        g.src_cap = vec![5, 0];
        g.snk_cap = vec![0, 3];
        g.set_edge(0, Dir::Right, 2);
        g.set_edge(1, Dir::Left, 2);
        g
    }

    #[test]
    fn neighbors_respect_border() {
        let g = GridGraph::zeros(3, 2);
        assert_eq!(g.neighbor(0, Dir::Left), None);
        assert_eq!(g.neighbor(0, Dir::Up), None);
        assert_eq!(g.neighbor(0, Dir::Right), Some(1));
        assert_eq!(g.neighbor(0, Dir::Down), Some(3));
        assert_eq!(g.neighbor(5, Dir::Right), None);
        assert_eq!(g.neighbor(5, Dir::Down), None);
        assert_eq!(g.neighbor(4, Dir::Up), Some(1));
    }

    #[test]
    fn admit_accepts_valid_graph_unchanged() {
        let g = two_pixel();
        assert_eq!(g.clone().admit().unwrap(), g);
    }

    #[test]
    fn admit_rejects_border_edge() {
        let mut g = two_pixel();
        g.nbr_cap[0][Dir::Left.index()] = 1;
        assert!(matches!(
            g.admit(),
            Err(AdmissionError::BorderEdge {
                pixel: 0,
                dir: Dir::Left,
                value: 1
            })
        ));
    }

    #[test]
    fn admit_rejects_negative_capacity() {
        let mut g = two_pixel();
        g.snk_cap[1] = -1;
        assert!(matches!(
            g.admit(),
            Err(AdmissionError::NegativeCapacity {
                pixel: 1,
                field: CapField::Sink,
                value: -1
            })
        ));
    }

    #[test]
    fn admit_rejects_overflow_risk_and_oversize() {
        let mut g = GridGraph::zeros(2, 1);
        g.src_cap = vec![CAP_MAX - 1, 1];
        assert!(matches!(
            g.clone().admit(),
            Err(AdmissionError::OverflowRisk { .. })
        ));
        g.src_cap = vec![CAP_MAX, 1];
        assert!(g.clone().admit().is_ok());
        g.src_cap = vec![CAP_MAX + 1, 0];
        assert!(matches!(
            g.admit(),
            Err(AdmissionError::CapacityTooLarge { .. })
        ));
    }

    #[test]
    fn admit_rejects_empty_and_ragged() {
        assert!(matches!(
            GridGraph::zeros(0, 3).admit(),
            Err(AdmissionError::EmptyGrid { .. })
        ));
        let mut g = GridGraph::zeros(2, 2);
        g.snk_cap.pop();
        assert!(matches!(
            g.admit(),
            Err(AdmissionError::SizeMismatch { field: "snk_cap", .. })
        ));
    }

    #[test]
    fn cut_cost_examples() {
        let g = two_pixel();
        assert_eq!(cut_cost(&g, &[false, false]).unwrap(), 5);
        assert_eq!(cut_cost(&g, &[true, true]).unwrap(), 3);
        assert_eq!(cut_cost(&g, &[true, false]).unwrap(), 2);
        // p1 source side, p0 sink side: src[p0] + snk[p1] + nbr(p1->p0)
        assert_eq!(cut_cost(&g, &[false, true]).unwrap(), 5 + 3 + 2);
        assert_eq!(
            cut_cost(&g, &[true]),
            Err(MaskSizeMismatch {
                expected: 2,
                actual: 1
            })
        );
    }
}
