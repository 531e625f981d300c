//! Supergraphs: several grid graphs knitted side by side into one.
//!
//! Constituents are laid out left to right, separated by a single bridge
//! column whose pixels carry no capacity at all. The composite therefore
//! stays a rectangular [`GridGraph`] any grid solver accepts, and its min cut
//! restricted to each segment is a min cut of that constituent.
//!
//! Constituents may be stored s-t swapped (terminals exchanged, edges
//! reversed). [`split`] undoes that by complementing the segment's labels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AdmissionError, CutResult, Dir, GridGraph};
use crate::parametric::{InstantiateError, LambdaSchedule, SeedProblem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupergraphError {
    #[error("a supergraph needs at least one constituent")]
    Empty,
    #[error("constituent {index} has height {actual}, expected {expected} (padding disabled)")]
    HeightMismatch {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("problem {index} is {actual:?}, expected {expected:?}")]
    DimensionMismatch {
        index: usize,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("layout describes a {expected:?} composite, got {actual:?}")]
    LayoutMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error(transparent)]
    Instantiate(#[from] InstantiateError),
    #[error("composite rejected: {0}")]
    Admission(#[from] AdmissionError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    /// Caller-assigned constituent id.
    pub id: usize,
    /// First composite column of the segment.
    pub offset: usize,
    pub width: usize,
    /// Constituent height before padding.
    pub rows: usize,
    pub swapped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupergraphLayout {
    pub segments: Vec<Segment>,
    pub bridge_columns: Vec<usize>,
    /// Common (padded) height.
    pub height: usize,
}

impl SupergraphLayout {
    pub fn width(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.width)
    }

    /// Per-pixel mask of the composite marking swapped segments, for
    /// [`crate::maxflow::maxflow_pushrelabel_oriented`].
    pub fn orientation(&self) -> Vec<bool> {
        let width = self.width();
        let mut row = vec![false; width];
        for seg in self.segments.iter().filter(|s| s.swapped) {
            row[seg.offset..seg.offset + seg.width].fill(true);
        }
        row.repeat(self.height)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// One graph to knit, with its id and whether it is already swapped.
pub struct Part<'a> {
    pub id: usize,
    pub graph: &'a GridGraph,
    pub swapped: bool,
}

/// Knits `parts` left to right. Shorter constituents are padded with
/// zero-capacity rows when `pad_heights` is set.
pub fn knit(parts: &[Part<'_>], pad_heights: bool) -> Result<(GridGraph, SupergraphLayout), SupergraphError> {
    let first = parts.first().ok_or(SupergraphError::Empty)?;
    let height = parts.iter().map(|p| p.graph.height).max().unwrap_or(0);
    if !pad_heights {
        if let Some((index, p)) = parts.iter().enumerate().find(|(_, p)| p.graph.height != first.graph.height) {
            return Err(SupergraphError::HeightMismatch {
                index,
                expected: first.graph.height,
                actual: p.graph.height,
            });
        }
    }
    for p in parts {
        p.graph.check()?;
    }

    let width = parts.iter().map(|p| p.graph.width).sum::<usize>() + parts.len() - 1;
    let mut composite = GridGraph::zeros(width, height);
    let mut segments = Vec::with_capacity(parts.len());
    let mut bridge_columns = Vec::with_capacity(parts.len() - 1);
    let mut offset = 0;
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            bridge_columns.push(offset);
            offset += 1;
        }
        let g = p.graph;
        for y in 0..g.height {
            for x in 0..g.width {
                let src = g.index(x, y);
                let dst = composite.index(offset + x, y);
                composite.src_cap[dst] = g.src_cap[src];
                composite.snk_cap[dst] = g.snk_cap[src];
                composite.nbr_cap[dst] = g.nbr_cap[src];
            }
        }
        segments.push(Segment {
            id: p.id,
            offset,
            width: g.width,
            rows: g.height,
            swapped: p.swapped,
        });
        offset += g.width;
    }

    let layout = SupergraphLayout {
        segments,
        bridge_columns,
        height,
    };
    Ok((composite.admit()?, layout))
}

/// Joins plain graphs; constituent `i` gets id `i`.
pub fn join(graphs: &[GridGraph], pad_heights: bool) -> Result<(GridGraph, SupergraphLayout), SupergraphError> {
    let parts: Vec<Part<'_>> = graphs
        .iter()
        .enumerate()
        .map(|(id, graph)| Part {
            id,
            graph,
            swapped: false,
        })
        .collect();
    knit(&parts, pad_heights)
}

/// Decodes a composite cut into one cut per segment, in layout order.
///
/// Each segment's flow is the composite cut cost restricted to its columns;
/// labels of swapped segments are complemented and padding rows dropped.
pub fn split(
    layout: &SupergraphLayout,
    composite: &GridGraph,
    cut: &CutResult,
) -> Result<Vec<CutResult>, SupergraphError> {
    let expected = (layout.width(), layout.height);
    let actual = (composite.width, composite.height);
    if expected != actual || cut.labels.len() != composite.len() {
        return Err(SupergraphError::LayoutMismatch {
            expected,
            actual: if expected != actual {
                actual
            } else {
                (cut.labels.len(), 1)
            },
        });
    }

    let labels = &cut.labels;
    let mut out = Vec::with_capacity(layout.segments.len());
    for seg in &layout.segments {
        let mut flow: u64 = 0;
        for y in 0..layout.height {
            for x in seg.offset..seg.offset + seg.width {
                let v = composite.index(x, y);
                if labels[v] {
                    flow += composite.snk_cap[v] as u64;
                    for dir in Dir::ALL {
                        if let Some(u) = composite.neighbor(v, dir) {
                            if !labels[u] {
                                flow += composite.nbr_cap[v][dir.index()] as u64;
                            }
                        }
                    }
                } else {
                    flow += composite.src_cap[v] as u64;
                }
            }
        }
        let mut seg_labels = Vec::with_capacity(seg.width * seg.rows);
        for y in 0..seg.rows {
            for x in seg.offset..seg.offset + seg.width {
                seg_labels.push(labels[composite.index(x, y)] != seg.swapped);
            }
        }
        out.push(CutResult {
            flow,
            labels: seg_labels,
        });
    }
    Ok(out)
}

/// Counts behind the swap heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SwapDiagnostics {
    /// Pixels with `src_cap < snk_cap`.
    pub negative: usize,
    /// Pixels with `src_cap > snk_cap`.
    pub positive: usize,
    pub negative_sum: u64,
    pub positive_sum: u64,
}

impl SwapDiagnostics {
    pub fn should_swap(&self) -> bool {
        self.negative > self.positive
    }
}

pub fn swap_diagnostics(g: &GridGraph) -> SwapDiagnostics {
    let mut d = SwapDiagnostics::default();
    for (&s, &t) in g.src_cap.iter().zip(&g.snk_cap) {
        let diff = s as i64 - t as i64;
        if diff < 0 {
            d.negative += 1;
            d.negative_sum += diff.unsigned_abs();
        } else if diff > 0 {
            d.positive += 1;
            d.positive_sum += diff as u64;
        }
    }
    d
}

/// Swap iff strictly more pixels lean toward the sink than toward the source.
pub fn swap_decision(g: &GridGraph) -> bool {
    swap_diagnostics(g).should_swap()
}

/// Exchanges source and sink and reverses every neighbour edge.
pub fn apply_swap(g: &GridGraph) -> GridGraph {
    let mut out = GridGraph::zeros(g.width, g.height);
    out.src_cap.clone_from(&g.snk_cap);
    out.snk_cap.clone_from(&g.src_cap);
    for v in 0..g.len() {
        for dir in Dir::ALL {
            if let Some(u) = g.neighbor(v, dir) {
                out.nbr_cap[v][dir.index()] = g.nbr_cap[u][dir.opposite().index()];
            }
        }
    }
    out
}

/// Swap decision for a whole lambda family, taken on the mid-schedule graph.
pub fn lambda_swap_decision(p: &SeedProblem, schedule: &LambdaSchedule) -> Result<bool, SupergraphError> {
    let mid = schedule.values()[schedule.mid_index()];
    Ok(swap_decision(&p.instantiate(mid)?))
}

fn lambda_graphs(p: &SeedProblem, schedule: &LambdaSchedule, swap: bool) -> Result<Vec<GridGraph>, SupergraphError> {
    schedule
        .values()
        .iter()
        .map(|&lambda| {
            let g = p.instantiate(lambda)?;
            Ok(if swap { apply_swap(&g) } else { g })
        })
        .collect()
}

/// One constituent per lambda, all swapped iff `swap`. Constituent ids are
/// schedule indices.
pub fn build_lambda_supergraph(
    p: &SeedProblem,
    schedule: &LambdaSchedule,
    swap: bool,
) -> Result<(GridGraph, SupergraphLayout), SupergraphError> {
    let graphs = lambda_graphs(p, schedule, swap)?;
    let parts: Vec<Part<'_>> = graphs
        .iter()
        .enumerate()
        .map(|(id, graph)| Part { id, graph, swapped: swap })
        .collect();
    knit(&parts, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapMode {
    /// Decide per problem with [`lambda_swap_decision`].
    #[default]
    Heuristic,
    Never,
}

/// Knits the lambda supergraphs of several problems, each independently
/// swap-decided. Constituent `(problem i, lambda j)` gets id `i * n + j`
/// where `n` is the schedule length.
pub fn build_seed_supergraph(
    problems: &[SeedProblem],
    schedule: &LambdaSchedule,
    mode: SwapMode,
) -> Result<(GridGraph, SupergraphLayout), SupergraphError> {
    let first = problems.first().ok_or(SupergraphError::Empty)?;
    let dims = (first.width, first.height);
    let mut graphs = Vec::with_capacity(problems.len() * schedule.len());
    let mut flags = Vec::with_capacity(problems.len());
    for (index, p) in problems.iter().enumerate() {
        if (p.width, p.height) != dims {
            return Err(SupergraphError::DimensionMismatch {
                index,
                expected: dims,
                actual: (p.width, p.height),
            });
        }
        let swap = match mode {
            SwapMode::Heuristic => lambda_swap_decision(p, schedule)?,
            SwapMode::Never => false,
        };
        flags.push(swap);
        graphs.extend(lambda_graphs(p, schedule, swap)?);
    }
    let n = schedule.len();
    let parts: Vec<Part<'_>> = graphs
        .iter()
        .enumerate()
        .map(|(id, graph)| Part {
            id,
            graph,
            swapped: flags[id / n],
        })
        .collect();
    knit(&parts, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cut_cost;
    use crate::maxflow::{maxflow_pushrelabel, maxflow_reference};

    fn terminal_only(src: i32, snk: i32) -> GridGraph {
        let mut g = GridGraph::zeros(1, 1);
        g.src_cap = vec![src];
        g.snk_cap = vec![snk];
        g
    }

    fn two_pixel() -> GridGraph {
        let mut g = GridGraph::zeros(2, 1);
        g.src_cap = vec![5, 0];
        g.snk_cap = vec![0, 3];
        g.set_edge(0, Dir::Right, 2);
        g.set_edge(1, Dir::Left, 2);
        g
    }

    #[test]
    fn single_constituent_is_identity() {
        let g = two_pixel();
        let (c, layout) = join(std::slice::from_ref(&g), false).unwrap();
        assert_eq!(c, g);
        assert!(layout.bridge_columns.is_empty());
        assert_eq!(
            layout.segments,
            vec![Segment {
                id: 0,
                offset: 0,
                width: 2,
                rows: 1,
                swapped: false
            }]
        );
        let cut = maxflow_pushrelabel(&c).unwrap();
        assert_eq!(split(&layout, &c, &cut).unwrap(), vec![cut]);
    }

    #[test]
    fn two_terminal_pixels_decompose() {
        let graphs = [terminal_only(4, 1), terminal_only(2, 7)];
        let (c, layout) = join(&graphs, false).unwrap();
        assert_eq!((c.width, c.height), (3, 1));
        assert_eq!(layout.bridge_columns, vec![1]);
        let cut = maxflow_pushrelabel(&c).unwrap();
        assert_eq!(cut.flow, 3);
        let parts = split(&layout, &c, &cut).unwrap();
        assert_eq!(parts.iter().map(|p| p.flow).collect::<Vec<_>>(), vec![1, 2]);
        for (p, g) in parts.iter().zip(&graphs) {
            assert_eq!(p, &maxflow_reference(g).unwrap());
        }
    }

    #[test]
    fn bridge_pixels_carry_nothing() {
        let (c, layout) = join(&[two_pixel(), two_pixel(), two_pixel()], false).unwrap();
        for &col in &layout.bridge_columns {
            for y in 0..c.height {
                let v = c.index(col, y);
                assert_eq!((c.src_cap[v], c.snk_cap[v], c.nbr_cap[v]), (0, 0, [0; 4]));
            }
        }
    }

    #[test]
    fn height_padding() {
        let tall = GridGraph::zeros(1, 3);
        let mut short = two_pixel();
        assert!(matches!(
            join(&[tall.clone(), short.clone()], false),
            Err(SupergraphError::HeightMismatch { index: 1, .. })
        ));
        short.src_cap[1] = 1;
        let (c, layout) = join(&[tall, short.clone()], true).unwrap();
        assert_eq!((c.width, c.height), (4, 3));
        let cut = maxflow_pushrelabel(&c).unwrap();
        let parts = split(&layout, &c, &cut).unwrap();
        assert_eq!(parts[1], maxflow_reference(&short).unwrap());
        assert_eq!(parts[0].labels.len(), 3);
    }

    #[test]
    fn empty_join_rejected() {
        assert_eq!(join(&[], false).unwrap_err(), SupergraphError::Empty);
    }

    #[test]
    fn split_rejects_wrong_composite() {
        let (c, layout) = join(&[two_pixel(), two_pixel()], false).unwrap();
        let cut = maxflow_pushrelabel(&two_pixel()).unwrap();
        assert!(matches!(
            split(&layout, &two_pixel(), &cut),
            Err(SupergraphError::LayoutMismatch { .. })
        ));
        assert!(matches!(
            split(&layout, &c, &cut),
            Err(SupergraphError::LayoutMismatch { .. })
        ));
    }

    #[test]
    fn swapped_segment_labels_are_complemented() {
        let g = two_pixel();
        let swapped = apply_swap(&g);
        let (c, layout) = knit(
            &[Part {
                id: 7,
                graph: &swapped,
                swapped: true,
            }],
            false,
        )
        .unwrap();
        let cut = maxflow_pushrelabel(&c).unwrap();
        let parts = split(&layout, &c, &cut).unwrap();
        let complement: Vec<bool> = cut.labels.iter().map(|l| !l).collect();
        assert_eq!(parts[0].labels, complement);
        assert_eq!(parts[0].flow, 2);
        assert_eq!(cut_cost(&g, &parts[0].labels).unwrap(), 2);
    }

    #[test]
    fn oriented_solve_keeps_swapped_labels_canonical() {
        // a tie: both labellings of the middle pixel cost 3
        let tie = terminal_only(3, 3);
        let plain = two_pixel();
        let swapped = apply_swap(&tie);
        let (c, layout) = knit(
            &[
                Part { id: 0, graph: &plain, swapped: false },
                Part { id: 1, graph: &swapped, swapped: true },
            ],
            true,
        )
        .unwrap();
        let naive = split(&layout, &c, &maxflow_pushrelabel(&c).unwrap()).unwrap();
        assert_eq!(naive[1].labels, vec![true]);

        let cut = crate::maxflow::maxflow_pushrelabel_oriented(&c, &layout.orientation()).unwrap();
        assert_eq!(cut.flow, 5);
        let parts = split(&layout, &c, &cut).unwrap();
        assert_eq!(parts[0], maxflow_reference(&plain).unwrap());
        assert_eq!(parts[1], maxflow_reference(&tie).unwrap());
    }

    #[test]
    fn swap_decision_examples() {
        assert!(!swap_decision(&two_pixel()));
        let mut g = GridGraph::zeros(3, 1);
        g.src_cap = vec![0, 0, 4];
        g.snk_cap = vec![2, 3, 0];
        assert!(swap_decision(&g));
        let d = swap_diagnostics(&g);
        assert_eq!((d.negative, d.positive, d.negative_sum, d.positive_sum), (2, 1, 5, 4));
        assert!(!swap_decision(&GridGraph::zeros(4, 4)));
    }

    #[test]
    fn swap_is_an_involution_with_fixed_points() {
        let g = two_pixel();
        let s = apply_swap(&g);
        assert_eq!(s.src_cap, vec![0, 3]);
        assert_eq!(s.snk_cap, vec![5, 0]);
        assert_eq!(apply_swap(&s), g);
        assert_eq!(maxflow_reference(&s).unwrap().flow, 2);

        let mut sym = GridGraph::zeros(2, 2);
        sym.src_cap = vec![3, 1, 4, 1];
        sym.snk_cap = vec![3, 1, 4, 1];
        for v in 0..4 {
            for dir in Dir::ALL {
                if sym.neighbor(v, dir).is_some() {
                    sym.set_edge(v, dir, 2);
                }
            }
        }
        assert_eq!(apply_swap(&sym), sym);
    }

    fn small_problem() -> SeedProblem {
        let mut p = SeedProblem::zeros(3, 2);
        p.unary_slope = vec![1, 1, 2, 0, 1, 1];
        p.sink_base = vec![0, 20, 40, 5, 30, 60];
        for v in 0..6 {
            for dir in Dir::ALL {
                let x = v % 3;
                let y = v / 3;
                let ok = match dir {
                    Dir::Left => x > 0,
                    Dir::Right => x < 2,
                    Dir::Up => y > 0,
                    Dir::Down => y < 1,
                };
                if ok {
                    p.pairwise[v][dir.index()] = 3;
                }
            }
        }
        p.fg_seeds.insert(0);
        p.bg_seeds.insert(5);
        p
    }

    #[test]
    fn lambda_supergraph_layout_arithmetic() {
        let p = small_problem();
        let s = LambdaSchedule::default_20();
        let (c, layout) = build_lambda_supergraph(&p, &s, false).unwrap();
        assert_eq!(c.width, 20 * 3 + 19);
        assert_eq!(layout.bridge_columns.len(), 19);
        let one = LambdaSchedule::new(vec![12]).unwrap();
        let (c1, _) = build_lambda_supergraph(&p, &one, true).unwrap();
        assert_eq!(c1, apply_swap(&p.instantiate(12).unwrap()));
    }

    #[test]
    fn lambda_supergraph_matches_sequential() {
        let p = small_problem();
        let s = LambdaSchedule::default_10();
        let seq = crate::parametric::solve_schedule_sequential(&p, &s).unwrap();
        for swap in [false, true] {
            let (c, layout) = build_lambda_supergraph(&p, &s, swap).unwrap();
            let parts = split(&layout, &c, &maxflow_pushrelabel(&c).unwrap()).unwrap();
            for (j, part) in parts.iter().enumerate() {
                assert_eq!(part.flow, seq.cuts[j].flow);
                assert_eq!(p.energy(s.values()[j], &part.labels).unwrap(), part.flow);
                if !swap {
                    assert_eq!(part.labels, seq.cuts[j].labels);
                }
            }
        }
    }

    #[test]
    fn seed_supergraph_single_problem_matches_lambda_supergraph() {
        let p = small_problem();
        let s = LambdaSchedule::default_10();
        let swap = lambda_swap_decision(&p, &s).unwrap();
        assert_eq!(
            build_seed_supergraph(std::slice::from_ref(&p), &s, SwapMode::Heuristic).unwrap(),
            build_lambda_supergraph(&p, &s, swap).unwrap()
        );
    }

    #[test]
    fn seed_supergraph_rejects_mixed_dimensions() {
        let s = LambdaSchedule::default_10();
        let err = build_seed_supergraph(&[small_problem(), SeedProblem::zeros(2, 2)], &s, SwapMode::Never);
        assert!(matches!(err, Err(SupergraphError::DimensionMismatch { index: 1, .. })));
    }
}
