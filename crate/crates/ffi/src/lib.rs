//! C ABI over the superflow core.
//!
//! Objects are opaque heap handles created by `sf_*_new` style functions
//! and released with the matching `sf_*_free`. Every fallible call returns
//! an [`SfStatus`]; on failure [`sf_last_error`] describes the problem for
//! the calling thread. Label masks cross the boundary as one byte per
//! pixel, row-major, non-zero meaning foreground.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use superflow::graph::{cut_cost, CutResult, Dir, GridGraph};
use superflow::harness::{overlap, OverlapError};
use superflow::maxflow::{maxflow_pushrelabel, maxflow_pushrelabel_oriented, maxflow_reference, SolveError};
use superflow::supergraph::{apply_swap, join, split, swap_decision, SupergraphLayout};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Admission = 3,
    SolverFailure = 4,
    LayoutMismatch = 5,
    BothEmpty = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfDir {
    Left = 0,
    Right = 1,
    Up = 2,
    Down = 3,
}

fn dir_from(raw: u32) -> Option<Dir> {
    Dir::ALL.get(raw as usize).copied()
}

/// A grid graph.
pub struct SfGraph {
    inner: GridGraph,
}

/// A cut: flow value plus labels.
pub struct SfCut {
    inner: CutResult,
}

/// How a composite graph splits back into its constituents.
pub struct SfLayout {
    inner: SupergraphLayout,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    let msg = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Fail(SfStatus, String);

type FfiResult = Result<(), Fail>;

fn fail<T>(status: SfStatus, msg: impl ToString) -> Result<T, Fail> {
    Err(Fail(status, msg.to_string()))
}

fn guard(f: impl FnOnce() -> FfiResult) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside superflow");
            SfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(SfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(SfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(SfStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<T>(p: *mut *mut T, value: T) -> FfiResult {
    if p.is_null() {
        return fail(SfStatus::NullPointer, "output pointer is null");
    }
    *p = Box::into_raw(Box::new(value));
    Ok(())
}

fn solve_error(e: SolveError) -> Fail {
    match e {
        SolveError::Admission(a) => Fail(SfStatus::Admission, a.to_string()),
        other => Fail(SfStatus::SolverFailure, other.to_string()),
    }
}

fn to_bools(bytes: &[u8]) -> Vec<bool> {
    bytes.iter().map(|&b| b != 0).collect()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next `sf_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a `width x height` graph with every capacity zero.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_graph_new(width: u32, height: u32, out: *mut *mut SfGraph) -> SfStatus {
    guard(|| {
        if width == 0 || height == 0 {
            return fail(SfStatus::InvalidArgument, "width and height must be positive");
        }
        let inner = GridGraph::zeros(width as usize, height as usize);
        unsafe { out_graph(out, inner) }
    })
}

unsafe fn out_graph(out: *mut *mut SfGraph, inner: GridGraph) -> FfiResult {
    self::out(out, SfGraph { inner })
}

/// Builds a graph from row-major arrays: `src` and `snk` of `width*height`
/// entries, `nbr` of `4*width*height` entries ordered left, right, up, down
/// per pixel. The graph is admitted before it is returned.
///
/// # Safety
/// Each array must hold the stated number of elements; `out` must be valid
/// for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_graph_from_arrays(
    width: u32,
    height: u32,
    src: *const i32,
    snk: *const i32,
    nbr: *const i32,
    out: *mut *mut SfGraph,
) -> SfStatus {
    guard(|| {
        if width == 0 || height == 0 {
            return fail(SfStatus::InvalidArgument, "width and height must be positive");
        }
        let n = width as usize * height as usize;
        let mut g = GridGraph::zeros(width as usize, height as usize);
        unsafe {
            g.src_cap = slice(src, n, "src")?.to_vec();
            g.snk_cap = slice(snk, n, "snk")?.to_vec();
            g.nbr_cap = slice(nbr, 4 * n, "nbr")?
                .chunks_exact(4)
                .map(|c| [c[0], c[1], c[2], c[3]])
                .collect();
        }
        let g = g.admit().map_err(|e| Fail(SfStatus::Admission, e.to_string()))?;
        unsafe { out_graph(out, g) }
    })
}

/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sf_graph_free(graph: *mut SfGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_graph_width(graph: *const SfGraph) -> u32 {
    graph.as_ref().map_or(0, |g| g.inner.width as u32)
}

/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_graph_height(graph: *const SfGraph) -> u32 {
    graph.as_ref().map_or(0, |g| g.inner.height as u32)
}

/// Sets the source and sink capacities of `pixel`.
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_graph_set_terminal(graph: *mut SfGraph, pixel: u32, src: i32, snk: i32) -> SfStatus {
    guard(|| {
        let g = unsafe { deref_mut(graph, "graph")? };
        let v = pixel as usize;
        if v >= g.inner.len() {
            return fail(SfStatus::InvalidArgument, format!("pixel {v} out of range"));
        }
        g.inner.src_cap[v] = src;
        g.inner.snk_cap[v] = snk;
        Ok(())
    })
}

/// Sets the capacity of the edge leaving `pixel` towards `dir`, one of the
/// [`SfDir`] values.
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_graph_set_edge(graph: *mut SfGraph, pixel: u32, dir: u32, cap: i32) -> SfStatus {
    guard(|| {
        let g = unsafe { deref_mut(graph, "graph")? };
        let v = pixel as usize;
        if v >= g.inner.len() {
            return fail(SfStatus::InvalidArgument, format!("pixel {v} out of range"));
        }
        let Some(dir) = dir_from(dir) else {
            return fail(SfStatus::InvalidArgument, format!("unknown direction {dir}"));
        };
        if g.inner.neighbor(v, dir).is_none() {
            return fail(SfStatus::InvalidArgument, format!("pixel {v} has no neighbour {dir:?}"));
        }
        g.inner.set_edge(v, dir, cap);
        Ok(())
    })
}

/// Maximum flow and minimal source-side cut by push-relabel.
///
/// # Safety
/// `graph` must be a live handle; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_maxflow(graph: *const SfGraph, out: *mut *mut SfCut) -> SfStatus {
    guard(|| {
        let g = unsafe { deref(graph, "graph")? };
        let inner = maxflow_pushrelabel(&g.inner).map_err(solve_error)?;
        unsafe { self::out(out, SfCut { inner }) }
    })
}

/// Same result as [`sf_maxflow`] from the augmenting-path reference solver.
///
/// # Safety
/// As for [`sf_maxflow`].
#[no_mangle]
pub unsafe extern "C" fn sf_maxflow_reference(graph: *const SfGraph, out: *mut *mut SfCut) -> SfStatus {
    guard(|| {
        let g = unsafe { deref(graph, "graph")? };
        let inner = maxflow_reference(&g.inner).map_err(solve_error)?;
        unsafe { self::out(out, SfCut { inner }) }
    })
}

/// # Safety
/// `cut` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_cut_flow(cut: *const SfCut) -> u64 {
    cut.as_ref().map_or(0, |c| c.inner.flow)
}

/// # Safety
/// `cut` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_cut_len(cut: *const SfCut) -> usize {
    cut.as_ref().map_or(0, |c| c.inner.labels.len())
}

/// Copies the labels into `labels`, which must hold exactly
/// `sf_cut_len(cut)` bytes.
///
/// # Safety
/// `cut` must be a live handle and `labels` valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sf_cut_labels(cut: *const SfCut, labels: *mut u8, len: usize) -> SfStatus {
    guard(|| {
        let c = unsafe { deref(cut, "cut")? };
        if len != c.inner.labels.len() {
            return fail(
                SfStatus::InvalidArgument,
                format!("buffer holds {len} labels, cut has {}", c.inner.labels.len()),
            );
        }
        if len > 0 && labels.is_null() {
            return fail(SfStatus::NullPointer, "labels is null");
        }
        for (i, &l) in c.inner.labels.iter().enumerate() {
            unsafe { *labels.add(i) = l as u8 };
        }
        Ok(())
    })
}

/// # Safety
/// `cut` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sf_cut_free(cut: *mut SfCut) {
    if !cut.is_null() {
        drop(Box::from_raw(cut));
    }
}

/// Cost of the cut described by `labels` (`len` must equal the pixel count).
///
/// # Safety
/// `graph` must be a live handle, `labels` valid for `len` bytes and
/// `cost` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_cut_cost(graph: *const SfGraph, labels: *const u8, len: usize, cost: *mut u64) -> SfStatus {
    guard(|| {
        let g = unsafe { deref(graph, "graph")? };
        let labels = to_bools(unsafe { slice(labels, len, "labels")? });
        let c = cut_cost(&g.inner, &labels).map_err(|e| Fail(SfStatus::InvalidArgument, e.to_string()))?;
        unsafe { *deref_mut(cost, "cost")? = c };
        Ok(())
    })
}

/// Whether the swap heuristic would exchange source and sink.
///
/// # Safety
/// `graph` must be a live handle and `swap` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_swap_decision(graph: *const SfGraph, swap: *mut bool) -> SfStatus {
    guard(|| {
        let g = unsafe { deref(graph, "graph")? };
        unsafe { *deref_mut(swap, "swap")? = swap_decision(&g.inner) };
        Ok(())
    })
}

/// A new graph with terminals exchanged and edges reversed.
///
/// # Safety
/// `graph` must be a live handle; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_apply_swap(graph: *const SfGraph, out: *mut *mut SfGraph) -> SfStatus {
    guard(|| {
        let g = unsafe { deref(graph, "graph")? };
        unsafe { out_graph(out, apply_swap(&g.inner)) }
    })
}

/// Knits `count` graphs side by side with zero bridge columns. With
/// `pad_heights` shorter graphs are padded with zero rows; otherwise all
/// heights must match. Segments are unswapped.
///
/// # Safety
/// `graphs` must point to `count` live handles; `out_graph` and
/// `out_layout` valid for writing one pointer each.
#[no_mangle]
pub unsafe extern "C" fn sf_join(
    graphs: *const *const SfGraph,
    count: usize,
    pad_heights: bool,
    out_graph: *mut *mut SfGraph,
    out_layout: *mut *mut SfLayout,
) -> SfStatus {
    guard(|| {
        let handles = unsafe { slice(graphs, count, "graphs")? };
        let mut parts = Vec::with_capacity(count);
        for (i, &h) in handles.iter().enumerate() {
            parts.push(unsafe { deref(h, &format!("graphs[{i}]"))? }.inner.clone());
        }
        let (g, layout) = join(&parts, pad_heights).map_err(|e| Fail(SfStatus::InvalidArgument, e.to_string()))?;
        if out_graph.is_null() || out_layout.is_null() {
            return fail(SfStatus::NullPointer, "output pointer is null");
        }
        unsafe {
            self::out_graph(out_graph, g)?;
            self::out(out_layout, SfLayout { inner: layout })
        }
    })
}

/// # Safety
/// `layout` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sf_layout_len(layout: *const SfLayout) -> usize {
    layout.as_ref().map_or(0, |l| l.inner.len())
}

/// # Safety
/// `layout` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sf_layout_free(layout: *mut SfLayout) {
    if !layout.is_null() {
        drop(Box::from_raw(layout));
    }
}

/// Solves a composite graph so that swapped segments decode to canonical
/// labels.
///
/// # Safety
/// Handles must be live; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_maxflow_composite(
    layout: *const SfLayout,
    composite: *const SfGraph,
    out: *mut *mut SfCut,
) -> SfStatus {
    guard(|| {
        let l = unsafe { deref(layout, "layout")? };
        let g = unsafe { deref(composite, "composite")? };
        if (l.inner.width(), l.inner.height) != (g.inner.width, g.inner.height) {
            return fail(SfStatus::LayoutMismatch, "layout does not match composite");
        }
        let inner = maxflow_pushrelabel_oriented(&g.inner, &l.inner.orientation()).map_err(solve_error)?;
        unsafe { self::out(out, SfCut { inner }) }
    })
}

/// Decodes a composite cut into one cut per segment. `cuts` must have room
/// for `sf_layout_len(layout)` handles, each released with `sf_cut_free`.
///
/// # Safety
/// Handles must be live and `cuts` valid for `len` pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_split(
    layout: *const SfLayout,
    composite: *const SfGraph,
    cut: *const SfCut,
    cuts: *mut *mut SfCut,
    len: usize,
) -> SfStatus {
    guard(|| {
        let l = unsafe { deref(layout, "layout")? };
        let g = unsafe { deref(composite, "composite")? };
        let c = unsafe { deref(cut, "cut")? };
        if len != l.inner.len() {
            return fail(
                SfStatus::InvalidArgument,
                format!("room for {len} cuts, layout has {}", l.inner.len()),
            );
        }
        if cuts.is_null() {
            return fail(SfStatus::NullPointer, "cuts is null");
        }
        let parts = split(&l.inner, &g.inner, &c.inner).map_err(|e| Fail(SfStatus::LayoutMismatch, e.to_string()))?;
        for (i, inner) in parts.into_iter().enumerate() {
            unsafe { *cuts.add(i) = Box::into_raw(Box::new(SfCut { inner })) };
        }
        Ok(())
    })
}

/// Intersection over union of two masks as an exact reduced fraction.
///
/// # Safety
/// `s` and `g` must be valid for `len` bytes; `num` and `den` for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_overlap(s: *const u8, g: *const u8, len: usize, num: *mut u64, den: *mut u64) -> SfStatus {
    guard(|| {
        let a = to_bools(unsafe { slice(s, len, "s")? });
        let b = to_bools(unsafe { slice(g, len, "g")? });
        let r = overlap(&a, &b).map_err(|e| match e {
            OverlapError::BothEmpty => Fail(SfStatus::BothEmpty, e.to_string()),
            OverlapError::SizeMismatch(..) => Fail(SfStatus::InvalidArgument, e.to_string()),
        })?;
        if num.is_null() || den.is_null() {
            return fail(SfStatus::NullPointer, "output pointer is null");
        }
        unsafe {
            *num = *r.numer();
            *den = *r.denom();
        }
        Ok(())
    })
}

