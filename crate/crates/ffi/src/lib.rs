//! C ABI over the transprox embedding engine.
//!
//! Graphs and embeddings cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns a [`TpStatus`]; on failure, [`tp_last_error`] describes the cause.
//! Panics are caught at the boundary and reported as `TP_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use transprox::{
    backward_push, embed, load_edge_list, reconstruction_precision, EmbeddingPair, Error, Graph,
    GraphKind, LoadedGraph, PprParams, EmbedConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    OutOfRange = 5,
    Internal = 6,
}

/// Embedding parameters; start from [`tp_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TpConfig {
    pub alpha: f64,
    pub eps: f64,
    pub dim: usize,
    pub seed: u64,
    pub svd_oversample: usize,
    pub svd_power_iters: usize,
}

impl From<TpConfig> for EmbedConfig {
    fn from(c: TpConfig) -> EmbedConfig {
        EmbedConfig {
            alpha: c.alpha,
            eps: c.eps,
            dim: c.dim,
            seed: c.seed,
            svd_oversample: c.svd_oversample,
            svd_power_iters: c.svd_power_iters,
        }
    }
}

/// A loaded graph together with its original node ids.
pub struct TpGraph(LoadedGraph);

pub struct TpEmbedding(EmbeddingPair);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: TpStatus, msg: impl Into<String>) -> TpStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> TpStatus {
    match e {
        Error::Io { .. } => TpStatus::Io,
        Error::Parse { .. } | Error::EmptyGraph(_) => TpStatus::Parse,
        Error::NodeOutOfRange { .. } => TpStatus::OutOfRange,
        Error::InvalidParameter(_) | Error::ShapeMismatch(_) | Error::NegativeSampling { .. } => {
            TpStatus::InvalidArgument
        }
        Error::Consistency(_) => TpStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), TpStatus>) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(TpStatus::Internal, "panic inside transprox"),
    }
}

fn lift<T>(r: transprox::Result<T>) -> Result<T, TpStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, TpStatus> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| fail(TpStatus::NullPointer, format!("{what} is null")))
}

fn path_arg(p: *const c_char) -> Result<PathBuf, TpStatus> {
    if p.is_null() {
        return Err(fail(TpStatus::NullPointer, "path is null"));
    }
    // SAFETY: non-null and documented as a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(TpStatus::InvalidArgument, "path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

fn out_slice<'a>(out: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], TpStatus> {
    if out.is_null() {
        return Err(fail(TpStatus::NullPointer, "output buffer is null"));
    }
    if len < needed {
        return Err(fail(
            TpStatus::InvalidArgument,
            format!("output buffer holds {len} values, {needed} needed"),
        ));
    }
    // SAFETY: caller guarantees `out` points to at least `len` writable doubles.
    Ok(unsafe { std::slice::from_raw_parts_mut(out, needed) })
}

fn kind(directed: bool) -> GraphKind {
    if directed {
        GraphKind::Directed
    } else {
        GraphKind::Undirected
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |m| m.as_ptr()))
}

#[no_mangle]
pub extern "C" fn tp_config_default() -> TpConfig {
    let c = EmbedConfig::default();
    TpConfig {
        alpha: c.alpha,
        eps: c.eps,
        dim: c.dim,
        seed: c.seed,
        svd_oversample: c.svd_oversample,
        svd_power_iters: c.svd_power_iters,
    }
}

/// Loads a whitespace-separated edge list. Node ids are remapped to
/// `0..n` in ascending order of the original ids.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_graph_load(
    path: *const c_char,
    directed: bool,
    out: *mut *mut TpGraph,
) -> TpStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(TpStatus::NullPointer, "out is null"));
        }
        let loaded = lift(load_edge_list(path_arg(path)?, kind(directed)))?;
        *out = Box::into_raw(Box::new(TpGraph(loaded)));
        Ok(())
    })
}

/// Builds a graph on nodes `0..n` from `m` arcs `src[i] -> dst[i]`.
///
/// # Safety
/// `src` and `dst` must each point to `m` readable values (may be null when
/// `m == 0`); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_graph_from_edges(
    n: usize,
    src: *const u32,
    dst: *const u32,
    m: usize,
    directed: bool,
    out: *mut *mut TpGraph,
) -> TpStatus {
    guard(|| {
        if out.is_null() || (m > 0 && (src.is_null() || dst.is_null())) {
            return Err(fail(TpStatus::NullPointer, "edge arrays or out is null"));
        }
        let edges: Vec<(u32, u32)> = if m == 0 {
            Vec::new()
        } else {
            let (s, d) = (std::slice::from_raw_parts(src, m), std::slice::from_raw_parts(dst, m));
            s.iter().copied().zip(d.iter().copied()).collect()
        };
        let graph = lift(Graph::from_edges(n, &edges, kind(directed)))?;
        let ids = (0..n as u64).collect();
        *out = Box::into_raw(Box::new(TpGraph(LoadedGraph { graph, ids })));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tp_graph_node_count(graph: *const TpGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.graph.node_count())
}

/// Number of arcs; an undirected edge counts twice.
///
/// # Safety
/// `graph` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tp_graph_edge_count(graph: *const TpGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.graph.edge_count())
}

/// Original id of dense node `node`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_graph_original_id(
    graph: *const TpGraph,
    node: usize,
    out: *mut u64,
) -> TpStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        if out.is_null() {
            return Err(fail(TpStatus::NullPointer, "out is null"));
        }
        let n = g.0.ids.len();
        *out = *g.0.ids.get(node).ok_or_else(|| {
            fail(TpStatus::OutOfRange, format!("node {node} out of range for {n} nodes"))
        })?;
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tp_graph_free(graph: *mut TpGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Backward push towards `target`; writes `pi(u, target)` for every node
/// into `out[0..n]`.
///
/// # Safety
/// `graph` must be a live handle; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tp_backward_push(
    graph: *const TpGraph,
    target: usize,
    alpha: f64,
    r_max: f64,
    out: *mut f64,
    len: usize,
) -> TpStatus {
    guard(|| {
        let g = &non_null(graph, "graph")?.0.graph;
        let params = lift(PprParams::new(alpha, r_max))?;
        let res = lift(backward_push(g, target, params))?;
        let dst = out_slice(out, len, g.node_count())?;
        dst.fill(0.0);
        for &(u, pi) in &res.reserves {
            dst[u as usize] = pi;
        }
        Ok(())
    })
}

/// Runs the full embedding pipeline.
///
/// # Safety
/// `graph` and `config` must be valid pointers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_embed(
    graph: *const TpGraph,
    config: *const TpConfig,
    out: *mut *mut TpEmbedding,
) -> TpStatus {
    guard(|| {
        let g = &non_null(graph, "graph")?.0.graph;
        let config: EmbedConfig = (*non_null(config, "config")?).into();
        if out.is_null() {
            return Err(fail(TpStatus::NullPointer, "out is null"));
        }
        let result = lift(embed(g, &config))?;
        *out = Box::into_raw(Box::new(TpEmbedding(result.embedding)));
        Ok(())
    })
}

/// # Safety
/// `emb` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_embedding_dim(emb: *const TpEmbedding) -> usize {
    emb.as_ref().map_or(0, |e| e.0.dim())
}

/// # Safety
/// `emb` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_embedding_node_count(emb: *const TpEmbedding) -> usize {
    emb.as_ref().map_or(0, |e| e.0.node_count())
}

/// Inner product of the source vector of `u` and the target vector of `v`.
///
/// # Safety
/// `emb` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_embedding_score(
    emb: *const TpEmbedding,
    u: usize,
    v: usize,
    out: *mut f64,
) -> TpStatus {
    guard(|| {
        let e = non_null(emb, "embedding")?;
        if out.is_null() {
            return Err(fail(TpStatus::NullPointer, "out is null"));
        }
        *out = lift(e.0.score(u, v))?;
        Ok(())
    })
}

unsafe fn copy_rows(
    emb: *const TpEmbedding,
    out: *mut f64,
    len: usize,
    row: fn(&EmbeddingPair, usize) -> &[f64],
) -> TpStatus {
    guard(|| {
        let e = &non_null(emb, "embedding")?.0;
        let (n, d) = (e.node_count(), e.dim());
        let dst = out_slice(out, len, n * d)?;
        for u in 0..n {
            dst[u * d..(u + 1) * d].copy_from_slice(row(e, u));
        }
        Ok(())
    })
}

/// Copies the source vectors, row-major `n x dim`, into `out`.
///
/// # Safety
/// `emb` must be a live handle; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tp_embedding_copy_source(
    emb: *const TpEmbedding,
    out: *mut f64,
    len: usize,
) -> TpStatus {
    copy_rows(emb, out, len, EmbeddingPair::source_row)
}

/// Copies the target vectors, row-major `n x dim`, into `out`.
///
/// # Safety
/// `emb` must be a live handle; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tp_embedding_copy_target(
    emb: *const TpEmbedding,
    out: *mut f64,
    len: usize,
) -> TpStatus {
    copy_rows(emb, out, len, EmbeddingPair::target_row)
}

/// Writes the embedding in the text format read by the command-line tool,
/// labelling rows with the original ids of `graph`.
///
/// # Safety
/// `emb` and `graph` must be live handles; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tp_embedding_write(
    emb: *const TpEmbedding,
    graph: *const TpGraph,
    path: *const c_char,
) -> TpStatus {
    guard(|| {
        let e = &non_null(emb, "embedding")?.0;
        let g = &non_null(graph, "graph")?.0;
        if g.ids.len() != e.node_count() {
            return Err(fail(TpStatus::InvalidArgument, "graph and embedding sizes differ"));
        }
        lift(e.write_file(&g.ids, path_arg(path)?))
    })
}

/// Share of true arcs among the `m` best-scored pairs, `m` being the arc count.
///
/// # Safety
/// `graph` and `emb` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tp_reconstruction_precision(
    graph: *const TpGraph,
    emb: *const TpEmbedding,
    out: *mut f64,
) -> TpStatus {
    guard(|| {
        let g = &non_null(graph, "graph")?.0.graph;
        let e = &non_null(emb, "embedding")?.0;
        if out.is_null() {
            return Err(fail(TpStatus::NullPointer, "out is null"));
        }
        *out = lift(reconstruction_precision(g, e))?;
        Ok(())
    })
}

/// # Safety
/// `emb` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tp_embedding_free(emb: *mut TpEmbedding) {
    if !emb.is_null() {
        drop(Box::from_raw(emb));
    }
}
