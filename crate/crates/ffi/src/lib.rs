//! C ABI for the serving engine.
//!
//! Servers and cost models are opaque heap handles. Every fallible call
//! returns a [`DgStatus`]; on failure a message is kept per thread and can be
//! read with [`dg_last_error`]. Panics are caught at the boundary and reported
//! as [`DgStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dyngnn::coordinator::{choose_m, CostModel, WorkloadStats};
use dyngnn::graph::{generate_synthetic, EventKind, GraphEvent, GraphModel, NodeId};
use dyngnn::harness::RunConfig;
use dyngnn::model::{init_weights, Flavor};
use dyngnn::serving::{CostClock, QueryRequest, Server, ServingConfig};
use dyngnn::{Error, UpdateStrategy};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownNode = 3,
    DuplicateEdge = 4,
    MissingEdge = 5,
    OutOfRange = 6,
    Io = 7,
    BufferTooSmall = 8,
    Internal = 9,
    Panic = 10,
}

/// Model family for synthetic construction.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DgFlavor {
    Gcn = 0,
    Gin = 1,
    Sage = 2,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DgStrategy {
    Aip = 0,
    Naive = 1,
}

/// Parameters for [`dg_server_new_synthetic`].
#[repr(C)]
#[derive(Copy, Clone, Debug)]
pub struct DgSyntheticParams {
    pub n: usize,
    pub c: usize,
    pub flavor: DgFlavor,
    /// `num_layers + 1` widths: input feature dim then each layer's output.
    pub dims: *const usize,
    pub num_layers: usize,
    pub m: usize,
    pub strategy: DgStrategy,
    pub seed: u64,
    /// Logical cost per touched node, in seconds.
    pub unit_cost: f64,
}

/// Timing of one served query.
#[repr(C)]
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct DgQueryResult {
    pub latency: f64,
    pub staleness: f64,
    pub touched_nodes: usize,
}

/// Opaque server handle.
pub struct DgServer {
    inner: Server,
    next_seq: u64,
}

/// Opaque cost model handle.
pub struct DgCostModel {
    inner: CostModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> DgStatus {
    match err {
        Error::UnknownNode(_) => DgStatus::UnknownNode,
        Error::DuplicateEdge(..) => DgStatus::DuplicateEdge,
        Error::MissingEdge(..) => DgStatus::MissingEdge,
        Error::OutOfRange { .. } => DgStatus::OutOfRange,
        Error::Io(_) => DgStatus::Io,
        Error::SelfLoop(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidParams(_)
        | Error::Config(_)
        | Error::Parse { .. }
        | Error::TomlDe(_) => DgStatus::InvalidArgument,
        _ => DgStatus::Internal,
    }
}

fn guard<F: FnOnce() -> Result<(), DgStatus>>(f: F) -> DgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside dyngnn".into());
            DgStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, DgStatus>;
}

impl<T> OrStatus<T> for dyngnn::Result<T> {
    fn or_status(self) -> Result<T, DgStatus> {
        self.map_err(|e| {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        })
    }
}

fn null() -> DgStatus {
    set_error("null pointer argument".into());
    DgStatus::NullPointer
}

unsafe fn server_mut<'a>(s: *mut DgServer) -> Result<&'a mut DgServer, DgStatus> {
    s.as_mut().ok_or_else(null)
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, DgStatus> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map(Path::new).map_err(|_| {
        set_error("path is not valid UTF-8".into());
        DgStatus::InvalidArgument
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Builds a server over a synthetic regular graph.
///
/// # Safety
/// `params.dims` must point to `params.num_layers + 1` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_server_new_synthetic(
    params: DgSyntheticParams,
    out: *mut *mut DgServer,
) -> DgStatus {
    guard(|| {
        if out.is_null() || params.dims.is_null() {
            return Err(null());
        }
        let dims = std::slice::from_raw_parts(params.dims, params.num_layers + 1);
        let flavor = match params.flavor {
            DgFlavor::Gcn => Flavor::Gcn,
            DgFlavor::Gin => Flavor::Gin,
            DgFlavor::Sage => Flavor::Sage,
        };
        let strategy = match params.strategy {
            DgStrategy::Aip => UpdateStrategy::Aip,
            DgStrategy::Naive => UpdateStrategy::Naive,
        };
        let model = init_weights(flavor, dims, None, params.seed).or_status()?;
        let graph = generate_synthetic(
            params.n,
            params.c,
            GraphModel::Regular,
            dims[0],
            params.seed,
        )
        .or_status()?;
        let server = Server::new(
            graph,
            model,
            ServingConfig::collaborative(params.m, strategy),
            CostClock::Logical {
                unit_cost: params.unit_cost,
            },
        )
        .or_status()?;
        *out = Box::into_raw(Box::new(DgServer {
            inner: server,
            next_seq: 1,
        }));
        Ok(())
    })
}

/// Builds a server from the graph, model, serving and clock sections of a run
/// config file. `auto` serving starts at `M = 0`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_server_new_from_config(
    path: *const c_char,
    out: *mut *mut DgServer,
) -> DgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let cfg = RunConfig::load(path_arg(path)?).or_status()?;
        let model = cfg.model.build().or_status()?;
        let graph = cfg.graph.build(model.input_dim()).or_status()?;
        let serving = cfg
            .serving
            .fixed(model.depth())
            .unwrap_or(ServingConfig::collaborative(
                0,
                cfg.serving.update_strategy(model.depth()),
            ));
        let server = Server::new(graph, model, serving, cfg.clock).or_status()?;
        *out = Box::into_raw(Box::new(DgServer {
            inner: server,
            next_seq: 1,
        }));
        Ok(())
    })
}

/// # Safety
/// `server` must come from a constructor here and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dg_server_free(server: *mut DgServer) {
    if !server.is_null() {
        drop(Box::from_raw(server));
    }
}

unsafe fn apply(server: *mut DgServer, time: f64, kind: EventKind) -> Result<(), DgStatus> {
    let s = server_mut(server)?;
    let ev = GraphEvent {
        seq: s.next_seq,
        time,
        kind,
    };
    s.inner.handle_update(&ev).or_status()?;
    s.next_seq += 1;
    Ok(())
}

/// # Safety
/// `server` must be valid; `feature` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn dg_update_feature(
    server: *mut DgServer,
    node: u32,
    feature: *const f64,
    len: usize,
    time: f64,
) -> DgStatus {
    guard(|| {
        if feature.is_null() {
            return Err(null());
        }
        let feature = std::slice::from_raw_parts(feature, len).to_vec();
        apply(
            server,
            time,
            EventKind::UpdateFeature {
                node: NodeId(node),
                feature,
            },
        )
    })
}

/// # Safety
/// `server` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dg_add_edge(
    server: *mut DgServer,
    src: u32,
    dst: u32,
    time: f64,
) -> DgStatus {
    guard(|| {
        apply(
            server,
            time,
            EventKind::AddEdge {
                src: NodeId(src),
                dst: NodeId(dst),
            },
        )
    })
}

/// # Safety
/// `server` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dg_remove_edge(
    server: *mut DgServer,
    src: u32,
    dst: u32,
    time: f64,
) -> DgStatus {
    guard(|| {
        apply(
            server,
            time,
            EventKind::RemoveEdge {
                src: NodeId(src),
                dst: NodeId(dst),
            },
        )
    })
}

/// Writes the layer-`L` embedding of `node` into `out` (capacity `cap`).
///
/// # Safety
/// `server` must be valid, `out` must hold `cap` values, `result` may be null.
#[no_mangle]
pub unsafe extern "C" fn dg_query(
    server: *mut DgServer,
    node: u32,
    issued_at: f64,
    out: *mut f64,
    cap: usize,
    result: *mut DgQueryResult,
) -> DgStatus {
    guard(|| {
        let s = server_mut(server)?;
        if out.is_null() {
            return Err(null());
        }
        let dim = s.inner.model().output_dim();
        if cap < dim {
            set_error(format!("output buffer holds {cap} values, need {dim}"));
            return Err(DgStatus::BufferTooSmall);
        }
        let req = QueryRequest {
            target: NodeId(node),
            issued_at,
        };
        let resp = s.inner.handle_query(&req, issued_at).or_status()?;
        std::slice::from_raw_parts_mut(out, dim).copy_from_slice(&resp.embedding);
        if let Some(r) = result.as_mut() {
            *r = DgQueryResult {
                latency: resp.latency,
                staleness: resp.staleness,
                touched_nodes: resp.touched_nodes,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `server` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dg_set_m(server: *mut DgServer, m: usize) -> DgStatus {
    guard(|| {
        server_mut(server)?.inner.set_m(m).or_status()?;
        Ok(())
    })
}

/// Current split point, or `usize::MAX` for a null handle.
///
/// # Safety
/// `server` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn dg_get_m(server: *const DgServer) -> usize {
    server.as_ref().map_or(usize::MAX, |s| s.inner.m())
}

/// Embedding width, or 0 for a null handle.
///
/// # Safety
/// `server` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn dg_output_dim(server: *const DgServer) -> usize {
    server.as_ref().map_or(0, |s| s.inner.model().output_dim())
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dg_cost_model_load(
    path: *const c_char,
    out: *mut *mut DgCostModel,
) -> DgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let cm = CostModel::load(path_arg(path)?).or_status()?;
        *out = Box::into_raw(Box::new(DgCostModel { inner: cm }));
        Ok(())
    })
}

/// # Safety
/// `cm` must come from [`dg_cost_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dg_cost_model_free(cm: *mut DgCostModel) {
    if !cm.is_null() {
        drop(Box::from_raw(cm));
    }
}

/// Split point minimizing predicted work for the given rates and connectivity.
///
/// # Safety
/// `cm` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dg_choose_m(
    cm: *const DgCostModel,
    rps_q: f64,
    rps_u: f64,
    c: f64,
    out: *mut usize,
) -> DgStatus {
    guard(|| {
        let (Some(cm), false) = (cm.as_ref(), out.is_null()) else {
            return Err(null());
        };
        if !(rps_q >= 0.0 && rps_u >= 0.0 && c.is_finite()) {
            set_error("rates must be non-negative and c finite".into());
            return Err(DgStatus::InvalidArgument);
        }
        *out = choose_m(&cm.inner, &WorkloadStats::new(rps_q, rps_u, c));
        Ok(())
    })
}
