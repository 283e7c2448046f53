//! C bindings over the pipeline: parse networks, solve concurrent flow,
//! search coding rates, run the finite-field transform, and audit
//! inversion reductions.
//!
//! Conventions, mirrored in the generated header:
//! - Every fallible call returns an [`NccStatus`]; `NCC_STATUS_OK` is zero.
//! - On failure, [`ncc_last_error_message`] returns a thread-local message
//!   that stays valid until the next failing call on the same thread.
//! - Handles are opaque; each constructor pairs with exactly one `*_free`.
//! - Strings returned through `char **` out-parameters are owned by the
//!   caller and released with [`ncc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ncclab::coding::search::search_coding_rate;
use ncclab::coding::{CodingError, Network};
use ncclab::ds::{index_bits, DsError, InvBlock};
use ncclab::field::{ffft, ffft_inverse, FieldError, PrimeField, RootOfUnity};
use ncclab::flow::{
    flow_rate, ncc_gap_report, parse_network_file, render_network_file, undirect, FlowError,
    FlowSolution, GapReport,
};
use ncclab::reduction::{
    audit_reduction, build_layered_graph, prune_high_degree, select_bucket, suggested_distance,
    CensusPlan, ReductionError,
};

/// Result of every fallible call. Zero is success; anything else names the
/// failure family and leaves a detailed message in `ncc_last_error_message`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NccStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// Malformed caller data: bad UTF-8, out-of-range values, zero sizes.
    InvalidInput = 2,
    /// Text in one of the line-oriented file formats failed to parse.
    ParseError = 3,
    /// Parameters outside the mathematical domain: composite modulus,
    /// missing root of unity, adaptive structure, oversized search space.
    DomainError = 4,
    /// The computation itself failed or found an inconsistency.
    ComputeError = 5,
    /// A bug: an internal panic was caught at the boundary.
    InternalError = 6,
}

/// A parsed capacitated network with its source-target pairs.
pub struct NccNetwork(Network);

/// An optimal concurrent-flow solution for one network.
pub struct NccFlowSolution(FlowSolution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: NccStatus, msg: impl AsRef<str>) -> NccStatus {
    let clean: String =
        msg.as_ref().chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
    status
}

fn field_err(e: FieldError) -> NccStatus {
    fail(NccStatus::DomainError, e.to_string())
}

fn flow_err(e: FlowError) -> NccStatus {
    let status = match e {
        FlowError::MalformedFile { .. } => NccStatus::ParseError,
        _ => NccStatus::ComputeError,
    };
    fail(status, e.to_string())
}

fn coding_err(e: CodingError) -> NccStatus {
    let status = match e {
        CodingError::BadNetworkFile { .. } => NccStatus::ParseError,
        CodingError::SearchSpaceTooLarge { .. }
        | CodingError::AlphabetTooLarge { .. }
        | CodingError::CyclicNetwork
        | CodingError::NotDirected
        | CodingError::InvalidNetwork { .. } => NccStatus::DomainError,
        _ => NccStatus::ComputeError,
    };
    fail(status, e.to_string())
}

fn ds_err(e: DsError) -> NccStatus {
    let status = match e {
        DsError::InvalidParams { .. } => NccStatus::DomainError,
        _ => NccStatus::ComputeError,
    };
    fail(status, e.to_string())
}

fn reduction_err(e: ReductionError) -> NccStatus {
    match e {
        ReductionError::AdaptiveDsRejected { .. } | ReductionError::LayerTooSmall { .. } => {
            fail(NccStatus::DomainError, e.to_string())
        }
        ReductionError::EmptyInput => fail(NccStatus::InvalidInput, e.to_string()),
        ReductionError::Ds(inner) => ds_err(inner),
        ReductionError::Field(inner) => field_err(inner),
        ReductionError::Coding(inner) => coding_err(inner),
        _ => fail(NccStatus::ComputeError, e.to_string()),
    }
}

fn guarded(f: impl FnOnce() -> NccStatus) -> NccStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(NccStatus::InternalError, "internal panic caught at the C boundary"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, NccStatus> {
    if p.is_null() {
        return Err(fail(NccStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(NccStatus::InvalidInput, format!("argument is not UTF-8: {e}")))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> NccStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            NccStatus::Ok
        }
        Err(_) => fail(NccStatus::InternalError, "interior NUL byte in produced text"),
    }
}

unsafe fn borrow_network<'a>(net: *const NccNetwork) -> Result<&'a Network, NccStatus> {
    if net.is_null() {
        return Err(fail(NccStatus::NullArgument, "null network handle"));
    }
    Ok(&(*net).0)
}

/// Library version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn ncc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Message describing this thread's most recent failure. Valid until the
/// next failing call on the same thread; never freed by the caller.
#[no_mangle]
pub extern "C" fn ncc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string obtained from any `char **` out-parameter. NULL is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn ncc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses the line-oriented network format (`network <directed|undirected>
/// <vertices> <edges> <pairs>` header, then `e u v cap` and `p s t`
/// records) into a new handle.
#[no_mangle]
pub unsafe extern "C" fn ncc_network_parse(
    text: *const c_char,
    out: *mut *mut NccNetwork,
) -> NccStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NccStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_network_file(text) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(NccNetwork(net)));
                NccStatus::Ok
            }
            Err(e) => flow_err(e),
        }
    })
}

/// Renders a network back into the file format it was parsed from. The
/// output round-trips: parsing it reproduces the network exactly.
#[no_mangle]
pub unsafe extern "C" fn ncc_network_render(
    net: *const NccNetwork,
    out: *mut *mut c_char,
) -> NccStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NccStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        match borrow_network(net) {
            Ok(n) => give_string(out, render_network_file(n)),
            Err(s) => s,
        }
    })
}

/// Writes the vertex, edge, and pair counts of a network. Any of the three
/// destinations may be NULL to skip it.
#[no_mangle]
pub unsafe extern "C" fn ncc_network_counts(
    net: *const NccNetwork,
    vertices: *mut usize,
    edges: *mut usize,
    pairs: *mut usize,
) -> NccStatus {
    guarded(|| {
        let n = match borrow_network(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        if !vertices.is_null() {
            *vertices = n.n_vertices();
        }
        if !edges.is_null() {
            *edges = n.edges().len();
        }
        if !pairs.is_null() {
            *pairs = n.pairs().len();
        }
        NccStatus::Ok
    })
}

/// Whether the network's edges are one-directional. Returns false for a
/// NULL handle.
#[no_mangle]
pub unsafe extern "C" fn ncc_network_is_directed(net: *const NccNetwork) -> bool {
    !net.is_null() && (*net).0.is_directed()
}

/// Copies a network, dropping edge orientations; capacities and pairs are
/// kept.
#[no_mangle]
pub unsafe extern "C" fn ncc_network_undirect(
    net: *const NccNetwork,
    out: *mut *mut NccNetwork,
) -> NccStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NccStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        match borrow_network(net) {
            Ok(n) => {
                *out = Box::into_raw(Box::new(NccNetwork(undirect(n))));
                NccStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Releases a network handle. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ncc_network_free(net: *mut NccNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Solves the maximum concurrent multicommodity flow on the network and
/// returns the solution as a new handle.
#[no_mangle]
pub unsafe extern "C" fn ncc_flow_rate(
    net: *const NccNetwork,
    out: *mut *mut NccFlowSolution,
) -> NccStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NccStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let n = match borrow_network(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match flow_rate(n) {
            Ok(sol) => {
                *out = Box::into_raw(Box::new(NccFlowSolution(sol)));
                NccStatus::Ok
            }
            Err(e) => flow_err(e),
        }
    })
}

/// The concurrent flow rate: the largest r shipped by every commodity
/// simultaneously. NaN for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn ncc_flow_solution_rate(sol: *const NccFlowSolution) -> f64 {
    if sol.is_null() {
        return f64::NAN;
    }
    (*sol).0.rate
}

/// Largest conservation or capacity residual of the solution. NaN for a
/// NULL handle.
#[no_mangle]
pub unsafe extern "C" fn ncc_flow_solution_max_violation(sol: *const NccFlowSolution) -> f64 {
    if sol.is_null() {
        return f64::NAN;
    }
    (*sol).0.max_violation
}

/// Per-arc flows as `commodity,u,v,flow` CSV text.
#[no_mangle]
pub unsafe extern "C" fn ncc_flow_solution_csv(
    sol: *const NccFlowSolution,
    out: *mut *mut c_char,
) -> NccStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NccStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        if sol.is_null() {
            return fail(NccStatus::NullArgument, "null flow solution handle");
        }
        give_string(out, (*sol).0.to_csv())
    })
}

/// Releases a flow solution handle. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ncc_flow_solution_free(sol: *mut NccFlowSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Exhaustively searches scalar coding schemes up to `max_rate_bits` bits
/// per message (at most 2) and writes the best achievable rate in bits;
/// zero means even one bit is undeliverable.
#[no_mangle]
pub unsafe extern "C" fn ncc_coding_search_best_bits(
    net: *const NccNetwork,
    max_rate_bits: u32,
    out_bits: *mut u32,
) -> NccStatus {
    guarded(|| {
        if out_bits.is_null() {
            return fail(NccStatus::NullArgument, "null out pointer");
        }
        let n = match borrow_network(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match search_coding_rate(n, max_rate_bits) {
            Ok(result) => {
                *out_bits = result.best_rate_bits;
                NccStatus::Ok
            }
            Err(e) => coding_err(e),
        }
    })
}

#[derive(serde::Serialize)]
struct GapFile {
    best_rate_bits: u32,
    tables_tried: u128,
    skipped_rates: Vec<u32>,
    gap: GapReport,
}

/// Runs the coding-rate search, the directed flow LP, and the undirected
/// comparison, and returns the combined report as a JSON document.
#[no_mangle]
pub unsafe extern "C" fn ncc_gap_report_json(
    net: *const NccNetwork,
    max_rate_bits: u32,
    out: *mut *mut c_char,
) -> NccStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NccStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let n = match borrow_network(net) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let search = match search_coding_rate(n, max_rate_bits) {
            Ok(s) => s,
            Err(e) => return coding_err(e),
        };
        let gap = match ncc_gap_report(n, search.best_rate_bits as f64) {
            Ok(g) => g,
            Err(e) => return flow_err(e),
        };
        let file = GapFile {
            best_rate_bits: search.best_rate_bits,
            tables_tried: search.tables_tried,
            skipped_rates: search.skipped_rates,
            gap,
        };
        match serde_json::to_string_pretty(&file) {
            Ok(json) => give_string(out, json),
            Err(e) => fail(NccStatus::InternalError, format!("serialization failed: {e}")),
        }
    })
}

/// Evaluates (or, with `inverse`, interpolates) a length-`len` vector over
/// GF(`p`) at the canonical order-`len` root of unity, writing `len` values
/// to `out`. Requires `len` to divide `p - 1` and all inputs below `p`.
#[no_mangle]
pub unsafe extern "C" fn ncc_ffft(
    p: u64,
    values: *const u64,
    len: usize,
    inverse: bool,
    out: *mut u64,
) -> NccStatus {
    guarded(|| {
        if values.is_null() || out.is_null() {
            return fail(NccStatus::NullArgument, "null buffer");
        }
        if len == 0 {
            return fail(NccStatus::InvalidInput, "empty vector");
        }
        let field = match PrimeField::new(p) {
            Ok(f) => f,
            Err(e) => return field_err(e),
        };
        let raw = std::slice::from_raw_parts(values, len);
        if let Some(bad) = raw.iter().find(|&&v| v >= p) {
            return fail(NccStatus::InvalidInput, format!("value {bad} not below modulus {p}"));
        }
        let root = match RootOfUnity::find(field, len as u64) {
            Ok(r) => r,
            Err(e) => return field_err(e),
        };
        let elems: Vec<_> = raw.iter().map(|&v| field.element(v)).collect();
        let transformed = if inverse { ffft_inverse(&elems, &root) } else { ffft(&elems, &root) };
        match transformed {
            Ok(result) => {
                let dst = std::slice::from_raw_parts_mut(out, len);
                for (d, v) in dst.iter_mut().zip(&result) {
                    *d = v.value();
                }
                NccStatus::Ok
            }
            Err(e) => field_err(e),
        }
    })
}

/// Compiles the block inverter with parameters (`n`, `t`) into its layered
/// network, prunes at out-degree `q*t`, buckets a permutation census
/// (exhaustive for n <= 8, else `samples` draws seeded by `seed`; 0 picks a
/// default), replays the selected bucket, and returns the audit report as a
/// JSON document.
#[no_mangle]
pub unsafe extern "C" fn ncc_inversion_audit_json(
    n: usize,
    t: usize,
    q: usize,
    epsilon: f64,
    samples: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> NccStatus {
    guarded(|| {
        if out.is_null() {
            return fail(NccStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        if q == 0 {
            return fail(NccStatus::InvalidInput, "q must be at least 1");
        }
        let ds = match InvBlock::new(n, t) {
            Ok(ds) => ds,
            Err(e) => return ds_err(e),
        };
        let run = || -> Result<String, ReductionError> {
            let graph = build_layered_graph(&ds, index_bits(n))?;
            let mut pruned = prune_high_degree(graph, q);
            pruned.choose_shift(suggested_distance(n, q, t));
            let count = if samples == 0 { 100_000 } else { samples };
            let census = select_bucket(&pruned, &ds, &CensusPlan::auto(n, count, seed))?;
            let report = audit_reduction(&pruned, &ds, &census, epsilon)?;
            Ok(serde_json::to_string_pretty(&report)
                .expect("report serialization cannot fail"))
        };
        match run() {
            Ok(json) => give_string(out, json),
            Err(e) => reduction_err(e),
        }
    })
}
