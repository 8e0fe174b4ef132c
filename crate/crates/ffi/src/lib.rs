//! C interface to hjnet.
//!
//! Every call returns an `HjnetStatus`; on failure the message is available
//! from `hjnet_last_error_message` on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hjnet::action::{min_action, ActionQuery};
use hjnet::cell::effective_hamiltonian;
use hjnet::mather::{beta, BetaOptions};
use hjnet::{Error, Network};

/// Opaque model: a base graph with its edge Hamiltonians.
pub struct HjnetModel {
    net: Network,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HjnetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidGraph = 4,
    InvalidModel = 5,
    DimensionMismatch = 6,
    UnknownId = 7,
    DomainError = 8,
    BudgetExceeded = 9,
    NumericalFailure = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HjnetStatus {
    use HjnetStatus::*;
    match e {
        Error::Parse(_) | Error::Io(_) => ParseError,
        Error::DisconnectedGraph(_)
        | Error::DuplicateEdgeId(_)
        | Error::DanglingEndpoint { .. }
        | Error::EmptyGraph
        | Error::NotConcatenated(..) => InvalidGraph,
        Error::NonConvexModel { .. } | Error::InvalidModel(_) | Error::MissingHamiltonian(_) => InvalidModel,
        Error::DimensionMismatch { .. } => DimensionMismatch,
        Error::UnknownVertex(_) | Error::UnknownEdge(_) => UnknownId,
        Error::LevelBelowMinimum { .. } | Error::DomainError { .. } | Error::InvalidParameter(_) => DomainError,
        Error::BudgetExceeded(_) | Error::BoxExpansionLimit(_) | Error::RadiusExhausted(_) => BudgetExceeded,
        Error::ConvergenceFailure(_) | Error::Unreachable(_) => NumericalFailure,
    }
}

/// Runs `f`, recording any error or panic.
fn guard<F: FnOnce() -> Result<(), (HjnetStatus, String)>>(f: F) -> HjnetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HjnetStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            HjnetStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (HjnetStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HjnetStatus, String) {
    (HjnetStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HjnetStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (HjnetStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn model<'a>(m: *const HjnetModel) -> Result<&'a HjnetModel, (HjnetStatus, String)> {
    m.as_ref().ok_or_else(|| null("model"))
}

unsafe fn array<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (HjnetStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn write<T>(out: *mut T, v: T) -> Result<(), (HjnetStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { out.write(v) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hjnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn hjnet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a model from graph and Hamiltonian JSON. Release with
/// `hjnet_model_free`.
///
/// # Safety
/// The strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hjnet_model_from_json(
    graph_json: *const c_char,
    hamiltonians_json: *const c_char,
    out: *mut *mut HjnetModel,
) -> HjnetStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let g = text(graph_json, "graph_json")?;
        let h = text(hamiltonians_json, "hamiltonians_json")?;
        let net = Network::from_json(g, h).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(HjnetModel { net }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `hjnet_model_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hjnet_model_free(model: *mut HjnetModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hjnet_betti(model: *const HjnetModel, out: *mut usize) -> HjnetStatus {
    guard(|| write(out, self::model(model)?.net.betti()))
}

/// `a₀`, the largest edge critical value.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hjnet_critical_value(model: *const HjnetModel, out: *mut f64) -> HjnetStatus {
    guard(|| write(out, self::model(model)?.net.a0))
}

/// θ of an edge (positive or `.rev`) written to `out[0..len]`, `len` = betti.
///
/// # Safety
/// `model` must be a live handle; `edge_id` NUL-terminated; `out` holds `len` values.
#[no_mangle]
pub unsafe extern "C" fn hjnet_theta(
    model: *const HjnetModel,
    edge_id: *const c_char,
    out: *mut i64,
    len: usize,
) -> HjnetStatus {
    guard(|| {
        let net = &self::model(model)?.net;
        let d = net.graph.edge(text(edge_id, "edge_id")?).map_err(lib_err)?;
        if len != net.betti() {
            return Err(lib_err(Error::DimensionMismatch {
                expected: net.betti(),
                got: len,
            }));
        }
        if len > 0 && out.is_null() {
            return Err(null("out"));
        }
        for (i, &v) in net.theta.theta(d).iter().enumerate() {
            out.add(i).write(v);
        }
        Ok(())
    })
}

/// `H̄(p)`.
///
/// # Safety
/// `model` must be a live handle; `p` holds `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hjnet_effective_hamiltonian(
    model: *const HjnetModel,
    p: *const f64,
    len: usize,
    out: *mut f64,
) -> HjnetStatus {
    guard(|| {
        let net = &self::model(model)?.net;
        let v = effective_hamiltonian(net, array(p, len, "p")?).map_err(lib_err)?;
        write(out, v)
    })
}

/// Mather's `β(h)`.
///
/// # Safety
/// `model` must be a live handle; `h` holds `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hjnet_beta(model: *const HjnetModel, h: *const f64, len: usize, out: *mut f64) -> HjnetStatus {
    guard(|| {
        let net = &self::model(model)?.net;
        let v = beta(net, array(h, len, "h")?, &BetaOptions::default()).map_err(lib_err)?;
        write(out, v)
    })
}

/// Dual minimal action from `(from, 0)` to `(to, h)` in time `t`.
///
/// # Safety
/// `model` must be a live handle; ids NUL-terminated; `h` holds `len` values;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hjnet_min_action(
    model: *const HjnetModel,
    from: *const c_char,
    to: *const c_char,
    t: f64,
    h: *const i64,
    len: usize,
    out: *mut f64,
) -> HjnetStatus {
    guard(|| {
        let net = &self::model(model)?.net;
        let x = net.graph.vertex(text(from, "from")?).map_err(lib_err)?;
        let y = net.graph.vertex(text(to, "to")?).map_err(lib_err)?;
        let q = ActionQuery::new(x, y, t, array(h, len, "h")?.to_vec());
        let r = min_action(net, &q).map_err(lib_err)?;
        write(out, r.value)
    })
}
