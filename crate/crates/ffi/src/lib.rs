//! C ABI over `motlab`. Instances are opaque handles; every fallible call
//! returns a [`MotlabStatus`] and leaves a message for
//! [`motlab_last_error`] on failure. Strings handed out by the library are
//! released with [`motlab_string_free`].

use motlab::error::Error;
use motlab::io::{Instance, Real};
use motlab::min::min_bruteforce;
use motlab::mot::{sinkhorn, solve_lp, MotSolution, SinkhornConfig};
use motlab::reduction::min_via_mot_exact;
use serde_json::json;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotlabStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a schema violation.
    Parse = 3,
    /// Shapes, marginals, or parameters that fail validation.
    InvalidInput = 4,
    CapExceeded = 5,
    /// The solver stopped before meeting its tolerance; outputs are still set.
    NotConverged = 6,
    Infeasible = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotlabMinMethod {
    Bruteforce = 0,
    MotExact = 1,
}

/// Opaque instance handle.
pub struct MotlabInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> MotlabStatus {
    match err {
        Error::Parse(_) | Error::Json(_) => MotlabStatus::Parse,
        Error::CapExceeded { .. } => MotlabStatus::CapExceeded,
        Error::Infeasible(_) | Error::Unbounded => MotlabStatus::Infeasible,
        Error::Internal(_) | Error::Oracle(_) | Error::Io(_) => MotlabStatus::Internal,
        _ => MotlabStatus::InvalidInput,
    }
}

fn fail(err: Error) -> MotlabStatus {
    set_error(err.to_string());
    status_of(&err)
}

/// Runs `f`, turning a panic into [`MotlabStatus::Panic`] instead of unwinding into C.
fn guard(f: impl FnOnce() -> MotlabStatus) -> MotlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MotlabStatus::Panic
        }
    }
}

unsafe fn instance<'a>(handle: *const MotlabInstance) -> Result<&'a Instance, MotlabStatus> {
    if handle.is_null() {
        set_error("instance handle is null");
        return Err(MotlabStatus::NullArgument);
    }
    Ok(&(*handle).inner)
}

fn hand_out(text: String, out: *mut *mut c_char) -> MotlabStatus {
    if out.is_null() {
        return MotlabStatus::Ok;
    }
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            MotlabStatus::Ok
        }
        Err(_) => {
            set_error("report contained a NUL byte");
            MotlabStatus::Internal
        }
    }
}

fn mot_report(sol: &MotSolution) -> String {
    let mut coupling = Vec::new();
    sol.coupling.for_each_entry(|t, w| {
        if w > 0.0 {
            coupling.push(json!({"index": t.iter().map(|j| j + 1).collect::<Vec<_>>(), "mass": Real::format(w)}));
        }
    });
    let mut report = json!({
        "backend": sol.backend.name(),
        "value": Real::format(sol.value),
        "converged": sol.converged,
        "iterations": sol.iterations,
        "marginal_error": Real::format(sol.marginal_error),
        "coupling": coupling,
    });
    if let Some(reg) = sol.regularized_value {
        report["regularized_value"] = json!(Real::format(reg));
    }
    if let Some(d) = &sol.duals {
        report["duals"] =
            json!(d.p.iter().map(|row| row.iter().map(|v| Real::format(*v)).collect::<Vec<_>>()).collect::<Vec<_>>());
    }
    report.to_string()
}

fn finish_mot(sol: MotSolution, value: *mut f64, report: *mut *mut c_char) -> MotlabStatus {
    if !value.is_null() {
        unsafe { *value = sol.value };
    }
    let status = hand_out(mot_report(&sol), report);
    if status != MotlabStatus::Ok {
        return status;
    }
    if sol.converged {
        MotlabStatus::Ok
    } else {
        set_error(format!("not converged after {} iterations", sol.iterations));
        MotlabStatus::NotConverged
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn motlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn motlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an instance document. On success `*out` owns a handle to be
/// released with [`motlab_instance_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn motlab_instance_from_json(json: *const c_char, out: *mut *mut MotlabInstance) -> MotlabStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            set_error("null argument");
            return MotlabStatus::NullArgument;
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            set_error("instance JSON is not valid UTF-8");
            return MotlabStatus::InvalidUtf8;
        };
        match Instance::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MotlabInstance { inner }));
                MotlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `handle` must come from [`motlab_instance_from_json`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn motlab_instance_free(handle: *mut MotlabInstance) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live handle; `n` and `k` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn motlab_instance_shape(
    handle: *const MotlabInstance,
    n: *mut usize,
    k: *mut usize,
) -> MotlabStatus {
    guard(|| {
        let inst = match instance(handle) {
            Ok(i) => i,
            Err(s) => return s,
        };
        if n.is_null() || k.is_null() {
            set_error("null output pointer");
            return MotlabStatus::NullArgument;
        }
        let s = inst.shape();
        *n = s.n;
        *k = s.k;
        MotlabStatus::Ok
    })
}

/// Cost of one tuple of 0-based indices.
///
/// # Safety
/// `tuple` must point to `len` readable values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn motlab_evaluate(
    handle: *const MotlabInstance,
    tuple: *const usize,
    len: usize,
    out: *mut f64,
) -> MotlabStatus {
    guard(|| {
        let inst = match instance(handle) {
            Ok(i) => i,
            Err(s) => return s,
        };
        if tuple.is_null() || out.is_null() {
            set_error("null argument");
            return MotlabStatus::NullArgument;
        }
        let t = std::slice::from_raw_parts(tuple, len);
        match inst.cost.evaluate_checked(t) {
            Ok(v) => {
                *out = v;
                MotlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Exact MOT by linear programming on the instance's marginals. `value`
/// and `report` may each be null when not wanted.
///
/// # Safety
/// `handle` must be live; non-null outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn motlab_solve_lp(
    handle: *const MotlabInstance,
    value: *mut f64,
    report: *mut *mut c_char,
) -> MotlabStatus {
    guard(|| {
        let inst = match instance(handle) {
            Ok(i) => i,
            Err(s) => return s,
        };
        let Some(spec) = &inst.spec else {
            set_error("instance has no marginals");
            return MotlabStatus::InvalidInput;
        };
        match solve_lp(&inst.cost, spec) {
            Ok(sol) => finish_mot(sol, value, report),
            Err(e) => fail(e),
        }
    })
}

/// Entropic MOT by log-domain Sinkhorn. Returns [`MotlabStatus::NotConverged`]
/// with outputs filled in when `max_iters` runs out first.
///
/// # Safety
/// As for [`motlab_solve_lp`].
#[no_mangle]
pub unsafe extern "C" fn motlab_sinkhorn(
    handle: *const MotlabInstance,
    eta: f64,
    tol: f64,
    max_iters: usize,
    value: *mut f64,
    report: *mut *mut c_char,
) -> MotlabStatus {
    guard(|| {
        let inst = match instance(handle) {
            Ok(i) => i,
            Err(s) => return s,
        };
        let Some(spec) = &inst.spec else {
            set_error("instance has no marginals");
            return MotlabStatus::InvalidInput;
        };
        let result = SinkhornConfig::new(eta, tol, max_iters).and_then(|cfg| sinkhorn(&inst.cost, spec, &cfg));
        match result {
            Ok(sol) => finish_mot(sol, value, report),
            Err(e) => fail(e),
        }
    })
}

/// `min_j C_j - Σ_i p_i[j_i]` with the instance's weights (zero if absent).
/// `witness` receives `k` 0-based indices; `witness_len` must be at least `k`.
///
/// # Safety
/// `witness` must point to `witness_len` writable values (or be null with
/// `witness_len == 0`); `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn motlab_solve_min(
    handle: *const MotlabInstance,
    method: MotlabMinMethod,
    value: *mut f64,
    witness: *mut usize,
    witness_len: usize,
) -> MotlabStatus {
    guard(|| {
        let inst = match instance(handle) {
            Ok(i) => i,
            Err(s) => return s,
        };
        if value.is_null() {
            set_error("null output pointer");
            return MotlabStatus::NullArgument;
        }
        let k = inst.shape().k;
        if witness_len > 0 && witness.is_null() {
            set_error("witness buffer is null");
            return MotlabStatus::NullArgument;
        }
        if witness_len != 0 && witness_len < k {
            set_error(format!("witness buffer holds {witness_len} entries, need {k}"));
            return MotlabStatus::InvalidInput;
        }
        let p = inst.weights_or_zero();
        let result = match method {
            MotlabMinMethod::Bruteforce => min_bruteforce(&inst.cost, &p),
            MotlabMinMethod::MotExact => min_via_mot_exact(&inst.cost, &p).map(|r| r.result),
        };
        match result {
            Ok(m) => {
                *value = m.value;
                if witness_len > 0 {
                    std::slice::from_raw_parts_mut(witness, k).copy_from_slice(m.witness.as_slice());
                }
                MotlabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn motlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
