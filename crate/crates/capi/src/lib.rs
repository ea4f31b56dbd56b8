//! C ABI for the recbound toolkit.
//!
//! Conventions:
//!
//! * Specs are opaque handles (`RbSpec*`), created by `rb_spec_preset` or
//!   `rb_spec_from_json` and released with `rb_spec_free`.
//! * Every fallible call returns an [`RbStatus`]; results come back
//!   through out-parameters that are written only on `RB_STATUS_OK`.
//! * On failure, `rb_last_error()` returns a thread-local message valid
//!   until the next failing call on the same thread.
//! * Strings returned through `char**` out-parameters are owned by the
//!   caller and must be released with `rb_string_free`.
//!
//! The header `include/recbound.h` is generated by cbindgen at build time.

use recbound::bounds::{
    d_r, invert_u, karp_expectation_bound, karp_unary_bound, solve_u, span_bound, span_bound_w,
    work_bound, work_bound_w, BoundError, BoundValue, CaseTag, Theorem,
};
use recbound::mcsim::{model_preset, run_trials, tail_prob, Metric, SimError};
use recbound::recspec::{preset, validate_spec, Kind, RecurrenceSpec, SpecError};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    RbStatusOk = 0,
    RbStatusNullPointer = 1,
    RbStatusInvalidUtf8 = 2,
    RbStatusParseError = 3,
    RbStatusUnknownPreset = 4,
    RbStatusUnknownName = 5,
    RbStatusHypothesisViolated = 6,
    RbStatusDomainError = 7,
    RbStatusNoContraction = 8,
    RbStatusUnboundedU = 9,
    RbStatusSimulationError = 10,
    RbStatusInternalPanic = 11,
}

use RbStatus::*;

/// Which case of the bound function fired (mirrors the library enum).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbCase {
    RbCaseRLeUd = 0,
    RbCaseBelowD = 1,
    RbCaseUGeR = 2,
    RbCaseGeneral = 3,
    RbCaseSimplifiedW = 4,
}

/// Which theorem-level bound produced a value.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbTheorem {
    RbTheoremKarpUnary = 0,
    RbTheoremKarpWork15 = 1,
    RbTheoremSpan = 2,
    RbTheoremWork = 3,
}

/// An evaluated tail bound: `P[cost > threshold] <= bound`, with the
/// pre-clamp value in `raw` so vacuous bounds stay visible.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RbBound {
    pub threshold: f64,
    pub bound: f64,
    pub raw: f64,
    pub case_tag: RbCase,
    pub theorem: RbTheorem,
}

/// Opaque recurrence specification handle.
pub struct RbSpec {
    inner: RecurrenceSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned: Vec<u8> = msg.bytes().filter(|&b| b != 0).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn fail(status: RbStatus, msg: &str) -> RbStatus {
    set_error(msg);
    status
}

fn spec_status(e: &SpecError) -> RbStatus {
    match e {
        SpecError::UnknownPreset(_) => RbStatusUnknownPreset,
        SpecError::Json(_) | SpecError::Expr { .. } | SpecError::Piecewise { .. } => {
            RbStatusParseError
        }
        SpecError::MissingG2(_) => RbStatusHypothesisViolated,
        SpecError::Eval(_) => RbStatusDomainError,
    }
}

fn bound_status(e: &BoundError) -> RbStatus {
    match e {
        BoundError::ZeroToll { .. } | BoundError::Hypothesis(_) => RbStatusHypothesisViolated,
        BoundError::NoContraction { .. } => RbStatusNoContraction,
        BoundError::UnboundedU { .. } => RbStatusUnboundedU,
        BoundError::Spec(e) => spec_status(e),
        BoundError::Eval(_) => RbStatusDomainError,
    }
}

fn guard(f: impl FnOnce() -> RbStatus) -> RbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(RbStatusInternalPanic, "internal panic across FFI boundary"),
    }
}

/// SAFETY: `ptr` must be null or a NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, RbStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(RbStatusNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        RbStatusInvalidUtf8
    })
}

fn write_bound(out: *mut RbBound, b: &BoundValue) -> RbStatus {
    if out.is_null() {
        return fail(RbStatusNullPointer, "null out parameter");
    }
    let case_tag = match b.case {
        CaseTag::RLeUd => RbCase::RbCaseRLeUd,
        CaseTag::BelowD => RbCase::RbCaseBelowD,
        CaseTag::UGeR => RbCase::RbCaseUGeR,
        CaseTag::General => RbCase::RbCaseGeneral,
        CaseTag::SimplifiedW => RbCase::RbCaseSimplifiedW,
    };
    let theorem = match b.theorem {
        Theorem::KarpUnary => RbTheorem::RbTheoremKarpUnary,
        Theorem::KarpWork15 => RbTheorem::RbTheoremKarpWork15,
        Theorem::Span => RbTheorem::RbTheoremSpan,
        Theorem::Work => RbTheorem::RbTheoremWork,
    };
    unsafe {
        *out = RbBound {
            threshold: b.threshold,
            bound: b.bound,
            raw: b.raw,
            case_tag,
            theorem,
        };
    }
    RbStatusOk
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static string.
#[no_mangle]
pub extern "C" fn rb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned through a `char**` out-parameter.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library.
#[no_mangle]
pub unsafe extern "C" fn rb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a shipped preset (`quicksort-span`, `quicksort-work`,
/// `bst-height`, `unary-halving`) into a new handle.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_spec_preset(name: *const c_char, out: *mut *mut RbSpec) -> RbStatus {
    guard(|| {
        let name = match read_str(name) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(RbStatusNullPointer, "null out parameter");
        }
        match preset(name) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RbSpec { inner }));
                RbStatusOk
            }
            Err(e) => fail(spec_status(&e), &e.to_string()),
        }
    })
}

/// Parse a JSON recurrence spec (same format the CLI accepts).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_spec_from_json(
    json: *const c_char,
    out: *mut *mut RbSpec,
) -> RbStatus {
    guard(|| {
        let json = match read_str(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(RbStatusNullPointer, "null out parameter");
        }
        match RecurrenceSpec::from_json_str(json) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RbSpec { inner }));
                RbStatusOk
            }
            Err(e) => fail(spec_status(&e), &e.to_string()),
        }
    })
}

/// Release a spec handle.
///
/// # Safety
/// `spec` must be null or a handle from `rb_spec_preset`/`rb_spec_from_json`.
#[no_mangle]
pub unsafe extern "C" fn rb_spec_free(spec: *mut RbSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

unsafe fn deref_spec<'a>(spec: *const RbSpec) -> Result<&'a RecurrenceSpec, RbStatus> {
    if spec.is_null() {
        set_error("null spec handle");
        return Err(RbStatusNullPointer);
    }
    Ok(&(*spec).inner)
}

/// Run the hypothesis checks. `*out_ok` is set to true when every
/// error-severity check passed; the full report text is returned through
/// `out_report` when it is non-null (release with `rb_string_free`).
///
/// # Safety
/// `spec` must be a valid handle; `out_ok` must be a valid pointer;
/// `out_report` may be null.
#[no_mangle]
pub unsafe extern "C" fn rb_spec_validate(
    spec: *const RbSpec,
    out_ok: *mut bool,
    out_report: *mut *mut c_char,
) -> RbStatus {
    guard(|| {
        let spec = match deref_spec(spec) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out_ok.is_null() {
            return fail(RbStatusNullPointer, "null out parameter");
        }
        let report = validate_spec(spec);
        *out_ok = report.ok();
        if !out_report.is_null() {
            let text = report.to_string();
            match CString::new(text) {
                Ok(c) => *out_report = c.into_raw(),
                Err(_) => *out_report = ptr::null_mut(),
            }
        }
        RbStatusOk
    })
}

/// Natural-threshold bound at `r = u(x) + w * toll_eff(x)`, dispatched on
/// the spec kind (unary / span / work).
///
/// # Safety
/// `spec` must be a valid handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_bound_w(
    spec: *const RbSpec,
    x: f64,
    w: u32,
    out: *mut RbBound,
) -> RbStatus {
    guard(|| {
        let spec = match deref_spec(spec) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let result = match spec.kind {
            Kind::Unary => karp_unary_bound(spec, x, w),
            Kind::Span => span_bound_w(spec, x, w),
            Kind::Work => work_bound_w(spec, x, w),
        };
        match result {
            Ok(b) => write_bound(out, &b),
            Err(e) => fail(bound_status(&e), &e.to_string()),
        }
    })
}

/// General-threshold bound `P[cost > r]`, dispatched on the spec kind.
///
/// # Safety
/// `spec` must be a valid handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_bound_r(
    spec: *const RbSpec,
    r: f64,
    x: f64,
    out: *mut RbBound,
) -> RbStatus {
    guard(|| {
        let spec = match deref_spec(spec) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let result = match spec.kind {
            Kind::Unary => d_r(spec, r, x),
            Kind::Span => span_bound(spec, r, x),
            Kind::Work => work_bound(spec, r, x),
        };
        match result {
            Ok(b) => write_bound(out, &b),
            Err(e) => fail(bound_status(&e), &e.to_string()),
        }
    })
}

/// Minimal solution of the companion recurrence by iteration.
///
/// # Safety
/// `spec` must be a valid handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_solve_u(spec: *const RbSpec, x: f64, out: *mut f64) -> RbStatus {
    guard(|| {
        let spec = match deref_spec(spec) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(RbStatusNullPointer, "null out parameter");
        }
        match solve_u(spec, x) {
            Ok(v) => {
                *out = v;
                RbStatusOk
            }
            Err(e) => fail(bound_status(&e), &e.to_string()),
        }
    })
}

/// Smallest `x` with `u(x) >= y`; arguments at or below `u(d)` clamp to `d`.
///
/// # Safety
/// `spec` must be a valid handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_invert_u(spec: *const RbSpec, y: f64, out: *mut f64) -> RbStatus {
    guard(|| {
        let spec = match deref_spec(spec) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(RbStatusNullPointer, "null out parameter");
        }
        match invert_u(spec, y) {
            Ok(v) => {
                *out = v;
                RbStatusOk
            }
            Err(e) => fail(bound_status(&e), &e.to_string()),
        }
    })
}

/// Expected quicksort comparison count `2((n+1)(H_n - 1) - (n - 1))`.
#[no_mangle]
pub extern "C" fn rb_quicksort_expected_work(n: u64) -> f64 {
    recbound::quicksort_expected_work(n)
}

/// Expectation-based bound `P[W >= (w+1) E[W]] < e^-w` for positive `w`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_karp_expectation_bound(
    expected_work: f64,
    w: f64,
    out: *mut RbBound,
) -> RbStatus {
    guard(|| match karp_expectation_bound(expected_work, w) {
        Ok(b) => write_bound(out, &b),
        Err(e) => fail(bound_status(&e), &e.to_string()),
    })
}

/// Simulate a shipped process model (`quicksort`, `bst`, `unary-uniform`)
/// and report the strict empirical tail `P[X > r]` together with its
/// one-sided 99% Wilson upper confidence bound.
///
/// # Safety
/// `model` and `metric` must be NUL-terminated strings; `out_tail` and
/// `out_ci_upper` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rb_simulate_tail(
    model: *const c_char,
    n: u64,
    metric: *const c_char,
    trials: u64,
    seed: u64,
    r: f64,
    out_tail: *mut f64,
    out_ci_upper: *mut f64,
) -> RbStatus {
    guard(|| {
        let model_name = match read_str(model) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let metric_name = match read_str(metric) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out_tail.is_null() || out_ci_upper.is_null() {
            return fail(RbStatusNullPointer, "null out parameter");
        }
        let model = match model_preset(model_name) {
            Ok(m) => m,
            Err(e) => return fail(RbStatusUnknownName, &e.to_string()),
        };
        let metric = match Metric::parse(metric_name) {
            Some(m) => m,
            None => {
                return fail(
                    RbStatusUnknownName,
                    &format!("unknown metric `{metric_name}`"),
                )
            }
        };
        match run_trials(&model, n, metric, trials, seed) {
            Ok(dist) => {
                let t = tail_prob(&dist, r);
                *out_tail = t.prob;
                *out_ci_upper = t.ci99_upper.unwrap_or(t.prob);
                RbStatusOk
            }
            Err(e @ SimError::UnknownModel(_)) => fail(RbStatusUnknownName, &e.to_string()),
            Err(e) => fail(RbStatusSimulationError, &e.to_string()),
        }
    })
}
