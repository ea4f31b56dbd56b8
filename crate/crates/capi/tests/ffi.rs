//! Exercises the C ABI through the exported extern functions, the same
//! way a foreign binding would call them.

use recbound_capi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(rb_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn load(name: &str) -> *mut RbSpec {
    let mut spec: *mut RbSpec = ptr::null_mut();
    let status = unsafe { rb_spec_preset(c(name).as_ptr(), &mut spec) };
    assert_eq!(status, RbStatus::RbStatusOk, "{}", last_error());
    assert!(!spec.is_null());
    spec
}

#[test]
fn preset_bound_lifecycle() {
    let spec = load("bst-height");
    let mut out = RbBound {
        threshold: 0.0,
        bound: 0.0,
        raw: 0.0,
        case_tag: RbCase::RbCaseGeneral,
        theorem: RbTheorem::RbTheoremSpan,
    };
    let status = unsafe { rb_bound_w(spec, 256.0, 40, &mut out) };
    assert_eq!(status, RbStatus::RbStatusOk);
    let log87 = 256f64.ln() / (8.0f64 / 7.0).ln();
    assert!((out.threshold - (log87 + 41.0)).abs() < 1e-9);
    let raw = 256.0 * 0.875f64.powi(40);
    assert!((out.raw - raw).abs() < 1e-9 * raw);
    assert_eq!(out.bound, 1.0); // clamped
    assert_eq!(out.case_tag, RbCase::RbCaseSimplifiedW);
    assert_eq!(out.theorem, RbTheorem::RbTheoremSpan);
    unsafe { rb_spec_free(spec) };
}

#[test]
fn json_spec_and_general_threshold() {
    let json = c(r#"{"name": "halving", "kind": "unary", "d": 1,
        "toll": [[0, true, "0"], [1, "1"]], "shrink": "x/2"}"#);
    let mut spec: *mut RbSpec = ptr::null_mut();
    let status = unsafe { rb_spec_from_json(json.as_ptr(), &mut spec) };
    assert_eq!(status, RbStatus::RbStatusOk, "{}", last_error());

    let mut u = 0.0f64;
    assert_eq!(unsafe { rb_solve_u(spec, 8.0, &mut u) }, RbStatus::RbStatusOk);
    assert_eq!(u, 3.0);

    let mut x = 0.0f64;
    assert_eq!(unsafe { rb_invert_u(spec, 3.0, &mut x) }, RbStatus::RbStatusOk);
    assert!((x - 4.0).abs() < 1e-6);

    let mut out = RbBound {
        threshold: 0.0,
        bound: 0.0,
        raw: 0.0,
        case_tag: RbCase::RbCaseGeneral,
        theorem: RbTheorem::RbTheoremKarpUnary,
    };
    // r = u(8) + 4 gives (1/2)^4.
    assert_eq!(unsafe { rb_bound_r(spec, 7.0, 8.0, &mut out) }, RbStatus::RbStatusOk);
    assert!((out.bound - 1.0 / 16.0).abs() < 1e-12);
    assert_eq!(out.theorem, RbTheorem::RbTheoremKarpUnary);
    unsafe { rb_spec_free(spec) };
}

#[test]
fn validation_report_string() {
    let json = c(r#"{"name": "bad", "kind": "span", "d": 1,
        "toll": [[0, "0"], [1, "1"]], "shrink": "sqrt(x)", "g1": "x"}"#);
    let mut spec: *mut RbSpec = ptr::null_mut();
    assert_eq!(
        unsafe { rb_spec_from_json(json.as_ptr(), &mut spec) },
        RbStatus::RbStatusOk
    );
    let mut ok = true;
    let mut report: *mut i8 = ptr::null_mut();
    let status = unsafe { rb_spec_validate(spec, &mut ok, (&mut report as *mut *mut i8).cast()) };
    assert_eq!(status, RbStatus::RbStatusOk);
    assert!(!ok, "sqrt shrink must fail validation");
    assert!(!report.is_null());
    let text = unsafe { CStr::from_ptr(report) }.to_string_lossy().into_owned();
    assert!(text.contains("shrink ratio non-decreasing"), "{text}");
    unsafe { rb_string_free(report.cast()) };
    unsafe { rb_spec_free(spec) };
}

#[test]
fn error_paths_and_messages() {
    let mut spec: *mut RbSpec = ptr::null_mut();
    let status = unsafe { rb_spec_preset(c("nope").as_ptr(), &mut spec) };
    assert_eq!(status, RbStatus::RbStatusUnknownPreset);
    assert!(last_error().contains("nope"));

    let status = unsafe { rb_spec_preset(ptr::null(), &mut spec) };
    assert_eq!(status, RbStatus::RbStatusNullPointer);

    let status = unsafe { rb_spec_from_json(c("{oops").as_ptr(), &mut spec) };
    assert_eq!(status, RbStatus::RbStatusParseError);

    // Hypothesis violation: w = 0.
    let spec = load("quicksort-work");
    let mut out = RbBound {
        threshold: 0.0,
        bound: 0.0,
        raw: 0.0,
        case_tag: RbCase::RbCaseGeneral,
        theorem: RbTheorem::RbTheoremWork,
    };
    let status = unsafe { rb_bound_w(spec, 128.0, 0, &mut out) };
    assert_eq!(status, RbStatus::RbStatusHypothesisViolated);
    unsafe { rb_spec_free(spec) };

    // Freeing null is a no-op.
    unsafe { rb_spec_free(ptr::null_mut()) };
    unsafe { rb_string_free(ptr::null_mut()) };
}

#[test]
fn expected_work_and_expectation_bound() {
    assert!((rb_quicksort_expected_work(3) - 8.0 / 3.0).abs() < 1e-12);
    assert_eq!(rb_quicksort_expected_work(1), 0.0);

    let mut out = RbBound {
        threshold: 0.0,
        bound: 0.0,
        raw: 0.0,
        case_tag: RbCase::RbCaseGeneral,
        theorem: RbTheorem::RbTheoremKarpWork15,
    };
    let status = unsafe { rb_karp_expectation_bound(10.0, 2.0, &mut out) };
    assert_eq!(status, RbStatus::RbStatusOk);
    assert_eq!(out.threshold, 30.0);
    assert!((out.bound - (-2.0f64).exp()).abs() < 1e-15);
    assert_eq!(out.theorem, RbTheorem::RbTheoremKarpWork15);
}

#[test]
fn simulate_tail_matches_exact_small_case() {
    let mut tail = 0.0f64;
    let mut ci = 0.0f64;
    let status = unsafe {
        rb_simulate_tail(
            c("quicksort").as_ptr(),
            3,
            c("work").as_ptr(),
            50_000,
            42,
            2.0,
            &mut tail,
            &mut ci,
        )
    };
    assert_eq!(status, RbStatus::RbStatusOk, "{}", last_error());
    assert!((tail - 2.0 / 3.0).abs() < 0.02, "tail {tail}");
    assert!(ci >= tail);

    let status = unsafe {
        rb_simulate_tail(
            c("no-such-model").as_ptr(),
            3,
            c("work").as_ptr(),
            10,
            42,
            2.0,
            &mut tail,
            &mut ci,
        )
    };
    assert_eq!(status, RbStatus::RbStatusUnknownName);

    let version = unsafe { CStr::from_ptr(rb_version()) }.to_str().unwrap();
    assert!(!version.is_empty());
}
