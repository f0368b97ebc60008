use std::ffi::{CStr, CString};
use std::ptr;

use lightcone_ffi::*;

fn last_error() -> String {
    let len = lc_last_error_length();
    let mut buf = vec![0 as std::ffi::c_char; len.max(1)];
    unsafe { lc_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn worked() -> *mut LcParams {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { lc_params_worked(&mut h) }, LcStatus::Ok);
    h
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(lc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn worked_set_classifies_bounded_and_has_witness() {
    let h = worked();
    assert_eq!(unsafe { lc_params_n(h) }, 2);
    let mut verdict = LcVerdict::Unbounded;
    assert_eq!(unsafe { lc_classify(h, &mut verdict) }, LcStatus::Ok);
    assert_eq!(verdict, LcVerdict::Bounded);

    let mut w = ptr::null_mut();
    assert_eq!(unsafe { lc_witness_new(h, &mut w) }, LcStatus::Ok);
    let (mut t, mut lo, mut hi) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { lc_witness_t(w, &mut t, &mut lo, &mut hi) }, LcStatus::Ok);
    assert!(lo < t && t < hi);
    assert_eq!(unsafe { lc_witness_identities_hold(w) }, 1);
    let (mut r, mut l) = ([0.0; 2], [0.0; 2]);
    assert_eq!(unsafe { lc_witness_exponents(w, r.as_mut_ptr(), l.as_mut_ptr(), 2) }, LcStatus::Ok);
    assert_eq!(unsafe { lc_witness_exponents(w, r.as_mut_ptr(), l.as_mut_ptr(), 1) }, LcStatus::BufferTooSmall);
    unsafe {
        lc_witness_free(w);
        lc_params_free(h);
    }
}

#[test]
fn forced_exponent_fills_missing_c() {
    let zero = [0.0];
    let mut h = ptr::null_mut();
    let st = unsafe { lc_params_new(1, 2.0, 2.0, zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, LcStatus::Ok);
    let mut c = [0.0];
    assert_eq!(unsafe { lc_params_c(h, c.as_mut_ptr(), 1) }, LcStatus::Ok);
    // a + b + n + 1 + (β + n + 1)/q - (α + n + 1)/p at n = 1, p = q
    assert!((c[0] - 2.0).abs() < 1e-12);
    unsafe { lc_params_free(h) };
}

#[test]
fn invalid_input_sets_status_and_message() {
    let zero = [0.0];
    let mut h = ptr::null_mut();
    let st = unsafe { lc_params_new(1, 0.5, 2.0, zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, LcStatus::InvalidInput);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    let st = unsafe { lc_params_new(1, 2.0, 2.0, ptr::null(), zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), ptr::null(), &mut h) };
    assert_eq!(st, LcStatus::NullPointer);
    assert!(last_error().contains("alpha"));

    let mut v = LcVerdict::Bounded;
    assert_eq!(unsafe { lc_classify(ptr::null(), &mut v) }, LcStatus::NullPointer);
    unsafe {
        lc_params_free(ptr::null_mut());
        lc_witness_free(ptr::null_mut());
        lc_audit_free(ptr::null_mut());
        lc_scaling_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates() {
    let mut v = LcVerdict::Bounded;
    unsafe { lc_classify(ptr::null(), &mut v) };
    let mut buf = [0 as std::ffi::c_char; 4];
    assert_eq!(unsafe { lc_last_error_message(buf.as_mut_ptr(), 4) }, LcStatus::BufferTooSmall);
    assert_eq!(buf[3], 0);
}

#[test]
fn infeasible_witness_reports_status() {
    // sufficient conditions fail: c = 0 < n
    let zero = [0.0];
    let mut h = ptr::null_mut();
    let st = unsafe { lc_params_new(1, 2.0, 2.0, zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), zero.as_ptr(), &mut h) };
    assert_eq!(st, LcStatus::Ok);
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { lc_witness_new(h, &mut w) }, LcStatus::Infeasible);
    assert!(w.is_null());
    unsafe { lc_params_free(h) };
}

#[test]
fn tube_abs_closed_at_n1() {
    // ∫_0^∞ ∫_R (u² + (1 + v)²)^{-3/2} du dv = ∫_0^∞ 2 (1 + v)^{-2} dv = 2
    let (l, r, x, y) = ([0.0], [3.0], [0.0], [1.0]);
    let (mut stated, mut v) = (0.0, 0.0);
    assert_eq!(unsafe { lc_tube_abs_closed(1, l.as_ptr(), r.as_ptr(), x.as_ptr(), y.as_ptr(), &mut stated, &mut v) }, LcStatus::Ok);
    assert!((v - 2.0).abs() < 1e-12, "{v}");
    assert!(stated.is_finite() && stated > 0.0);
    let y_out = [-1.0];
    assert_eq!(
        unsafe { lc_tube_abs_closed(1, l.as_ptr(), r.as_ptr(), x.as_ptr(), y_out.as_ptr(), &mut stated, &mut v) },
        LcStatus::OutsideDomain
    );
}

#[test]
fn audit_from_json() {
    let case =
        r#"{"id":"LaplacePower","indices":[{"entries":[0.5],"convention":"Plain"}],"point":{"kind":"cone","point":{"coords":[1.3]}}}"#;
    let c = CString::new(case).unwrap();
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { lc_audit_case_json(c.as_ptr(), 50_000, 7, &mut a) }, LcStatus::Ok, "{}", last_error());
    let mut status = LcAuditStatus::Mismatch;
    let mut z = f64::NAN;
    assert_eq!(unsafe { lc_audit_status(a, &mut status, &mut z) }, LcStatus::Ok);
    assert_eq!(status, LcAuditStatus::Confirmed);
    let (mut lr, mut li, mut se, mut rr, mut ri) = (0.0, 0.0, 0.0, 0.0, 0.0);
    assert_eq!(unsafe { lc_audit_values(a, &mut lr, &mut li, &mut se, &mut rr, &mut ri) }, LcStatus::Ok);
    assert!((lr - rr).abs() <= 4.0 * se);
    unsafe { lc_audit_free(a) };

    let bad = CString::new("{").unwrap();
    assert_eq!(unsafe { lc_audit_case_json(bad.as_ptr(), 10, 1, &mut a) }, LcStatus::InvalidInput);
}

#[test]
fn scaling_difference_vanishes_on_worked_set() {
    let h = worked();
    let (l, r, grid) = ([2.0, 2.0], [4.0, 4.0], [1.0, 2.0, 4.0, 8.0]);
    let mut s = ptr::null_mut();
    let st = unsafe { lc_scaling_new(h, l.as_ptr(), r.as_ptr(), grid.as_ptr(), 4, 20_000, 11, &mut s) };
    assert_eq!(st, LcStatus::Ok, "{}", last_error());
    for j in 0..2 {
        let (mut d, mut se, mut ok) = (0.0, 0.0, 0);
        assert_eq!(unsafe { lc_scaling_difference(s, j, &mut d, &mut se, &mut ok) }, LcStatus::Ok);
        assert_eq!(ok, 1, "coordinate {j}: {d} ± {se}");
    }
    let (mut d, mut se, mut ok) = (0.0, 0.0, 0);
    assert_eq!(unsafe { lc_scaling_difference(s, 2, &mut d, &mut se, &mut ok) }, LcStatus::InvalidInput);
    unsafe {
        lc_scaling_free(s);
        lc_params_free(h);
    }
}
