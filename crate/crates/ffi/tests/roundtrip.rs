//! Exercises the C ABI from Rust: ownership transfer, status codes, and the
//! thread-local error channel.

use std::ffi::{CStr, CString};

use dkp_ffi::{
    dkp_abi_version, dkp_curve_coeff, dkp_curve_compute, dkp_curve_free, dkp_curve_genus,
    dkp_curve_support_len, dkp_flow_integrate, dkp_last_error, dkp_sign_tables_at, dkp_state_dims,
    dkp_state_free, dkp_state_from_json, dkp_state_random, dkp_state_special, dkp_state_to_json,
    dkp_string_free, DkpCurve, DkpState, DkpStatus,
};

fn last_error_text() -> String {
    let ptr = dkp_last_error();
    assert!(!ptr.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned()
}

#[test]
fn abi_version_is_stable() {
    assert_eq!(dkp_abi_version(), 1);
}

#[test]
fn state_json_round_trip_is_exact() {
    unsafe {
        let mut state: *mut DkpState = std::ptr::null_mut();
        assert_eq!(dkp_state_random(3, 2, 7, &mut state), DkpStatus::Ok);
        assert!(!state.is_null());

        let json1 = dkp_state_to_json(state);
        assert!(!json1.is_null());
        let text1 = CStr::from_ptr(json1).to_str().unwrap().to_owned();

        let mut back: *mut DkpState = std::ptr::null_mut();
        let c_text = CString::new(text1.clone()).unwrap();
        assert_eq!(
            dkp_state_from_json(c_text.as_ptr(), &mut back),
            DkpStatus::Ok
        );

        let json2 = dkp_state_to_json(back);
        assert_eq!(CStr::from_ptr(json2).to_str().unwrap(), text1);

        let (mut n, mut m) = (0usize, 0usize);
        assert_eq!(dkp_state_dims(back, &mut n, &mut m), DkpStatus::Ok);
        assert_eq!((n, m), (3, 2));

        dkp_string_free(json1);
        dkp_string_free(json2);
        dkp_state_free(state);
        dkp_state_free(back);
    }
}

#[test]
fn curve_handle_exposes_coefficients_and_genus() {
    unsafe {
        let mut state: *mut DkpState = std::ptr::null_mut();
        assert_eq!(dkp_state_random(3, 2, 7, &mut state), DkpStatus::Ok);
        let mut curve: *mut DkpCurve = std::ptr::null_mut();
        assert_eq!(dkp_curve_compute(state, &mut curve), DkpStatus::Ok);

        // top beta coefficient is exactly one for this torus size
        let (mut re, mut im) = (0.0f64, 0.0f64);
        assert_eq!(
            dkp_curve_coeff(curve, 0, 3, &mut re, &mut im),
            DkpStatus::Ok
        );
        assert!(
            (re - 1.0).abs() < 1e-10 && im.abs() < 1e-10,
            "got {re} + {im}i"
        );

        assert_eq!(dkp_curve_support_len(curve), 10);

        let (mut interior, mut expected) = (0usize, 0usize);
        let mut generic = false;
        assert_eq!(
            dkp_curve_genus(curve, &mut interior, &mut expected, &mut generic),
            DkpStatus::Ok
        );
        assert_eq!(interior, 4);
        assert_eq!(expected, 4);
        assert!(generic);

        // out-of-range exponent is rejected, not clamped
        assert_eq!(
            dkp_curve_coeff(curve, 5, 0, &mut re, &mut im),
            DkpStatus::InvalidInput
        );
        assert!(last_error_text().contains("exponent"));

        dkp_curve_free(curve);
        dkp_state_free(state);
    }
}

#[test]
fn special_state_has_three_support_points() {
    unsafe {
        let mut state: *mut DkpState = std::ptr::null_mut();
        assert_eq!(dkp_state_special(3, 2, &mut state), DkpStatus::Ok);
        let mut curve: *mut DkpCurve = std::ptr::null_mut();
        assert_eq!(dkp_curve_compute(state, &mut curve), DkpStatus::Ok);
        assert_eq!(dkp_curve_support_len(curve), 3);
        dkp_curve_free(curve);
        dkp_state_free(state);
    }
}

#[test]
fn flow_integration_conserves_and_returns_new_state() {
    unsafe {
        let mut state: *mut DkpState = std::ptr::null_mut();
        assert_eq!(dkp_state_random(3, 2, 1, &mut state), DkpStatus::Ok);
        let mut end: *mut DkpState = std::ptr::null_mut();
        let mut drift = f64::NAN;
        assert_eq!(
            dkp_flow_integrate(state, 1e-3, 100, 10, &mut end, &mut drift),
            DkpStatus::Ok
        );
        assert!(!end.is_null());
        assert!(drift.is_finite() && drift < 1e-8, "drift {drift}");

        let a = dkp_state_to_json(state);
        let b = dkp_state_to_json(end);
        assert_ne!(
            CStr::from_ptr(a).to_bytes(),
            CStr::from_ptr(b).to_bytes(),
            "integration should move the state"
        );
        dkp_string_free(a);
        dkp_string_free(b);

        // bad parameters are rejected before any work happens
        assert_eq!(
            dkp_flow_integrate(state, -1.0, 100, 10, &mut end, &mut drift),
            DkpStatus::InvalidInput
        );

        dkp_state_free(state);
        dkp_state_free(end);
    }
}

#[test]
fn sign_tables_match_the_derived_values() {
    unsafe {
        let (mut k, mut r, mut p) = (0i8, 0i8, 0i8);
        assert_eq!(
            dkp_sign_tables_at(3, 2, 1, 1, &mut k, &mut r, &mut p),
            DkpStatus::Ok
        );
        assert_eq!((k, r, p), (1, 0, 1));
        // indices wrap on the torus
        assert_eq!(
            dkp_sign_tables_at(3, 2, -2, 3, &mut k, &mut r, &mut p),
            DkpStatus::Ok
        );
        assert_eq!((k, r, p), (1, 0, 1));
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut state: *mut DkpState = std::ptr::null_mut();
        assert_eq!(
            dkp_state_random(4, 2, 0, &mut state),
            DkpStatus::InvalidInput
        );
        assert!(state.is_null());
        assert!(last_error_text().contains("gcd"));

        let junk = CString::new("{not json").unwrap();
        assert_eq!(
            dkp_state_from_json(junk.as_ptr(), &mut state),
            DkpStatus::InvalidInput
        );

        assert_eq!(
            dkp_state_random(3, 2, 0, std::ptr::null_mut()),
            DkpStatus::NullPointer
        );

        assert_eq!(dkp_curve_support_len(std::ptr::null()), 0);
        assert!(dkp_state_to_json(std::ptr::null()).is_null());

        // frees ignore null
        dkp_state_free(std::ptr::null_mut());
        dkp_string_free(std::ptr::null_mut());
    }
}
