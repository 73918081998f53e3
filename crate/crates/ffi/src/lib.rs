//! C ABI over the lattice-system library.
//!
//! Every object crosses the boundary as an opaque pointer owned by this
//! library; every fallible call returns a status code and records a
//! thread-local message readable through `dkp_last_error`. Strings returned
//! as `char*` are owned by the caller and must go back through
//! `dkp_string_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use dkp_core::{
    build_kappa, build_phi, build_rho, curve_polynomial, expected_genus, integrate, newton_genus,
    random_state_default, special_state, state_from_json, state_to_json, CurvePolynomial, Error,
    LatticeState, NewtonPolygon,
};

/// Opaque handle to a lattice state.
pub struct DkpState(LatticeState);

/// Opaque handle to an extracted spectral curve and its Newton polygon.
pub struct DkpCurve {
    curve: CurvePolynomial,
    polygon: NewtonPolygon,
    interior: usize,
}

/// Result of any fallible call across the boundary.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DkpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Input data violated a structural constraint (dimensions, fields, JSON).
    InvalidInput = 2,
    /// The computation failed numerically (blow-up, degenerate spectrum).
    Numerical = 3,
    /// An internal panic was caught at the boundary.
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: DkpStatus, msg: String) -> DkpStatus {
    let text = CString::new(msg).unwrap_or_else(|_| CString::new("error text had NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
    status
}

fn fail_err(err: &Error) -> DkpStatus {
    let status = match err {
        Error::InvalidTorus { .. }
        | Error::InvalidEntry { .. }
        | Error::MalformedState(_)
        | Error::UnsupportedVersion(_)
        | Error::Io(_)
        | Error::Parse(_)
        | Error::DimensionMismatch { .. }
        | Error::AlphaZero => DkpStatus::InvalidInput,
        _ => DkpStatus::Numerical,
    };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> DkpStatus) -> DkpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(
            DkpStatus::Panic,
            "internal panic caught at the boundary".into(),
        ),
    }
}

/// ABI revision of this header/library pair.
#[no_mangle]
pub extern "C" fn dkp_abi_version() -> u32 {
    1
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dkp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |text| text.as_ptr())
    })
}

/// Seeded random state on an n x m torus (n, m coprime, both at least 2).
///
/// # Safety
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dkp_state_random(
    n: usize,
    m: usize,
    seed: u64,
    out: *mut *mut DkpState,
) -> DkpStatus {
    guard(|| {
        if out.is_null() {
            return fail(DkpStatus::NullPointer, "out pointer is null".into());
        }
        *out = std::ptr::null_mut();
        match random_state_default(n, m, seed) {
            Ok(state) => {
                *out = Box::into_raw(Box::new(DkpState(state)));
                DkpStatus::Ok
            }
            Err(e) => fail_err(&e),
        }
    })
}

/// The distinguished three-term-curve state on an n x m torus.
///
/// # Safety
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn dkp_state_special(
    n: usize,
    m: usize,
    out: *mut *mut DkpState,
) -> DkpStatus {
    guard(|| {
        if out.is_null() {
            return fail(DkpStatus::NullPointer, "out pointer is null".into());
        }
        *out = std::ptr::null_mut();
        match special_state(n, m) {
            Ok(state) => {
                *out = Box::into_raw(Box::new(DkpState(state)));
                DkpStatus::Ok
            }
            Err(e) => fail_err(&e),
        }
    })
}

/// Parse a state from its JSON form.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dkp_state_from_json(
    text: *const c_char,
    out: *mut *mut DkpState,
) -> DkpStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(DkpStatus::NullPointer, "text or out pointer is null".into());
        }
        *out = std::ptr::null_mut();
        let text = match CStr::from_ptr(text).to_str() {
            Ok(t) => t,
            Err(e) => return fail(DkpStatus::InvalidInput, format!("input is not UTF-8: {e}")),
        };
        match state_from_json(text) {
            Ok(state) => {
                *out = Box::into_raw(Box::new(DkpState(state)));
                DkpStatus::Ok
            }
            Err(e) => fail_err(&e),
        }
    })
}

/// Serialize a state to JSON. Returns null on error; free the result with
/// `dkp_string_free`.
///
/// # Safety
/// `state` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dkp_state_to_json(state: *const DkpState) -> *mut c_char {
    let result = catch_unwind(AssertUnwindSafe(|| {
        if state.is_null() {
            fail(DkpStatus::NullPointer, "state pointer is null".into());
            return std::ptr::null_mut();
        }
        let text = state_to_json(&(*state).0);
        match CString::new(text) {
            Ok(c) => c.into_raw(),
            Err(_) => {
                fail(DkpStatus::Panic, "serialized text had NUL".into());
                std::ptr::null_mut()
            }
        }
    }));
    result.unwrap_or_else(|_| {
        fail(
            DkpStatus::Panic,
            "internal panic caught at the boundary".into(),
        );
        std::ptr::null_mut()
    })
}

/// Torus dimensions of a state.
///
/// # Safety
/// All pointers must be valid; `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dkp_state_dims(
    state: *const DkpState,
    n: *mut usize,
    m: *mut usize,
) -> DkpStatus {
    guard(|| {
        if state.is_null() || n.is_null() || m.is_null() {
            return fail(DkpStatus::NullPointer, "null pointer argument".into());
        }
        *n = (*state).0.n();
        *m = (*state).0.m();
        DkpStatus::Ok
    })
}

/// Release a state handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a live handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dkp_state_free(state: *mut DkpState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `text` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dkp_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Interpolate the spectral-curve polynomial of a state.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dkp_curve_compute(
    state: *const DkpState,
    out: *mut *mut DkpCurve,
) -> DkpStatus {
    guard(|| {
        if state.is_null() || out.is_null() {
            return fail(
                DkpStatus::NullPointer,
                "state or out pointer is null".into(),
            );
        }
        *out = std::ptr::null_mut();
        match curve_polynomial(&(*state).0) {
            Ok(curve) => {
                let (polygon, interior) = newton_genus(&curve);
                *out = Box::into_raw(Box::new(DkpCurve {
                    curve,
                    polygon,
                    interior,
                }));
                DkpStatus::Ok
            }
            Err(e) => fail_err(&e),
        }
    })
}

/// Coefficient of α^i β^j; i in [−M, M], j in [0, N].
///
/// # Safety
/// All pointers must be valid; `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dkp_curve_coeff(
    curve: *const DkpCurve,
    i: i64,
    j: i64,
    re: *mut f64,
    im: *mut f64,
) -> DkpStatus {
    guard(|| {
        if curve.is_null() || re.is_null() || im.is_null() {
            return fail(DkpStatus::NullPointer, "null pointer argument".into());
        }
        let c = &(*curve).curve;
        let (n, m) = (c.n() as i64, c.m() as i64);
        if i.abs() > m || !(0..=n).contains(&j) {
            return fail(
                DkpStatus::InvalidInput,
                format!("exponent ({i},{j}) outside [-{m},{m}] x [0,{n}]"),
            );
        }
        let z = c.coeff(i, j);
        *re = z.re;
        *im = z.im;
        DkpStatus::Ok
    })
}

/// Number of coefficients above the structural-zero threshold (0 for null).
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dkp_curve_support_len(curve: *const DkpCurve) -> usize {
    catch_unwind(AssertUnwindSafe(|| {
        if curve.is_null() {
            return 0;
        }
        (*curve).curve.support().len()
    }))
    .unwrap_or(0)
}

/// Newton-polygon genus data: interior lattice-point count, the generic
/// expectation (N−1)M, and whether the support is generic.
///
/// # Safety
/// All pointers must be valid; `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dkp_curve_genus(
    curve: *const DkpCurve,
    interior: *mut usize,
    expected: *mut usize,
    generic_support: *mut bool,
) -> DkpStatus {
    guard(|| {
        if curve.is_null() || interior.is_null() || expected.is_null() || generic_support.is_null()
        {
            return fail(DkpStatus::NullPointer, "null pointer argument".into());
        }
        let handle = &*curve;
        *interior = handle.interior;
        *expected = expected_genus(handle.curve.n(), handle.curve.m());
        *generic_support = handle.polygon.has_generic_support();
        DkpStatus::Ok
    })
}

/// Release a curve handle. Null is ignored.
///
/// # Safety
/// `curve` must be null or a live handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dkp_curve_free(curve: *mut DkpCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Integrate the flow with fixed-step RK4, returning the final state and the
/// worst relative drift of any curve coefficient along the way.
///
/// # Safety
/// `state` must be a live handle; `out_state` and `out_max_drift` writable.
#[no_mangle]
pub unsafe extern "C" fn dkp_flow_integrate(
    state: *const DkpState,
    dt: f64,
    steps: usize,
    record_every: usize,
    out_state: *mut *mut DkpState,
    out_max_drift: *mut f64,
) -> DkpStatus {
    guard(|| {
        if state.is_null() || out_state.is_null() || out_max_drift.is_null() {
            return fail(DkpStatus::NullPointer, "null pointer argument".into());
        }
        *out_state = std::ptr::null_mut();
        if !(dt.is_finite() && dt > 0.0) || steps < 1 || record_every < 1 {
            return fail(
                DkpStatus::InvalidInput,
                format!("bad integration parameters: dt={dt}, steps={steps}, record_every={record_every}"),
            );
        }
        match integrate(&(*state).0, dt, steps, record_every) {
            Ok((end, report)) => {
                *out_state = Box::into_raw(Box::new(DkpState(end)));
                *out_max_drift = report.max_drift;
                DkpStatus::Ok
            }
            Err(e) => fail_err(&e),
        }
    })
}

/// The κ, ρ, φ sign-table values at one site of an n x m torus.
///
/// # Safety
/// The three output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dkp_sign_tables_at(
    n: usize,
    m: usize,
    site_n: i64,
    site_m: i64,
    kappa: *mut i8,
    rho: *mut i8,
    phi: *mut i8,
) -> DkpStatus {
    guard(|| {
        if kappa.is_null() || rho.is_null() || phi.is_null() {
            return fail(DkpStatus::NullPointer, "null pointer argument".into());
        }
        let k = match build_kappa(n, m) {
            Ok(t) => t,
            Err(e) => return fail_err(&e),
        };
        let r = match build_rho(n, m) {
            Ok(t) => t,
            Err(e) => return fail_err(&e),
        };
        let p = match build_phi(n, m) {
            Ok(t) => t,
            Err(e) => return fail_err(&e),
        };
        *kappa = k.at(site_n, site_m);
        *rho = r.at(site_n, site_m);
        *phi = p.at(site_n, site_m);
        DkpStatus::Ok
    })
}
