//! C ABI over the cut-off operators.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`H1cStatus`]; on failure `h1c_last_error` describes the most recent
//! error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use h1cutoff::nonlin::{f_eps, f_eps_derivative};
use h1cutoff::partition::certify;
use h1cutoff::{
    apply_cutoff, uniform_norm, weighted_norm, CutoffConfig, Error, Grid, GridFunction, PartitionPair,
    WeightedNormSpec,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H1cStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    CertificationFailed = 4,
    Panic = 5,
}

/// Sampled function on a uniform grid.
pub struct H1cFunction(GridFunction);

/// Cut-off operator at a fixed scale.
pub struct H1cCutoff(CutoffConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> H1cStatus {
    match e {
        Error::GridMismatch(_) => H1cStatus::GridMismatch,
        Error::Certification(_) => H1cStatus::CertificationFailed,
        _ => H1cStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic for `h1c_last_error`.
fn guard(f: impl FnOnce() -> Result<(), H1cStatus>) -> H1cStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            H1cStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            H1cStatus::Panic
        }
    }
}

fn fail(e: Error) -> H1cStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> H1cStatus {
    set_error(format!("{what} is null"));
    H1cStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, H1cStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), H1cStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn h1c_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a function on `[-half_length, half_length]` with `cells_per_unit`
/// cells per unit length from `len` interleaved samples
/// (`len = points * components`).
///
/// # Safety
/// `samples` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_function_new(
    half_length: usize,
    cells_per_unit: usize,
    components: usize,
    samples: *const f64,
    len: usize,
    out: *mut *mut H1cFunction,
) -> H1cStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null("samples"));
        }
        let grid = Grid::new(half_length, cells_per_unit).map_err(fail)?;
        let data = std::slice::from_raw_parts(samples, len).to_vec();
        let f = GridFunction::from_samples(grid, components, data).map_err(fail)?;
        store(out, H1cFunction(f))
    })
}

/// # Safety
/// `f` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn h1c_function_free(f: *mut H1cFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of stored doubles (`points * components`).
///
/// # Safety
/// `f` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_function_len(f: *const H1cFunction, len: *mut usize) -> H1cStatus {
    guard(|| {
        let f = deref(f, "function")?;
        if len.is_null() {
            return Err(null("len"));
        }
        *len = f.0.samples().len();
        Ok(())
    })
}

/// Copies the samples into `buf`, which must hold exactly
/// `h1c_function_len` doubles.
///
/// # Safety
/// `f` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn h1c_function_samples(f: *const H1cFunction, buf: *mut f64, len: usize) -> H1cStatus {
    guard(|| {
        let f = deref(f, "function")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let s = f.0.samples();
        if len != s.len() {
            set_error(format!("buffer holds {len} values, function has {}", s.len()));
            return Err(H1cStatus::InvalidArgument);
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(s);
        Ok(())
    })
}

/// Cut-off with the standard partition pair at scale `epsilon`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_cutoff_new(epsilon: f64, out: *mut *mut H1cCutoff) -> H1cStatus {
    guard(|| {
        let cfg = CutoffConfig::standard(epsilon).map_err(fail)?;
        store(out, H1cCutoff(cfg))
    })
}

/// # Safety
/// `c` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn h1c_cutoff_free(c: *mut H1cCutoff) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

unsafe fn unary(
    u: *const H1cFunction,
    c: *const H1cCutoff,
    out: *mut *mut H1cFunction,
    op: fn(&GridFunction, &CutoffConfig) -> h1cutoff::Result<GridFunction>,
) -> H1cStatus {
    guard(|| {
        let u = deref(u, "u")?;
        let c = deref(c, "cutoff")?;
        let r = op(&u.0, &c.0).map_err(fail)?;
        store(out, H1cFunction(r))
    })
}

/// `chi_eps(u)` as a new handle.
///
/// # Safety
/// `u` and `c` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_apply_cutoff(
    u: *const H1cFunction,
    c: *const H1cCutoff,
    out: *mut *mut H1cFunction,
) -> H1cStatus {
    unary(u, c, out, apply_cutoff)
}

/// `chi_eps(u)^2` as a new handle.
///
/// # Safety
/// `u` and `c` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_f_eps(u: *const H1cFunction, c: *const H1cCutoff, out: *mut *mut H1cFunction) -> H1cStatus {
    unary(u, c, out, f_eps)
}

/// Derivative of `chi_eps(.)^2` at `u` in direction `v`.
///
/// # Safety
/// `u`, `v` and `c` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_f_eps_derivative(
    u: *const H1cFunction,
    v: *const H1cFunction,
    c: *const H1cCutoff,
    out: *mut *mut H1cFunction,
) -> H1cStatus {
    guard(|| {
        let u = deref(u, "u")?;
        let v = deref(v, "v")?;
        let c = deref(c, "cutoff")?;
        let r = f_eps_derivative(&u.0, &v.0, &c.0).map_err(fail)?;
        store(out, H1cFunction(r))
    })
}

/// Exponentially weighted H1 norm with decay rate `eta >= 0`.
///
/// # Safety
/// `u` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_weighted_norm(u: *const H1cFunction, eta: f64, out: *mut f64) -> H1cStatus {
    guard(|| {
        let u = deref(u, "u")?;
        let spec = WeightedNormSpec::new(eta).map_err(fail)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = weighted_norm(&u.0, spec);
        Ok(())
    })
}

/// Largest H1 norm over unit windows.
///
/// # Safety
/// `u` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_uniform_norm(u: *const H1cFunction, out: *mut f64) -> H1cStatus {
    guard(|| {
        let u = deref(u, "u")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = uniform_norm(&u.0);
        Ok(())
    })
}

/// Certifies the standard partition pair at sampling step `h_cert` and
/// writes the measured constants as a JSON object. Release the string with
/// `h1c_string_free`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn h1c_certify_json(h_cert: f64, out: *mut *mut c_char) -> H1cStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cert = certify(&PartitionPair::standard(), h_cert).map_err(|e| fail(e.into()))?;
        let json = serde_json::to_string(&cert).map_err(|e| fail(e.into()))?;
        *out = CString::new(json).expect("json has no nul bytes").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn h1c_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
