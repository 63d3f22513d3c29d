use std::ffi::CStr;
use std::ptr;

use h1cutoff_ffi::*;

fn function(half_length: usize, m: usize, f: impl Fn(f64) -> f64) -> *mut H1cFunction {
    let n = 2 * half_length * m + 1;
    let xs: Vec<f64> = (0..n).map(|i| f(i as f64 / m as f64 - half_length as f64)).collect();
    let mut out = ptr::null_mut();
    let s = unsafe { h1c_function_new(half_length, m, 1, xs.as_ptr(), xs.len(), &mut out) };
    assert_eq!(s, H1cStatus::Ok);
    out
}

fn samples(f: *const H1cFunction) -> Vec<f64> {
    let mut len = 0;
    assert_eq!(unsafe { h1c_function_len(f, &mut len) }, H1cStatus::Ok);
    let mut buf = vec![0.0; len];
    assert_eq!(unsafe { h1c_function_samples(f, buf.as_mut_ptr(), len) }, H1cStatus::Ok);
    buf
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(h1c_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn small_input_round_trips_through_cutoff() {
    let u = function(4, 32, |x| 0.01 * (-x * x).exp());
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { h1c_cutoff_new(1.0, &mut c) }, H1cStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { h1c_apply_cutoff(u, c, &mut out) }, H1cStatus::Ok);
    let (a, b) = (samples(u), samples(out));
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-14));

    let mut sq = ptr::null_mut();
    assert_eq!(unsafe { h1c_f_eps(u, c, &mut sq) }, H1cStatus::Ok);
    assert!(samples(sq).iter().zip(&a).all(|(s, x)| (s - x * x).abs() < 1e-15));

    let mut d = ptr::null_mut();
    assert_eq!(unsafe { h1c_f_eps_derivative(u, u, c, &mut d) }, H1cStatus::Ok);
    assert!(samples(d).iter().zip(&a).all(|(s, x)| (s - 2.0 * x * x).abs() < 1e-14));
    unsafe {
        h1c_function_free(d);
        h1c_function_free(sq);
        h1c_function_free(out);
        h1c_function_free(u);
        h1c_cutoff_free(c);
    }
}

#[test]
fn large_input_is_bounded() {
    let u = function(6, 32, |x| 50.0 * x.sin());
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { h1c_cutoff_new(0.5, &mut c) }, H1cStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { h1c_apply_cutoff(u, c, &mut out) }, H1cStatus::Ok);
    let mut n = f64::NAN;
    assert_eq!(unsafe { h1c_uniform_norm(out, &mut n) }, H1cStatus::Ok);
    assert!(n <= 4.0, "{n}");
    let mut wn = f64::NAN;
    assert_eq!(unsafe { h1c_weighted_norm(u, 0.5, &mut wn) }, H1cStatus::Ok);
    assert!(wn > 0.0);
    unsafe {
        h1c_function_free(out);
        h1c_function_free(u);
        h1c_cutoff_free(c);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let xs = [0.0; 10];
    let mut out = ptr::null_mut();
    let s = unsafe { h1c_function_new(4, 32, 1, xs.as_ptr(), xs.len(), &mut out) };
    assert_eq!(s, H1cStatus::GridMismatch);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    let mut c = ptr::null_mut();
    assert_eq!(unsafe { h1c_cutoff_new(-1.0, &mut c) }, H1cStatus::InvalidArgument);
    assert!(last_error().contains("epsilon"));

    let u = function(4, 32, |x| x.cos());
    let v = function(5, 32, |x| x.cos());
    assert_eq!(unsafe { h1c_cutoff_new(1.0, &mut c) }, H1cStatus::Ok);
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { h1c_f_eps_derivative(u, v, c, &mut d) }, H1cStatus::GridMismatch);
    let mut w = 0.0;
    assert_eq!(unsafe { h1c_weighted_norm(u, -0.5, &mut w) }, H1cStatus::InvalidArgument);
    let mut buf = [0.0; 3];
    assert_eq!(unsafe { h1c_function_samples(u, buf.as_mut_ptr(), 3) }, H1cStatus::InvalidArgument);
    unsafe {
        h1c_function_free(u);
        h1c_function_free(v);
        h1c_cutoff_free(c);
    }
}

#[test]
fn certification_is_json() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { h1c_certify_json(1e-4, &mut s) }, H1cStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { h1c_string_free(s) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["slope_max"].as_f64().unwrap() - 1.875).abs() < 1e-6);
    assert!(v["partition_defect"].as_f64().unwrap() < 1e-12);

    assert_eq!(unsafe { h1c_certify_json(0.1, &mut s) }, H1cStatus::CertificationFailed);
    assert!(last_error().contains("too coarse"));
}

#[test]
fn header_is_valid_c() {
    // syntax-checks the committed header when a C compiler is present
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/h1cutoff.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["h1c_apply_cutoff", "h1c_f_eps_derivative", "h1c_certify_json", "h1c_last_error"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    match std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).status() {
        Ok(status) => assert!(status.success()),
        Err(_) => eprintln!("cc not found; skipped compile check"),
    }
}
