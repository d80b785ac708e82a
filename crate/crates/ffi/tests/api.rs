use std::ffi::{CStr, CString};
use std::ptr;

use colombeau_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let t = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { colombeau_string_free(s) };
    t
}

fn last_error() -> String {
    let p = colombeau_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn env() -> *mut ColombeauEnv {
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { colombeau_env_new(ptr::null(), &mut e) }, ColombeauStatus::Ok);
    e
}

#[test]
fn valuation_through_the_c_interface() {
    let e = env();
    let mut est = ColombeauEstimate { kind: ColombeauDecayKind::Ambiguous, value: 0.0, slope: 0.0, residual: 0.0, below_envelope: false };
    let spec = CString::new("3*eps^2").unwrap();
    assert_eq!(unsafe { colombeau_valuation(e, spec.as_ptr(), &mut est) }, ColombeauStatus::Ok);
    assert_eq!(est.kind, ColombeauDecayKind::Order);
    assert!((est.slope - 2.0).abs() < 0.05);
    let flat = CString::new("exp(-1/eps)").unwrap();
    assert_eq!(unsafe { colombeau_valuation(e, flat.as_ptr(), &mut est) }, ColombeauStatus::Ok);
    assert_eq!(est.kind, ColombeauDecayKind::BeyondOrder);
    let bad = CString::new("eps +").unwrap();
    assert_eq!(unsafe { colombeau_valuation(e, bad.as_ptr(), &mut est) }, ColombeauStatus::Parse);
    assert!(last_error().contains("end of input"));
    assert_eq!(unsafe { colombeau_valuation(e, ptr::null(), &mut est) }, ColombeauStatus::NullPointer);
    unsafe { colombeau_env_free(e) };
}

#[test]
fn configuration_errors() {
    let mut e = ptr::null_mut();
    let cfg = CString::new(r#"{"eps_grid": {"base": 2.0, "k_min": 6, "k_max": 7}}"#).unwrap();
    assert_eq!(unsafe { colombeau_env_new(cfg.as_ptr(), &mut e) }, ColombeauStatus::Config);
    assert!(e.is_null());
    let junk = CString::new("{").unwrap();
    assert_eq!(unsafe { colombeau_env_new(junk.as_ptr(), &mut e) }, ColombeauStatus::Config);
    assert_eq!(unsafe { colombeau_env_new(ptr::null(), ptr::null_mut()) }, ColombeauStatus::NullPointer);
}

#[test]
fn suite_runs_and_replays() {
    let e = env();
    let filter = CString::new("E-supp-*").unwrap();
    let mut pass = false;
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { colombeau_run_suite(e, filter.as_ptr(), 1, &mut a, &mut pass) }, ColombeauStatus::Ok);
    assert!(pass);
    let first = take(a);
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { colombeau_run_suite(e, filter.as_ptr(), 2, &mut b, ptr::null_mut()) }, ColombeauStatus::Ok);
    assert_eq!(first, take(b));
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["total"], 3);
    let unknown = CString::new("no-such-check").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { colombeau_run_suite(e, unknown.as_ptr(), 1, &mut c, ptr::null_mut()) }, ColombeauStatus::UnknownCheck);
    assert!(c.is_null());
    let mut ids = ptr::null_mut();
    assert_eq!(unsafe { colombeau_check_ids(&mut ids) }, ColombeauStatus::Ok);
    let ids: Vec<String> = serde_json::from_str(&take(ids)).unwrap();
    assert!(ids.len() >= 24);
    unsafe { colombeau_env_free(e) };
}

#[test]
fn mollifier_handle() {
    let mut m = ptr::null_mut();
    let params = CString::new(r#"{"fft_size": 65536}"#).unwrap();
    assert_eq!(unsafe { colombeau_mollifier_build(params.as_ptr(), &mut m) }, ColombeauStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { colombeau_mollifier_eval(m, 0.0, &mut v) }, ColombeauStatus::Ok);
    assert!(v > 0.0);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { colombeau_mollifier_report(m, &mut r) }, ColombeauStatus::Ok);
    let rep: serde_json::Value = serde_json::from_str(&take(r)).unwrap();
    assert!((rep["mass"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!((rep["phi0"].as_f64().unwrap() - v).abs() < 1e-8);
    unsafe { colombeau_mollifier_free(m) };
    let bad = CString::new(r#"{"r_in": -1.0}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { colombeau_mollifier_build(bad.as_ptr(), &mut m) }, ColombeauStatus::Mollifier);
    assert!(m.is_null());
    let typo = CString::new(r#"{"rin": 1.0}"#).unwrap();
    assert_eq!(unsafe { colombeau_mollifier_build(typo.as_ptr(), &mut m) }, ColombeauStatus::Parse);
    let version = unsafe { CStr::from_ptr(colombeau_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}
