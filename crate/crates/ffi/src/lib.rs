//! C interface.
//!
//! Every function returns a [`ColombeauStatus`]. On failure a message is
//! kept per thread and can be read with [`colombeau_last_error`]. Strings
//! handed out by the library are owned by the caller and must be released
//! with [`colombeau_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use colombeau::asymptotics::DecayClass;
use colombeau::config::Config;
use colombeau::mollifier::{Mollifier, MollifierParams};
use colombeau::netspec::NetSpec;
use colombeau::verify::{self, suite_json, Env, SuiteReport, VerifyError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColombeauStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Parse = 4,
    Evaluation = 5,
    Mollifier = 6,
    UnknownCheck = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColombeauDecayKind {
    Order = 0,
    BeyondOrder = 1,
    IdenticallyZero = 2,
    Ambiguous = 3,
}

/// Decay estimate of a net. `value` is the order for `Order`, the lower
/// bound for `BeyondOrder` and NaN otherwise. Missing fit data is NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ColombeauEstimate {
    pub kind: ColombeauDecayKind,
    pub value: f64,
    pub slope: f64,
    pub residual: f64,
    pub below_envelope: bool,
}

/// A validated configuration together with its default mollifier.
pub struct ColombeauEnv {
    env: Env,
}

/// A built mollifier.
pub struct ColombeauMollifier {
    phi: Arc<Mollifier>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(ColombeauStatus, String);

type Outcome = Result<(), Failure>;

fn fail(status: ColombeauStatus, msg: impl ToString) -> Failure {
    Failure(status, msg.to_string())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Outcome) -> ColombeauStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ColombeauStatus::Ok,
        Ok(Err(Failure(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(m);
            ColombeauStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(ColombeauStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(ColombeauStatus::InvalidUtf8, e))
}

unsafe fn optional_text<'a>(p: *const c_char) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p).map(Some)
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(ColombeauStatus::NullPointer, "output pointer is null"))
}

fn owned(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|e| fail(ColombeauStatus::Evaluation, e))
}

fn verify_status(e: VerifyError) -> Failure {
    match e {
        VerifyError::UnknownCheck(_) => fail(ColombeauStatus::UnknownCheck, e),
        VerifyError::Mollifier(_) => fail(ColombeauStatus::Mollifier, e),
        VerifyError::Config(_) => fail(ColombeauStatus::Config, e),
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn colombeau_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn colombeau_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn colombeau_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build an environment from a JSON configuration; null means defaults.
///
/// # Safety
/// `config_json` is null or a NUL-terminated string; `out_env` is writable.
#[no_mangle]
pub unsafe extern "C" fn colombeau_env_new(config_json: *const c_char, out_env: *mut *mut ColombeauEnv) -> ColombeauStatus {
    guard(|| {
        let slot = out(out_env)?;
        *slot = ptr::null_mut();
        let config = match optional_text(config_json)? {
            Some(s) => Config::from_json(s).map_err(|e| fail(ColombeauStatus::Config, e))?,
            None => Config::default(),
        };
        let env = Env::new(config).map_err(verify_status)?;
        *slot = Box::into_raw(Box::new(ColombeauEnv { env }));
        Ok(())
    })
}

/// # Safety
/// `env` is null or a handle from [`colombeau_env_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colombeau_env_free(env: *mut ColombeauEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Check ids in registry order as a JSON array.
///
/// # Safety
/// `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn colombeau_check_ids(out_json: *mut *mut c_char) -> ColombeauStatus {
    guard(|| {
        let slot = out(out_json)?;
        let ids = serde_json::to_string(&verify::check_ids()).map_err(|e| fail(ColombeauStatus::Evaluation, e))?;
        *slot = owned(ids)?;
        Ok(())
    })
}

/// Run the checks selected by `filter` (`all`, ids separated by commas,
/// or a prefix ending in `*`) and return the suite report as JSON.
/// `out_pass` may be null.
///
/// # Safety
/// `env` is a live handle, `filter` a NUL-terminated string, `out_json`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn colombeau_run_suite(
    env: *const ColombeauEnv,
    filter: *const c_char,
    jobs: u32,
    out_json: *mut *mut c_char,
    out_pass: *mut bool,
) -> ColombeauStatus {
    guard(|| {
        let slot = out(out_json)?;
        *slot = ptr::null_mut();
        let env = env.as_ref().ok_or_else(|| fail(ColombeauStatus::NullPointer, "env is null"))?;
        let filter = text(filter)?;
        let reports = verify::run_suite(filter, &env.env, jobs.max(1) as usize).map_err(verify_status)?;
        let suite = SuiteReport::new(filter, reports);
        if let Some(p) = out_pass.as_mut() {
            *p = suite.pass;
        }
        *slot = owned(suite_json(&suite))?;
        Ok(())
    })
}

/// Estimate the decay of a net written in the valuation grammar, e.g.
/// `eps^2`, `exp(-1/eps)` or `corpus:gauss`.
///
/// # Safety
/// `env` is a live handle, `spec` a NUL-terminated string, `out_estimate`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn colombeau_valuation(
    env: *const ColombeauEnv,
    spec: *const c_char,
    out_estimate: *mut ColombeauEstimate,
) -> ColombeauStatus {
    guard(|| {
        let slot = out(out_estimate)?;
        let env = env.as_ref().ok_or_else(|| fail(ColombeauStatus::NullPointer, "env is null"))?;
        let ctx = &env.env.ctx;
        let spec = NetSpec::parse(text(spec)?, Some(&env.env.phi)).map_err(|e| fail(ColombeauStatus::Parse, e))?;
        let net = spec.sample(&ctx.grid, &ctx.genfun).map_err(|e| fail(ColombeauStatus::Evaluation, e))?;
        let est = net.estimate(&ctx.asym).map_err(|e| fail(ColombeauStatus::Evaluation, e))?;
        let (kind, value) = match est.class {
            DecayClass::Order(a) => (ColombeauDecayKind::Order, a),
            DecayClass::BeyondOrder(q) => (ColombeauDecayKind::BeyondOrder, q),
            DecayClass::IdenticallyZero => (ColombeauDecayKind::IdenticallyZero, f64::NAN),
            DecayClass::Ambiguous => (ColombeauDecayKind::Ambiguous, f64::NAN),
        };
        *slot = ColombeauEstimate {
            kind,
            value,
            slope: est.slope.unwrap_or(f64::NAN),
            residual: est.residual.unwrap_or(f64::NAN),
            below_envelope: est.below_envelope,
        };
        Ok(())
    })
}

/// Build and certify a mollifier. `params_json` holds any subset of the
/// parameters (`dim`, `r_in`, `r_out`, `skew`, `fft_size`, `radius`,
/// `alpha_max`, `moment_tol`); null means defaults.
///
/// # Safety
/// `params_json` is null or a NUL-terminated string; `out_mollifier` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn colombeau_mollifier_build(
    params_json: *const c_char,
    out_mollifier: *mut *mut ColombeauMollifier,
) -> ColombeauStatus {
    guard(|| {
        let slot = out(out_mollifier)?;
        *slot = ptr::null_mut();
        let params: MollifierParams = match optional_text(params_json)? {
            Some(s) => serde_json::from_str(s).map_err(|e| fail(ColombeauStatus::Parse, e))?,
            None => MollifierParams::default(),
        };
        let phi = Mollifier::build(params).map_err(|e| fail(ColombeauStatus::Mollifier, e))?;
        *slot = Box::into_raw(Box::new(ColombeauMollifier { phi }));
        Ok(())
    })
}

/// # Safety
/// `m` is null or a handle from [`colombeau_mollifier_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colombeau_mollifier_free(m: *mut ColombeauMollifier) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// One-dimensional profile value `phi(x)`.
///
/// # Safety
/// `m` is a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn colombeau_mollifier_eval(
    m: *const ColombeauMollifier,
    x: f64,
    out_value: *mut f64,
) -> ColombeauStatus {
    guard(|| {
        let slot = out(out_value)?;
        let m = m.as_ref().ok_or_else(|| fail(ColombeauStatus::NullPointer, "mollifier is null"))?;
        *slot = m.phi.eval(x);
        Ok(())
    })
}

/// Certification report (mass, moments, tail and L2 data) as JSON.
///
/// # Safety
/// `m` is a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn colombeau_mollifier_report(
    m: *const ColombeauMollifier,
    out_json: *mut *mut c_char,
) -> ColombeauStatus {
    guard(|| {
        let slot = out(out_json)?;
        *slot = ptr::null_mut();
        let m = m.as_ref().ok_or_else(|| fail(ColombeauStatus::NullPointer, "mollifier is null"))?;
        let r = m.phi.report().ok_or_else(|| fail(ColombeauStatus::Mollifier, "mollifier has no report"))?;
        *slot = owned(serde_json::to_string_pretty(r).map_err(|e| fail(ColombeauStatus::Evaluation, e))?)?;
        Ok(())
    })
}
