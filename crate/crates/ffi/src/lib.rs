//! C ABI for the experiment harness: opaque handles, integer error codes,
//! and a thread-local last-error message. The matching header is generated
//! into `include/boussi.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use boussi_core::assemble::ApproximationOrder;
use boussi_core::config::parse_config;
use boussi_core::error::Error;
use boussi_core::harness::{fit_order, run_scenario, NormKind, Scenario, ScenarioResult};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoussiStatus {
    BoussiOk = 0,
    BoussiErrConfig = 2,
    BoussiErrSolver = 3,
    BoussiErrIo = 4,
    BoussiErrNullArgument = 5,
    BoussiErrPanic = 6,
}

/// Approximation order selector for result queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoussiOrder {
    BoussiKdvOnly = 0,
    BoussiSecondOrder = 1,
}

/// Error-norm selector for fit queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoussiNorm {
    BoussiL2 = 0,
    BoussiLinf = 1,
}

/// One sup-in-time error measurement.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BoussiErrorRecord {
    pub eps: c_double,
    pub order: BoussiOrder,
    pub sup_l2: c_double,
    pub sup_linf: c_double,
    pub t_at_max: c_double,
}

/// A fitted power law `error = constant * eps^slope`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BoussiFit {
    pub slope: c_double,
    pub constant: c_double,
    pub residual: c_double,
}

/// Opaque scenario handle.
pub struct BoussiScenario {
    inner: Scenario,
}

/// Opaque sweep-result handle.
pub struct BoussiSweep {
    inner: ScenarioResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', "?");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> BoussiStatus {
    match err {
        Error::InvalidConfig(_) | Error::ConfigSyntax { .. } | Error::BadTruncationOrder(_) => {
            BoussiStatus::BoussiErrConfig
        }
        Error::Io(_) | Error::Json(_) => BoussiStatus::BoussiErrIo,
        Error::AtEps { source, .. } => status_of(source),
        _ => BoussiStatus::BoussiErrSolver,
    }
}

fn report(err: &Error) -> BoussiStatus {
    set_last_error(&err.to_string());
    status_of(err)
}

fn guard<T>(f: impl FnOnce() -> T, on_panic: T) -> T {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(_) => {
            set_last_error("internal panic");
            on_panic
        }
    }
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn boussi_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// The built-in head-on collision scenario. Never fails.
#[no_mangle]
pub extern "C" fn boussi_scenario_head_on() -> *mut BoussiScenario {
    Box::into_raw(Box::new(BoussiScenario { inner: Scenario::head_on() }))
}

/// The built-in overtaking scenario. Never fails.
#[no_mangle]
pub extern "C" fn boussi_scenario_overtaking() -> *mut BoussiScenario {
    Box::into_raw(Box::new(BoussiScenario { inner: Scenario::overtaking() }))
}

/// Parse a configuration text (the same format the CLI accepts). Returns
/// null and sets the last error on failure.
///
/// # Safety
/// `text` must be a valid NUL-terminated C string.
#[no_mangle]
pub unsafe extern "C" fn boussi_scenario_from_config(text: *const c_char) -> *mut BoussiScenario {
    if text.is_null() {
        set_last_error("text is null");
        return ptr::null_mut();
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        set_last_error("text is not valid UTF-8");
        return ptr::null_mut();
    };
    guard(
        || match parse_config(text) {
            Ok(cfg) => Box::into_raw(Box::new(BoussiScenario { inner: cfg.scenario })),
            Err(e) => {
                report(&e);
                ptr::null_mut()
            }
        },
        ptr::null_mut(),
    )
}

/// Replace the eps sweep (values are sorted descending internally).
///
/// # Safety
/// `scenario` must come from a `boussi_scenario_*` constructor and `eps`
/// must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn boussi_scenario_set_eps(
    scenario: *mut BoussiScenario,
    eps: *const c_double,
    len: usize,
) -> BoussiStatus {
    if scenario.is_null() || eps.is_null() {
        set_last_error("null argument");
        return BoussiStatus::BoussiErrNullArgument;
    }
    let mut list: Vec<f64> = std::slice::from_raw_parts(eps, len).to_vec();
    list.sort_by(|a, b| b.total_cmp(a));
    let s = &mut (*scenario).inner;
    let saved = std::mem::replace(&mut s.eps_list, list);
    match s.validate() {
        Ok(()) => BoussiStatus::BoussiOk,
        Err(e) => {
            s.eps_list = saved;
            report(&e)
        }
    }
}

/// # Safety
/// `scenario` must come from a `boussi_scenario_*` constructor; it must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn boussi_scenario_free(scenario: *mut BoussiScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Run the sweep. Returns null and sets the last error on failure.
///
/// # Safety
/// `scenario` must come from a `boussi_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn boussi_run(
    scenario: *const BoussiScenario,
    threads: c_int,
) -> *mut BoussiSweep {
    if scenario.is_null() {
        set_last_error("scenario is null");
        return ptr::null_mut();
    }
    let s = &(*scenario).inner;
    guard(
        || match run_scenario(s, threads.max(1) as usize) {
            Ok(result) => Box::into_raw(Box::new(BoussiSweep { inner: result })),
            Err(e) => {
                report(&e);
                ptr::null_mut()
            }
        },
        ptr::null_mut(),
    )
}

/// Number of (eps, order) error records in a sweep result.
///
/// # Safety
/// `sweep` must come from `boussi_run`.
#[no_mangle]
pub unsafe extern "C" fn boussi_sweep_record_count(sweep: *const BoussiSweep) -> usize {
    if sweep.is_null() {
        return 0;
    }
    (*sweep).inner.runs.iter().map(|r| r.records.len()).sum()
}

/// Copy record `index` into `out`.
///
/// # Safety
/// `sweep` must come from `boussi_run`; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn boussi_sweep_record(
    sweep: *const BoussiSweep,
    index: usize,
    out: *mut BoussiErrorRecord,
) -> BoussiStatus {
    if sweep.is_null() || out.is_null() {
        set_last_error("null argument");
        return BoussiStatus::BoussiErrNullArgument;
    }
    let Some(r) = (*sweep).inner.runs.iter().flat_map(|r| r.records.iter()).nth(index) else {
        set_last_error("record index out of range");
        return BoussiStatus::BoussiErrConfig;
    };
    *out = BoussiErrorRecord {
        eps: r.eps,
        order: match r.order {
            ApproximationOrder::KdvOnly => BoussiOrder::BoussiKdvOnly,
            ApproximationOrder::SecondOrder => BoussiOrder::BoussiSecondOrder,
        },
        sup_l2: r.sup_l2,
        sup_linf: r.sup_linf,
        t_at_max: r.t_at_max,
    };
    BoussiStatus::BoussiOk
}

/// Fit the error order of one approximation/norm over the sweep
/// (eps <= 0.1 only, at least three values).
///
/// # Safety
/// `sweep` must come from `boussi_run`; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn boussi_sweep_fit(
    sweep: *const BoussiSweep,
    order: BoussiOrder,
    norm: BoussiNorm,
    out: *mut BoussiFit,
) -> BoussiStatus {
    if sweep.is_null() || out.is_null() {
        set_last_error("null argument");
        return BoussiStatus::BoussiErrNullArgument;
    }
    let records = (*sweep).inner.records();
    let order = match order {
        BoussiOrder::BoussiKdvOnly => ApproximationOrder::KdvOnly,
        BoussiOrder::BoussiSecondOrder => ApproximationOrder::SecondOrder,
    };
    let norm = match norm {
        BoussiNorm::BoussiL2 => NormKind::L2,
        BoussiNorm::BoussiLinf => NormKind::Linf,
    };
    match fit_order(&records, order, norm) {
        Ok(fit) => {
            *out = BoussiFit { slope: fit.slope, constant: fit.constant, residual: fit.residual };
            BoussiStatus::BoussiOk
        }
        Err(e) => report(&e),
    }
}

/// # Safety
/// `sweep` must come from `boussi_run`; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn boussi_sweep_free(sweep: *mut BoussiSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}
