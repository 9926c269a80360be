//! C ABI over `lattice-vis`.
//!
//! Every fallible function returns an [`LvStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can
//! be read with [`lv_last_error`]. Objects returned as pointers are owned by
//! the caller and released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lattice_vis::mc::{mc_run, McOptions, McOutcome};
use lattice_vis::numtheory::{delta_theory, gamma_theory, TheoryConstants};
use lattice_vis::oracle::{exact_visible_prob, rational_to_string, StepSchedule};
use lattice_vis::stats::Stat;
use lattice_vis::walk::{validate_config, RawWalkConfig, WalkConfig};
use lattice_vis::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InvalidConfig = 4,
    UnsupportedModulus = 5,
    BudgetExceeded = 6,
    Overflow = 7,
    Panic = 8,
}

/// Which proportion to read from a simulation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvStat {
    /// Visible steps.
    Visible = 0,
    /// Visible steps in residue class `a`.
    VisibleResidue = 1,
    /// Consecutive visible pairs.
    Pair = 2,
    /// Consecutive visible pairs whose first step is in residue class `a`.
    PairResidue = 3,
}

/// Opaque walk configuration.
pub struct LvConfig(WalkConfig);

/// Opaque result of a Monte Carlo run.
pub struct LvSimulation(McOutcome);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(err: &Error) -> LvStatus {
    match err {
        Error::Config(_) => LvStatus::InvalidConfig,
        Error::UnsupportedModulus(_) => LvStatus::UnsupportedModulus,
        Error::Budget(_) | Error::Size(_) => LvStatus::BudgetExceeded,
        Error::Overflow(_) => LvStatus::Overflow,
        Error::Domain(_) | Error::Range(_) | Error::ModulusMismatch(..) | Error::Empty => {
            LvStatus::InvalidArgument
        }
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Run `body`, translating errors and panics into a status and the
/// thread's last-error message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LvStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            LvStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_last_error("string is not valid UTF-8");
            LvStatus::InvalidUtf8
        }
        Err(_) => {
            set_last_error("internal panic");
            LvStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(())
    }
}

/// Write `value` through `out`.
///
/// # Safety
/// `out` must be non-null and valid for writes.
unsafe fn put<T>(out: *mut T, value: T) {
    // SAFETY: guaranteed by the caller.
    unsafe { out.write(value) }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// `1/zeta(k)` and `prod_p (1 - 2/p^k)` to absolute tolerance `tol`.
///
/// # Safety
/// `out_inv_zeta` and `out_euler2` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_theory_constants(
    k: u32,
    tol: f64,
    out_inv_zeta: *mut f64,
    out_euler2: *mut f64,
) -> LvStatus {
    guard(|| {
        non_null(out_inv_zeta, "out_inv_zeta")?;
        non_null(out_euler2, "out_euler2")?;
        let c = TheoryConstants::new(k, tol)?;
        // SAFETY: both pointers checked above; validity is the caller's contract.
        unsafe {
            put(out_inv_zeta, c.inv_zeta_k);
            put(out_euler2, c.euler2_k);
        }
        Ok(())
    })
}

/// Limit of the visible proportion over steps `i = a (mod m)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_delta(k: u32, a: u64, m: u64, out: *mut f64) -> LvStatus {
    guard(|| {
        non_null(out, "out")?;
        let v = delta_theory(k, a, m)?;
        // SAFETY: checked non-null above.
        unsafe { put(out, v) };
        Ok(())
    })
}

/// Limit of the consecutive-pair proportion over `i = a (mod m)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_gamma(k: u32, a: u64, m: u64, out: *mut f64) -> LvStatus {
    guard(|| {
        non_null(out, "out")?;
        let v = gamma_theory(k, a, m)?;
        // SAFETY: checked non-null above.
        unsafe { put(out, v) };
        Ok(())
    })
}

/// Parse and validate a walk configuration from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_config_from_json(
    json: *const c_char,
    out: *mut *mut LvConfig,
) -> LvStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        // SAFETY: non-null and NUL-terminated per the contract.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|_| Failure::Utf8)?;
        let cfg = validate_config(RawWalkConfig::from_json(text)?)?;
        // SAFETY: checked non-null above.
        unsafe { put(out, Box::into_raw(Box::new(LvConfig(cfg)))) };
        Ok(())
    })
}

/// Single-law walk in dimension `k` with uniform directions.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_config_uniform(
    k: usize,
    seed: u64,
    out: *mut *mut LvConfig,
) -> LvStatus {
    guard(|| {
        non_null(out, "out")?;
        let cfg = validate_config(RawWalkConfig::uniform(k, seed))?;
        // SAFETY: checked non-null above.
        unsafe { put(out, Box::into_raw(Box::new(LvConfig(cfg)))) };
        Ok(())
    })
}

/// Release a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must come from `lv_config_*` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lv_config_free(cfg: *mut LvConfig) {
    if !cfg.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Run `paths` walks of `steps` steps with residue modulus `m` on
/// `parallelism` threads.
///
/// # Safety
/// `cfg` must be a live configuration; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_simulate(
    cfg: *const LvConfig,
    steps: u64,
    paths: u64,
    m: u64,
    parallelism: usize,
    out: *mut *mut LvSimulation,
) -> LvStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out, "out")?;
        // SAFETY: live handle per the contract.
        let cfg = unsafe { &(*cfg).0 };
        let outcome = mc_run(
            cfg,
            McOptions {
                n: steps,
                paths,
                m,
                parallelism,
            },
        )?;
        // SAFETY: checked non-null above.
        unsafe { put(out, Box::into_raw(Box::new(LvSimulation(outcome)))) };
        Ok(())
    })
}

/// Pooled proportion of `stat`; `a` selects the residue class and is
/// ignored for the total statistics.
///
/// # Safety
/// `sim` must be a live simulation; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_simulation_proportion(
    sim: *const LvSimulation,
    stat: LvStat,
    a: u64,
    out: *mut f64,
) -> LvStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        // SAFETY: live handle per the contract.
        let sim = unsafe { &(*sim).0 };
        let (stat, a) = match stat {
            LvStat::Visible => (Stat::Visible, None),
            LvStat::VisibleResidue => (Stat::VisibleResidue, Some(a)),
            LvStat::Pair => (Stat::Pair, None),
            LvStat::PairResidue => (Stat::PairResidue, Some(a)),
        };
        let p = sim
            .pooled
            .proportion(stat, a)
            .ok_or_else(|| Error::Range(format!("no {} row for residue {a:?}", stat.as_str())))?;
        // SAFETY: checked non-null above.
        unsafe { put(out, p) };
        Ok(())
    })
}

/// Pooled report as CSV. Free the string with [`lv_string_free`].
///
/// # Safety
/// `sim` must be a live simulation; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_simulation_csv(
    sim: *const LvSimulation,
    out: *mut *mut c_char,
) -> LvStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        // SAFETY: live handle per the contract.
        let csv = unsafe { &(*sim).0 }.pooled.to_csv()?;
        // SAFETY: checked non-null above.
        unsafe { put(out, to_c_string(csv)) };
        Ok(())
    })
}

/// Release a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from [`lv_simulate`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lv_simulation_free(sim: *mut LvSimulation) {
    if !sim.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Exact probability that step `steps` is visible, as `"num/den"`.
/// Free the string with [`lv_string_free`].
///
/// # Safety
/// `cfg` must be a live configuration; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lv_exact_visible_prob(
    cfg: *const LvConfig,
    steps: usize,
    out: *mut *mut c_char,
) -> LvStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out, "out")?;
        // SAFETY: live handle per the contract.
        let cfg = unsafe { &(*cfg).0 };
        let p = exact_visible_prob(&StepSchedule::from_config(cfg, steps)?)?;
        // SAFETY: checked non-null above.
        unsafe { put(out, to_c_string(rational_to_string(&p))) };
        Ok(())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lv_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}
