//! C ABI over the `swipt` optimizer.
//!
//! Scenarios and results are opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! a [`SwiptStatus`]; the message of the last failure on the calling thread
//! is available from [`swipt_last_error`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use swipt::optimizer::{
    max_rate, optimize, sweep_region, OptimizationConfig, OptimizeStatus, OptimizedDesign, SweepOptions, Variant,
};
use swipt::scenario::{load_scenario, Scenario};
use swipt::Error;

/// Result codes of the C API.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwiptStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, wrong buffer length or option out of range.
    InvalidArgument = 1,
    /// Scenario text failed to parse or validate.
    Schema = 2,
    /// The rate floor exceeds the largest achievable rate.
    RateInfeasible = 3,
    /// A result was produced but the iteration did not converge.
    NotConverged = 4,
    Io = 5,
    /// Any other library failure, including a caught panic.
    Internal = 6,
}

/// Loaded scenario.
pub struct SwiptScenario(Scenario);

/// Optimized design and its figures of merit.
pub struct SwiptResult(OptimizedDesign);

/// Optimizer settings. A NaN `freeze_rho` leaves the splitting ratio free.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SwiptOptions {
    pub epsilon: f64,
    pub i_max: u32,
    /// Bits per OFDM symbol.
    pub rate_floor: f64,
    /// Optimize the OFDM waveform alone.
    pub wit_only: bool,
    pub freeze_rho: f64,
}

/// Selects one amplitude matrix of a result.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwiptWaveform {
    Power = 0,
    Info = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: SwiptStatus, msg: impl AsRef<str>) -> SwiptStatus {
    set_error(msg.as_ref());
    status
}

fn from_error(e: Error) -> SwiptStatus {
    let status = match &e {
        Error::Schema { .. } | Error::InvalidScenario(_) => SwiptStatus::Schema,
        Error::RateInfeasible { .. } => SwiptStatus::RateInfeasible,
        Error::Io(_) => SwiptStatus::Io,
        Error::ShapeMismatch { .. } => SwiptStatus::InvalidArgument,
        _ => SwiptStatus::Internal,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> SwiptStatus) -> SwiptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == SwiptStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(SwiptStatus::Internal, "panic inside the swipt library"),
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, SwiptStatus> {
    if p.is_null() {
        return Err(fail(SwiptStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SwiptStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn config(opts: &SwiptOptions) -> Result<OptimizationConfig, SwiptStatus> {
    if !(opts.epsilon > 0.0) || opts.i_max == 0 || !(opts.rate_floor >= 0.0) || !opts.rate_floor.is_finite() {
        return Err(fail(
            SwiptStatus::InvalidArgument,
            "options need epsilon > 0, i_max >= 1 and a finite rate_floor >= 0",
        ));
    }
    let mut cfg = OptimizationConfig {
        epsilon: opts.epsilon,
        i_max: opts.i_max as usize,
        rate_floor: opts.rate_floor,
        ..Default::default()
    };
    if opts.wit_only {
        cfg.variant = Variant::WIT_ONLY;
    }
    if !opts.freeze_rho.is_nan() {
        if !(opts.freeze_rho > 0.0 && opts.freeze_rho <= 1.0) {
            return Err(fail(SwiptStatus::InvalidArgument, "freeze_rho must lie in (0, 1]"));
        }
        cfg.variant = cfg.variant.with_fixed_rho(opts.freeze_rho);
    }
    Ok(cfg)
}

/// Message of the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn swipt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library defaults: ε = 1e-6, 100 iterations, no rate floor, ρ free.
#[no_mangle]
pub extern "C" fn swipt_options_default() -> SwiptOptions {
    let d = OptimizationConfig::default();
    SwiptOptions {
        epsilon: d.epsilon,
        i_max: d.i_max as u32,
        rate_floor: d.rate_floor,
        wit_only: false,
        freeze_rho: f64::NAN,
    }
}

fn emit_scenario(out: *mut *mut SwiptScenario, s: Scenario) -> SwiptStatus {
    unsafe { *out = Box::into_raw(Box::new(SwiptScenario(s))) };
    SwiptStatus::Ok
}

/// The built-in reference scenario.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn swipt_scenario_reference(out: *mut *mut SwiptScenario) -> SwiptStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwiptStatus::InvalidArgument, "out is null");
        }
        emit_scenario(out, Scenario::reference())
    })
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn swipt_scenario_from_toml(toml: *const c_char, out: *mut *mut SwiptScenario) -> SwiptStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwiptStatus::InvalidArgument, "out is null");
        }
        let src = match c_str(toml, "toml") {
            Ok(s) => s,
            Err(e) => return e,
        };
        match Scenario::from_toml_str(src) {
            Ok(s) => emit_scenario(out, s),
            Err(e) => from_error(e),
        }
    })
}

/// Reads a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn swipt_scenario_load(path: *const c_char, out: *mut *mut SwiptScenario) -> SwiptStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwiptStatus::InvalidArgument, "out is null");
        }
        let path = match c_str(path, "path") {
            Ok(s) => s,
            Err(e) => return e,
        };
        match load_scenario(path) {
            Ok(s) => emit_scenario(out, s),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `scenario` must come from a `swipt_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn swipt_scenario_num_tones(scenario: *const SwiptScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.num_tones())
}

/// # Safety
/// `scenario` must come from a `swipt_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn swipt_scenario_num_antennas(scenario: *const SwiptScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.num_antennas())
}

/// # Safety
/// `scenario` must be null or come from a `swipt_scenario_*` constructor,
/// and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn swipt_scenario_free(scenario: *mut SwiptScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Largest achievable rate in bits per OFDM symbol under `opts`.
///
/// # Safety
/// All pointers must be valid; `opts` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn swipt_max_rate(
    scenario: *const SwiptScenario,
    opts: *const SwiptOptions,
    out: *mut f64,
) -> SwiptStatus {
    guard(|| {
        let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
            return fail(SwiptStatus::InvalidArgument, "null scenario or out");
        };
        let cfg = match config(&opts.as_ref().copied().unwrap_or_else(|| swipt_options_default())) {
            Ok(c) => c,
            Err(e) => return e,
        };
        match s.0.instance().and_then(|inst| max_rate(&inst, cfg.variant)) {
            Ok(r) => {
                *out = r;
                SwiptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Optimizes one design. On `Ok` and `NotConverged` a result handle is
/// written to `out`.
///
/// # Safety
/// All pointers must be valid; `opts` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn swipt_optimize(
    scenario: *const SwiptScenario,
    opts: *const SwiptOptions,
    out: *mut *mut SwiptResult,
) -> SwiptStatus {
    guard(|| {
        let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
            return fail(SwiptStatus::InvalidArgument, "null scenario or out");
        };
        let cfg = match config(&opts.as_ref().copied().unwrap_or_else(|| swipt_options_default())) {
            Ok(c) => c,
            Err(e) => return e,
        };
        match s.0.instance().and_then(|inst| optimize(&inst, &cfg)) {
            Ok(r) => {
                let converged = r.status == OptimizeStatus::Converged;
                let msg = format!("optimizer stopped with status {:?}", r.status);
                *out = Box::into_raw(Box::new(SwiptResult(r)));
                if converged {
                    SwiptStatus::Ok
                } else {
                    fail(SwiptStatus::NotConverged, msg)
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// Traces the rate-energy boundary at `len` rate floors evenly spaced on
/// `[0, R_max]`, writing rates (bits per symbol) and `z_DC` values.
///
/// # Safety
/// `rates` and `zdc` must each hold `len` doubles; `opts` may be null.
#[no_mangle]
pub unsafe extern "C" fn swipt_sweep(
    scenario: *const SwiptScenario,
    opts: *const SwiptOptions,
    len: usize,
    rates: *mut f64,
    zdc: *mut f64,
) -> SwiptStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(SwiptStatus::InvalidArgument, "scenario is null");
        };
        if len == 0 || rates.is_null() || zdc.is_null() {
            return fail(SwiptStatus::InvalidArgument, "need len >= 1 and non-null buffers");
        }
        let cfg = match config(&opts.as_ref().copied().unwrap_or_else(|| swipt_options_default())) {
            Ok(c) => c,
            Err(e) => return e,
        };
        let run = || -> swipt::Result<Vec<_>> {
            let inst = s.0.instance()?;
            let grid = swipt::optimizer::uniform_rate_grid(&inst, &cfg, len)?;
            sweep_region(&inst, &cfg, &grid, &SweepOptions::default())
        };
        match run() {
            Ok(pts) => {
                let rates = std::slice::from_raw_parts_mut(rates, len);
                let zdc = std::slice::from_raw_parts_mut(zdc, len);
                let mut all_converged = true;
                for (k, p) in pts.iter().enumerate() {
                    rates[k] = p.result.rate;
                    zdc[k] = p.result.zdc;
                    all_converged &= p.result.status == OptimizeStatus::Converged;
                }
                if all_converged {
                    SwiptStatus::Ok
                } else {
                    fail(SwiptStatus::NotConverged, "some sweep points did not converge")
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// `z_DC` of the design; NaN for a null handle.
///
/// # Safety
/// `result` must be null or come from [`swipt_optimize`].
#[no_mangle]
pub unsafe extern "C" fn swipt_result_zdc(result: *const SwiptResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.zdc)
}

/// Rate in bits per OFDM symbol; NaN for a null handle.
///
/// # Safety
/// `result` must be null or come from [`swipt_optimize`].
#[no_mangle]
pub unsafe extern "C" fn swipt_result_rate(result: *const SwiptResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.rate)
}

/// Power-splitting ratio; NaN for a null handle.
///
/// # Safety
/// `result` must be null or come from [`swipt_optimize`].
#[no_mangle]
pub unsafe extern "C" fn swipt_result_rho(result: *const SwiptResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.design.rho)
}

/// # Safety
/// `result` must be null or come from [`swipt_optimize`].
#[no_mangle]
pub unsafe extern "C" fn swipt_result_iterations(result: *const SwiptResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.iterations)
}

/// Copies an `N × M` amplitude matrix in row-major order into `buf`.
///
/// # Safety
/// `buf` must hold `len` doubles and `result` come from [`swipt_optimize`].
#[no_mangle]
pub unsafe extern "C" fn swipt_result_amplitudes(
    result: *const SwiptResult,
    which: SwiptWaveform,
    buf: *mut f64,
    len: usize,
) -> SwiptStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(SwiptStatus::InvalidArgument, "result is null");
        };
        let s = match which {
            SwiptWaveform::Power => &r.0.design.s_p,
            SwiptWaveform::Info => &r.0.design.s_i,
        };
        if buf.is_null() || len != s.len() {
            return fail(
                SwiptStatus::InvalidArgument,
                format!("buffer must hold N*M = {} values", s.len()),
            );
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        let m = s.ncols();
        for (k, v) in out.iter_mut().enumerate() {
            *v = s[(k / m, k % m)];
        }
        SwiptStatus::Ok
    })
}

/// # Safety
/// `result` must be null or come from [`swipt_optimize`], and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn swipt_result_free(result: *mut SwiptResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
