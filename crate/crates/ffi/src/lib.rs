//! C ABI over `floquet-lab`.
//!
//! Every function returns an [`FlqStatus`]; on failure a thread-local message
//! is available through [`flq_last_error_message`]. Handles are opaque and
//! must be released with their `_free` function. Matrices are row-major
//! arrays of [`FlqComplex`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use floquet_lab::cli::config::ModelConfig;
use floquet_lab::diagnostics::{ap_scan, ApVerdict};
use floquet_lab::linalg::{c64, ComplexMatrix, ComplexVector};
use floquet_lab::models::ModelSpec;
use floquet_lab::propagator::{monodromy, propagate, OrbitSample, PropagationOptions, TimeGrid};
use floquet_lab::spectral::floquet_spectrum;
use floquet_lab::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidModel = 4,
    InvalidGrid = 5,
    InvalidArgument = 6,
    DimensionMismatch = 7,
    NumericalFailure = 8,
    BufferTooSmall = 9,
    DiagnosticFailed = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlqComplex {
    pub re: f64,
    pub im: f64,
}

/// Summary of an ε-almost-period scan.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlqApResult {
    pub epsilon: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub max_gap: f64,
    pub almost_period_count: usize,
    /// 1 when every gap fits: `relative_density_l` is then meaningful.
    pub consistent: u8,
    pub relative_density_l: f64,
    /// Violating witness `(τ, t, deviation)`, NaN when consistent.
    pub witness_tau: f64,
    pub witness_t: f64,
    pub witness_deviation: f64,
}

/// A validated model.
pub struct FlqModel(ModelSpec);

/// A sampled orbit.
pub struct FlqOrbit(OrbitSample);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(FlqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidModel(_)
            | Error::GeneratorNotAvailable { .. }
            | Error::NoClosedForm { .. }
            | Error::DerivativeNotAvailable { .. } => FlqStatus::InvalidModel,
            Error::InvalidGrid(_)
            | Error::TimeNotOnGrid { .. }
            | Error::KickInstant { .. }
            | Error::GridTooCoarse(_)
            | Error::GridMismatch
            | Error::AliasedQuadrature { .. }
            | Error::HorizonTooShort { .. } => FlqStatus::InvalidGrid,
            Error::DimensionMismatch { .. } | Error::ShiftMismatch { .. } | Error::DimensionTooLarge { .. } => {
                FlqStatus::DimensionMismatch
            }
            Error::InvalidArgument(_) | Error::IndexOutOfSequence { .. } => FlqStatus::InvalidArgument,
            _ => FlqStatus::NumericalFailure,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: FlqStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FlqStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (FlqStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(_) => (FlqStatus::Panic, "internal panic".to_string()),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(FlqStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(FlqStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(|| fail(FlqStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return fail(FlqStatus::NullPointer, format!("{what} is null"));
    }
    if len < need {
        return fail(FlqStatus::BufferTooSmall, format!("{what} holds {len} entries, need {need}"));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return fail(FlqStatus::NullPointer, format!("{what} is null"));
    }
    p.write(value);
    Ok(())
}

fn write_matrix(m: &ComplexMatrix, out: &mut [FlqComplex]) {
    let n = m.ncols();
    for (k, slot) in out.iter_mut().enumerate() {
        let z = m[(k / n, k % n)];
        *slot = FlqComplex { re: z.re, im: z.im };
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn flq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn flq_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Build a model from a JSON object such as
/// `{"variant":"DrivenTwoLevel","omega0":1,"drive_amplitude":0.2,"drive_frequency":1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn flq_model_from_json(json: *const c_char, out: *mut *mut FlqModel) -> FlqStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let cfg: ModelConfig =
            serde_json::from_str(text).or_else(|e| fail(FlqStatus::InvalidConfig, e.to_string()))?;
        let spec = cfg.into_spec().or_else(|m| fail(FlqStatus::InvalidModel, m))?;
        write_out(out, Box::into_raw(Box::new(FlqModel(spec))), "out")
    })
}

/// # Safety
/// `model` must be null or a handle from [`flq_model_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn flq_model_free(model: *mut FlqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn flq_model_dim(model: *const FlqModel, out: *mut usize) -> FlqStatus {
    guard(|| write_out(out, handle(model, "model")?.0.dim(), "out"))
}

/// Driving period; `InvalidModel` for models without one.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn flq_model_period(model: *const FlqModel, out: *mut f64) -> FlqStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        match m.period() {
            Some(t) => write_out(out, t, "out"),
            None => fail(FlqStatus::InvalidModel, format!("{} has no period", m.name())),
        }
    })
}

/// Closed-form `U(t, 0)` into a `dim × dim` row-major buffer.
///
/// # Safety
/// `model` must be a live handle and `out` point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn flq_exact_propagator(model: *const FlqModel, t: f64, out: *mut FlqComplex, len: usize) -> FlqStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let d = m.dim();
        let buf = out_slice(out, len, d * d, "out")?;
        write_matrix(m.exact_propagator(t)?.matrix(), buf);
        Ok(())
    })
}

/// Numerically propagated `U(T, 0)` over one period.
///
/// # Safety
/// `model` must be a live handle and `out` point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn flq_monodromy(model: *const FlqModel, out: *mut FlqComplex, len: usize) -> FlqStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let t = m.period().map_or_else(|| fail(FlqStatus::InvalidModel, format!("{} has no period", m.name())), Ok)?;
        let d = m.dim();
        let buf = out_slice(out, len, d * d, "out")?;
        write_matrix(monodromy(m, t, &PropagationOptions::default())?.matrix(), buf);
        Ok(())
    })
}

/// Eigenphases `α ∈ [0, 2π)` of the monodromy, ascending, `dim` entries.
///
/// # Safety
/// `model` must be a live handle and `out` point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn flq_floquet_phases(model: *const FlqModel, out: *mut f64, len: usize) -> FlqStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let t = m.period().map_or_else(|| fail(FlqStatus::InvalidModel, format!("{} has no period", m.name())), Ok)?;
        let buf = out_slice(out, len, m.dim(), "out")?;
        let u = if m.has_closed_form() { m.exact_propagator(t)? } else { monodromy(m, t, &PropagationOptions::default())? };
        buf.copy_from_slice(&floquet_spectrum(&u)?.phases);
        Ok(())
    })
}

/// Propagate `psi0` (length `dim`) over the grid `t0, t0 + h, …, t1`.
///
/// # Safety
/// `model` must be a live handle, `psi0` point to `dim` entries and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn flq_propagate(
    model: *const FlqModel,
    psi0: *const FlqComplex,
    dim: usize,
    t0: f64,
    t1: f64,
    h: f64,
    out: *mut *mut FlqOrbit,
) -> FlqStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        if psi0.is_null() {
            return fail(FlqStatus::NullPointer, "psi0 is null");
        }
        if dim != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: dim }.into());
        }
        let src = std::slice::from_raw_parts(psi0, dim);
        let psi = ComplexVector::from_iterator(dim, src.iter().map(|z| c64(z.re, z.im)));
        let grid = TimeGrid::from_span(t0, t1, h)?;
        let orbit = propagate(m, &psi, &grid, &PropagationOptions::default())?;
        write_out(out, Box::into_raw(Box::new(FlqOrbit(orbit))), "out")
    })
}

/// # Safety
/// `orbit` must be null or a handle from [`flq_propagate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn flq_orbit_free(orbit: *mut FlqOrbit) {
    if !orbit.is_null() {
        drop(Box::from_raw(orbit));
    }
}

/// Number of samples in the orbit.
///
/// # Safety
/// `orbit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn flq_orbit_len(orbit: *const FlqOrbit, out: *mut usize) -> FlqStatus {
    guard(|| write_out(out, handle(orbit, "orbit")?.0.len(), "out"))
}

/// Sample time `t_k`.
///
/// # Safety
/// `orbit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn flq_orbit_time(orbit: *const FlqOrbit, k: usize, out: *mut f64) -> FlqStatus {
    guard(|| {
        let o = &handle(orbit, "orbit")?.0;
        if k >= o.len() {
            return Err(Error::IndexOutOfSequence { index: k, len: o.len() }.into());
        }
        write_out(out, o.time(k), "out")
    })
}

/// State `ψ(t_k)` into a buffer of at least `dim` entries.
///
/// # Safety
/// `orbit` must be a live handle and `out` point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn flq_orbit_state(orbit: *const FlqOrbit, k: usize, out: *mut FlqComplex, len: usize) -> FlqStatus {
    guard(|| {
        let o = &handle(orbit, "orbit")?.0;
        if k >= o.len() {
            return Err(Error::IndexOutOfSequence { index: k, len: o.len() }.into());
        }
        let buf = out_slice(out, len, o.dim(), "out")?;
        for (slot, z) in buf.iter_mut().zip(o.states[k].iter()) {
            *slot = FlqComplex { re: z.re, im: z.im };
        }
        Ok(())
    })
}

/// ε-almost-period scan over shifts up to `tau_max`.
///
/// # Safety
/// `orbit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn flq_ap_scan(orbit: *const FlqOrbit, epsilon: f64, tau_max: f64, out: *mut FlqApResult) -> FlqStatus {
    guard(|| {
        let r = ap_scan(&handle(orbit, "orbit")?.0, epsilon, tau_max)?;
        let (consistent, l) = match r.verdict {
            ApVerdict::ApConsistent { l } => (1, l),
            ApVerdict::ViolatingWitness => (0, f64::NAN),
        };
        let w = r.witness.as_ref();
        let res = FlqApResult {
            epsilon: r.epsilon,
            tau_max: r.tau_max,
            tau_step: r.tau_step,
            max_gap: r.max_gap,
            almost_period_count: r.almost_period_count,
            consistent,
            relative_density_l: l,
            witness_tau: w.map_or(f64::NAN, |w| w.tau),
            witness_t: w.map_or(f64::NAN, |w| w.t),
            witness_deviation: w.map_or(f64::NAN, |w| w.deviation),
        };
        write_out(out, res, "out")
    })
}

/// Run a full scenario document and write its outputs to `out_dir`.
/// Returns `DiagnosticFailed` when the run completed but some diagnostic errored.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn flq_run_config(json: *const c_char, out_dir: *const c_char) -> FlqStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let dir = str_arg(out_dir, "out_dir")?;
        let cfg = floquet_lab::cli::parse_config(text).or_else(|errs| {
            fail(FlqStatus::InvalidConfig, errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))
        })?;
        let outcome = floquet_lab::cli::run_scenario(&cfg).or_else(|e| match e {
            floquet_lab::cli::CliError::Scenario { source, .. } => {
                let Failure(s, m) = Failure::from(source);
                fail(s, format!("scenario {}: {m}", cfg.scenario))
            }
            other => fail(FlqStatus::InvalidConfig, other.to_string()),
        })?;
        outcome.write(Path::new(dir)).or_else(|e| fail(FlqStatus::Io, e.to_string()))?;
        if outcome.report.failed() {
            let msgs: Vec<_> = outcome.report.entries.iter().filter_map(|e| e.error.clone()).collect();
            return fail(FlqStatus::DiagnosticFailed, msgs.join("; "));
        }
        Ok(())
    })
}
