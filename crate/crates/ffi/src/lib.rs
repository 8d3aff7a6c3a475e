//! C ABI over the analytic engine.
//!
//! Scenarios are opaque handles built from the same TOML the CLI reads. Every
//! call returns a [`SpdiffStatus`]; on failure the message is kept per thread
//! and can be fetched with [`spdiff_last_error`]. All quantities crossing the
//! boundary are in internal units (ħ = 1).

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spdiff::cli::config::{Resolved, ScenarioConfig};
use spdiff::scenario::GuardMode;
use spdiff::{phases, propagator, resonance, Error};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdiffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidArgument = 4,
    Guard = 5,
    Numerical = 6,
    Panic = 7,
}

/// Opaque scenario handle.
pub struct SpdiffScenario {
    resolved: Resolved,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SpdiffPhaseBudget {
    pub phi0: f64,
    pub phi_dm: f64,
    pub phi_ep: f64,
    pub phi_md: f64,
    pub phi_wv: f64,
    pub total: f64,
    pub chirp_perfect: bool,
}

/// Row-major complex 2×2 matrix in (e, g) order.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SpdiffMatrix2 {
    pub re: [f64; 4],
    pub im: [f64; 4],
}

/// Polynomial coefficients of the differential and mean detuning, constant term first.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SpdiffDetuningCoefficients {
    pub differential: [f64; 4],
    pub mean: [f64; 4],
    pub laser_frequency: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SpdiffStatus {
    match e {
        Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::Csv(_) | Error::UnknownDimension(_) | Error::NonPositiveScale { .. } => {
            SpdiffStatus::Config
        }
        Error::InvalidArgument(_) | Error::UndefinedRatio(_) => SpdiffStatus::InvalidArgument,
        Error::Guard { .. } | Error::PerturbativeRegime { .. } => SpdiffStatus::Guard,
        _ => SpdiffStatus::Numerical,
    }
}

fn guarded<F: FnOnce() -> Result<(), (SpdiffStatus, String)>>(f: F) -> SpdiffStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpdiffStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SpdiffStatus::Panic
        }
    }
}

fn lift<T>(r: spdiff::Result<T>) -> Result<T, (SpdiffStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn handle<'a>(h: *const SpdiffScenario) -> Result<&'a SpdiffScenario, (SpdiffStatus, String)> {
    h.as_ref().ok_or((SpdiffStatus::NullPointer, "null scenario handle".into()))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, (SpdiffStatus, String)> {
    p.as_mut().ok_or((SpdiffStatus::NullPointer, "null output pointer".into()))
}

/// Version string of the engine, static and NUL-terminated.
#[no_mangle]
pub extern "C" fn spdiff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn spdiff_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses and resolves a TOML scenario. On success `*out` owns a handle that
/// must be released with [`spdiff_scenario_free`].
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spdiff_scenario_from_toml(toml: *const c_char, out_handle: *mut *mut SpdiffScenario) -> SpdiffStatus {
    guarded(|| {
        let slot = out(out_handle)?;
        *slot = std::ptr::null_mut();
        if toml.is_null() {
            return Err((SpdiffStatus::NullPointer, "null config string".into()));
        }
        let text = CStr::from_ptr(toml).to_str().map_err(|e| (SpdiffStatus::InvalidUtf8, e.to_string()))?;
        let resolved = lift(ScenarioConfig::from_toml_str(text).and_then(|c| c.resolve()))?;
        *slot = Box::into_raw(Box::new(SpdiffScenario { resolved }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must come from [`spdiff_scenario_from_toml`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spdiff_scenario_free(h: *mut SpdiffScenario) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Switches guard violations between warnings (false) and errors (true).
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spdiff_scenario_set_strict(h: *mut SpdiffScenario, strict: bool) -> SpdiffStatus {
    guarded(|| {
        let s = h.as_mut().ok_or((SpdiffStatus::NullPointer, "null scenario handle".to_string()))?;
        s.resolved.scenario.guard_mode = if strict { GuardMode::Strict } else { GuardMode::Soft };
        Ok(())
    })
}

/// Pulse duration and nominal final momentum of the e → g output.
///
/// # Safety
/// `h` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn spdiff_scenario_pulse(h: *const SpdiffScenario, duration: *mut f64, final_momentum: *mut f64) -> SpdiffStatus {
    guarded(|| {
        let s = handle(h)?;
        *out(duration)? = s.resolved.duration;
        *out(final_momentum)? = s.resolved.final_momentum();
        Ok(())
    })
}

/// Laser frequency that makes momentum `p_r` resonant.
///
/// # Safety
/// `h` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spdiff_resonant_laser_frequency(h: *const SpdiffScenario, p_r: f64, result: *mut f64) -> SpdiffStatus {
    guarded(|| {
        let s = handle(h)?;
        *out(result)? = lift(resonance::resonant_laser_frequency(&s.resolved.scenario, p_r))?;
        Ok(())
    })
}

/// Detuning polynomial at the Heisenberg starting point (z, p).
///
/// # Safety
/// `h` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spdiff_detuning_coefficients(
    h: *const SpdiffScenario,
    z: f64,
    p: f64,
    result: *mut SpdiffDetuningCoefficients,
) -> SpdiffStatus {
    guarded(|| {
        let s = handle(h)?;
        let poly = lift(resonance::table1_coefficients(&s.resolved.scenario, z, p))?;
        *out(result)? = SpdiffDetuningCoefficients {
            differential: poly.det_coeffs,
            mean: poly.mean_coeffs,
            laser_frequency: poly.laser_frequency,
        };
        Ok(())
    })
}

/// Weights η_j and ξ_j of the j-th detuning coefficient at pulse area φ_t.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn spdiff_dyson_coefficients(j: usize, phi: f64, eta: *mut f64, xi: *mut f64) -> SpdiffStatus {
    guarded(|| {
        let (e, x) = lift(propagator::dyson_coefficients(j, phi))?;
        *out(eta)? = e;
        *out(xi)? = x;
        Ok(())
    })
}

/// First-order pulse propagator in the Heisenberg frame for a pulse of length `t`.
///
/// # Safety
/// `h` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spdiff_propagate_heisenberg(
    h: *const SpdiffScenario,
    z: f64,
    p: f64,
    t: f64,
    result: *mut SpdiffMatrix2,
) -> SpdiffStatus {
    guarded(|| {
        let s = handle(h)?;
        let u = lift(propagator::propagate_heisenberg(&s.resolved.scenario, z, p, t))?.matrix;
        let dst = out(result)?;
        for i in 0..2 {
            for j in 0..2 {
                dst.re[2 * i + j] = u[(i, j)].re;
                dst.im[2 * i + j] = u[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// Closed-form mirror phase budget of the scenario's packets at final momentum `p`.
///
/// # Safety
/// `h` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spdiff_phase_budget(h: *const SpdiffScenario, p: f64, t: f64, result: *mut SpdiffPhaseBudget) -> SpdiffStatus {
    guarded(|| {
        let s = handle(h)?;
        let b = lift(phases::mirror_phase_budget(&s.resolved.packet, &s.resolved.scenario, p, t))?;
        *out(result)? = SpdiffPhaseBudget {
            phi0: b.phi0,
            phi_dm: b.phi_dm,
            phi_ep: b.phi_ep,
            phi_md: b.phi_md,
            phi_wv: b.phi_wv,
            total: b.total,
            chirp_perfect: b.chirp_perfect,
        };
        Ok(())
    })
}

/// Mirror phase from the propagator evaluated on the packet centres.
///
/// # Safety
/// `h` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spdiff_mirror_phase(h: *const SpdiffScenario, p: f64, t: f64, result: *mut f64) -> SpdiffStatus {
    guarded(|| {
        let s = handle(h)?;
        *out(result)? = lift(propagator::mirror_phase(&s.resolved.scenario, &s.resolved.packet, p, t))?;
        Ok(())
    })
}
