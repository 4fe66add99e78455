//! C interface to `multimode_opo`.
//!
//! Every function returns an [`MmoStatus`]. On failure the message is kept per thread and can
//! be read with [`mmo_last_error_message`]. Handles are opaque and owned by the caller, who
//! releases them with the matching `_free` function. Supermode indices are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use multimode_opo::coupling::SupermodeSet;
use multimode_opo::dynamics::{
    derive_cavity_figures, quadrature_spectrum, steady_state, threshold_variance, SqueezingSpectrum,
};
use multimode_opo::locking::{error_signal, parametric_gain};
use multimode_opo::phasematch::solve_signal_idler;
use multimode_opo::scenario::Scenario;
use multimode_opo::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Physics = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

pub struct MmoScenario(Scenario);

pub struct MmoSupermodes(SupermodeSet);

pub struct MmoSpectrum(SqueezingSpectrum);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MmoCavityFigures {
    pub gamma: f64,
    pub finesse: f64,
    pub escape_efficiency: f64,
    /// Full width at half maximum (Hz).
    pub bandwidth_fwhm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message of the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mmo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Buffer { needed: usize, given: usize },
    Argument(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> MmoStatus {
    match e {
        Error::Config { .. } => MmoStatus::Config,
        Error::Io(_) => MmoStatus::Io,
        Error::InvalidParameter { .. }
        | Error::OutOfRange { .. }
        | Error::SupermodeOutOfRange { .. }
        | Error::StepTooLarge { .. }
        | Error::ZeroLoPower
        | Error::LoNotNormalized(_)
        | Error::TooFewSamples { .. } => MmoStatus::InvalidArgument,
        _ => MmoStatus::Physics,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MmoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MmoStatus::Ok,
        Ok(Err(failure)) => {
            let (status, msg) = match failure {
                Failure::Lib(e) => (status_of(&e), e.to_string()),
                Failure::Null(name) => (MmoStatus::NullPointer, format!("`{name}` is NULL")),
                Failure::Buffer { needed, given } => (
                    MmoStatus::BufferTooSmall,
                    format!("buffer holds {given} values, {needed} needed"),
                ),
                Failure::Argument(msg) => (MmoStatus::InvalidArgument, msg),
            };
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MmoStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn write<T>(p: *mut T, name: &'static str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Creates a handle holding the bundled reference scenario.
///
/// # Safety
/// `out` must be NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mmo_scenario_default(out: *mut *mut MmoScenario) -> MmoStatus {
    guard(|| write(out, "out", boxed(MmoScenario(Scenario::reference()))))
}

/// Loads a scenario file. Relative coefficient-file paths resolve against its directory.
///
/// # Safety
/// `path` must be NULL or a NUL-terminated string; `out` NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mmo_scenario_load(path: *const c_char, out: *mut *mut MmoScenario) -> MmoStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure::Argument("path is not valid UTF-8".into()))?;
        let sc = Scenario::load(Path::new(path))?;
        write(out, "out", boxed(MmoScenario(sc)))
    })
}

/// # Safety
/// `handle` must be NULL or a pointer returned by a scenario constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mmo_scenario_free(handle: *mut MmoScenario) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Replaces the pump power (mW) and revalidates the scenario.
///
/// # Safety
/// `handle` must be NULL or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn mmo_scenario_set_pump_power(handle: *mut MmoScenario, power_mw: f64) -> MmoStatus {
    guard(|| {
        let sc = handle.as_mut().ok_or(Failure::Null("handle"))?;
        let mut next = sc.0.clone();
        next.pump.power_mw = power_mw;
        next.validate()?;
        sc.0 = next;
        Ok(())
    })
}

/// # Safety
/// `handle` must be NULL or a live scenario handle; `out` NULL or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mmo_cavity_figures(
    handle: *const MmoScenario,
    out: *mut MmoCavityFigures,
) -> MmoStatus {
    guard(|| {
        let params = borrow(handle, "handle")?.0.cavity_params()?;
        let f = derive_cavity_figures(&params);
        write(
            out,
            "out",
            MmoCavityFigures {
                gamma: params.gamma(),
                finesse: f.finesse,
                escape_efficiency: f.escape_efficiency,
                bandwidth_fwhm: f.bandwidth_fwhm,
            },
        )
    })
}

/// Diagonalizes the coupling matrix of the scenario's mode basis.
///
/// # Safety
/// `handle` must be NULL or a live scenario handle; `out` NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mmo_supermodes_new(
    handle: *const MmoScenario,
    out: *mut *mut MmoSupermodes,
) -> MmoStatus {
    guard(|| {
        let s = borrow(handle, "handle")?.0.supermodes()?;
        write(out, "out", boxed(MmoSupermodes(s)))
    })
}

/// # Safety
/// `handle` must be NULL or a pointer returned by [`mmo_supermodes_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mmo_supermodes_free(handle: *mut MmoSupermodes) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be NULL or a live supermode handle; `out` NULL or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mmo_supermodes_len(handle: *const MmoSupermodes, out: *mut usize) -> MmoStatus {
    guard(|| write(out, "out", borrow(handle, "handle")?.0.len()))
}

/// # Safety
/// `handle` must be NULL or a live supermode handle; `out` NULL or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mmo_supermodes_eigenvalue(
    handle: *const MmoSupermodes,
    k: usize,
    out: *mut f64,
) -> MmoStatus {
    guard(|| write(out, "out", borrow(handle, "handle")?.0.eigenvalue(k)?))
}

/// Copies the basis coefficients of supermode `k` into `buffer`, which must hold as many
/// values as there are supermodes.
///
/// # Safety
/// `handle` must be NULL or a live supermode handle; `buffer` NULL or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mmo_supermodes_vector(
    handle: *const MmoSupermodes,
    k: usize,
    buffer: *mut f64,
    len: usize,
) -> MmoStatus {
    guard(|| {
        let s = &borrow(handle, "handle")?.0;
        s.eigenvalue(k)?;
        let v = &s.eigenvectors[k];
        if buffer.is_null() {
            return Err(Failure::Null("buffer"));
        }
        if len < v.len() {
            return Err(Failure::Buffer {
                needed: v.len(),
                given: len,
            });
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buffer, v.len());
        Ok(())
    })
}

/// Zero-frequency squeezed variance of supermode `k` at threshold, with perfect detection.
///
/// # Safety
/// `handle` must be NULL or a live supermode handle; `out` NULL or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mmo_threshold_variance(
    handle: *const MmoSupermodes,
    k: usize,
    out: *mut f64,
) -> MmoStatus {
    guard(|| write(out, "out", threshold_variance(k, &borrow(handle, "handle")?.0)?))
}

/// Analytic squeezing spectrum of supermode `k` at the scenario's pump power, evaluated at
/// `count` analysis frequencies (Hz).
///
/// # Safety
/// `handle` must be NULL or a live scenario handle; `frequencies` NULL or valid for `count`
/// reads; `out` NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mmo_spectrum_new(
    handle: *const MmoScenario,
    k: usize,
    frequencies: *const f64,
    count: usize,
    out: *mut *mut MmoSpectrum,
) -> MmoStatus {
    guard(|| {
        let sc = &borrow(handle, "handle")?.0;
        if frequencies.is_null() {
            return Err(Failure::Null("frequencies"));
        }
        if count == 0 {
            return Err(Failure::Argument("no frequencies given".into()));
        }
        let freqs = std::slice::from_raw_parts(frequencies, count);
        let s = sc.supermodes()?;
        let params = sc.cavity_params()?;
        let op = steady_state(&sc.pump_drive()?, &s, &params)?;
        let spec = quadrature_spectrum(k, &s, &op, &params, sc.analytic_detection(), freqs)?;
        write(out, "out", boxed(MmoSpectrum(spec)))
    })
}

/// # Safety
/// `handle` must be NULL or a pointer returned by [`mmo_spectrum_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mmo_spectrum_free(handle: *mut MmoSpectrum) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Normalized gain σ of the spectrum's supermode.
///
/// # Safety
/// `handle` must be NULL or a live spectrum handle; `out` NULL or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mmo_spectrum_sigma(handle: *const MmoSpectrum, out: *mut f64) -> MmoStatus {
    guard(|| write(out, "out", borrow(handle, "handle")?.0.sigma))
}

/// Copies v_min and v_max (shot-noise units); either buffer may be NULL to skip it.
///
/// # Safety
/// `handle` must be NULL or a live spectrum handle; non-NULL buffers must be valid for `len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn mmo_spectrum_values(
    handle: *const MmoSpectrum,
    v_min: *mut f64,
    v_max: *mut f64,
    len: usize,
) -> MmoStatus {
    guard(|| {
        let spec = &borrow(handle, "handle")?.0;
        let n = spec.v_min.len();
        if len < n {
            return Err(Failure::Buffer {
                needed: n,
                given: len,
            });
        }
        if !v_min.is_null() {
            ptr::copy_nonoverlapping(spec.v_min.as_ptr(), v_min, n);
        }
        if !v_max.is_null() {
            ptr::copy_nonoverlapping(spec.v_max.as_ptr(), v_max, n);
        }
        Ok(())
    })
}

/// Signal and idler wavelengths (nm) at the scenario's crystal temperature.
///
/// # Safety
/// `handle` must be NULL or a live scenario handle; outputs NULL or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mmo_wavelengths(
    handle: *const MmoScenario,
    signal_nm: *mut f64,
    idler_nm: *mut f64,
) -> MmoStatus {
    guard(|| {
        let sc = &borrow(handle, "handle")?.0;
        if signal_nm.is_null() || idler_nm.is_null() {
            return Err(Failure::Null("signal_nm/idler_nm"));
        }
        let model = sc.sellmeier()?;
        let poling = sc.poling(&model)?;
        let (ls, li) = solve_signal_idler(&model, &poling, sc.gouy_correction()?)?;
        signal_nm.write(ls * 1e9);
        idler_nm.write(li * 1e9);
        Ok(())
    })
}

/// Interferometer error signal at relative phase `phi` for the scenario's lock settings.
///
/// # Safety
/// `handle` must be NULL or a live scenario handle; `out` NULL or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mmo_error_signal(handle: *const MmoScenario, phi: f64, out: *mut f64) -> MmoStatus {
    guard(|| {
        let lock = borrow(handle, "handle")?.0.lock_scenario();
        lock.validate()?;
        write(out, "out", error_signal(&lock, phi))
    })
}

/// Seeded parametric intensity gain at phase `phi` for normalized gain `sigma` in [0, 1).
///
/// # Safety
/// `out` must be NULL or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn mmo_parametric_gain(phi: f64, sigma: f64, out: *mut f64) -> MmoStatus {
    guard(|| write(out, "out", parametric_gain(phi, sigma)?))
}
