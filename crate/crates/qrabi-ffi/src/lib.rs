//! C ABI for the two-qubit quantum Rabi solver.
//!
//! The surface follows libgit2-style conventions: an opaque model handle,
//! status-code returns with a thread-local message behind
//! [`qrabi_last_error`], and caller-allocated flat arrays for results. All
//! entry points catch panics and convert them to `QRABI_STATUS_PANIC`, so
//! no unwinding ever crosses the boundary. The committed header
//! `include/qrabi.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use qrabi::dynamics::{grwa_dynamics, TimeGrid};
use qrabi::exact::{ed_mean_photon, ed_spectrum};
use qrabi::model::ModelParams;
use qrabi::observables::photon_levels;
use qrabi::vgrwa::{assemble_spectrum, blocks_needed, solve_lambda, Displacement, LambdaStrategy};
use qrabi::Error;

/// Opaque handle for one model configuration (ω, Ω, g).
pub struct QrabiModel {
    params: ModelParams,
}

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrabiStatus {
    /// The call succeeded.
    Ok = 0,
    /// A parameter was rejected; see `qrabi_last_error`.
    InvalidInput = 1,
    /// An iterative solve failed to converge; see `qrabi_last_error`.
    NonConvergence = 2,
    /// A required pointer argument was null.
    NullPointer = 3,
    /// An internal panic was caught at the boundary.
    Panic = 4,
}

/// How the displacement parameter λ is chosen.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrabiLambdaStrategy {
    /// λ = g/ω, the conventional fixed displacement.
    GrwaFixed = 0,
    /// λ = g/(ω + Ω), the closed-form variational choice.
    ClosedForm = 1,
    /// One self-consistent refinement of the closed form.
    SelfConsistent = 2,
    /// The exact variational root, found by bisection.
    ExactRoot = 3,
}

impl From<QrabiLambdaStrategy> for LambdaStrategy {
    fn from(strategy: QrabiLambdaStrategy) -> LambdaStrategy {
        match strategy {
            QrabiLambdaStrategy::GrwaFixed => LambdaStrategy::GrwaFixed,
            QrabiLambdaStrategy::ClosedForm => LambdaStrategy::ClosedForm,
            QrabiLambdaStrategy::SelfConsistent => LambdaStrategy::SelfConsistent,
            QrabiLambdaStrategy::ExactRoot => LambdaStrategy::ExactRoot,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(error: &Error) -> QrabiStatus {
    match error {
        Error::InvalidInput(_) => QrabiStatus::InvalidInput,
        Error::NonConvergence(_) => QrabiStatus::NonConvergence,
    }
}

/// Run a fallible body with panic containment and error capture.
fn guard(body: impl FnOnce() -> Result<(), (QrabiStatus, String)>) -> QrabiStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QrabiStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic at the ffi boundary".into());
            set_error(&message);
            QrabiStatus::Panic
        }
    }
}

fn lib_err(error: Error) -> (QrabiStatus, String) {
    (status_of(&error), error.to_string())
}

fn null_err(name: &str) -> (QrabiStatus, String) {
    (QrabiStatus::NullPointer, format!("{name} must not be null"))
}

unsafe fn model_ref<'a>(
    model: *const QrabiModel,
) -> Result<&'a ModelParams, (QrabiStatus, String)> {
    match model.as_ref() {
        Some(handle) => Ok(&handle.params),
        None => Err(null_err("model")),
    }
}

/// Create a model handle for oscillator frequency `omega`, level splitting
/// `splitting`, and coupling `coupling`; writes the handle to `out`.
///
/// # Safety
///
/// `out` must point to writable storage for one pointer. A returned handle
/// must be released with [`qrabi_model_free`].
#[no_mangle]
pub unsafe extern "C" fn qrabi_model_new(
    omega: f64,
    splitting: f64,
    coupling: f64,
    out: *mut *mut QrabiModel,
) -> QrabiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let params = ModelParams::new(omega, splitting, coupling).map_err(lib_err)?;
        out.write(Box::into_raw(Box::new(QrabiModel { params })));
        Ok(())
    })
}

/// Release a model handle; a null handle is ignored.
///
/// # Safety
///
/// `model` must be null or a handle from [`qrabi_model_new`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn qrabi_model_free(model: *mut QrabiModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Displacement parameter λ for the given strategy, written to `out`.
///
/// # Safety
///
/// `model` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn qrabi_lambda(
    model: *const QrabiModel,
    strategy: QrabiLambdaStrategy,
    out: *mut f64,
) -> QrabiStatus {
    guard(|| {
        let params = model_ref(model)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        out.write(solve_lambda(params, strategy.into()));
        Ok(())
    })
}

fn spectrum_for(
    params: &ModelParams,
    strategy: LambdaStrategy,
    count: usize,
) -> Result<Vec<f64>, (QrabiStatus, String)> {
    let n_blocks = blocks_needed(params, count);
    let disp = Displacement::new(params, strategy, n_blocks).map_err(lib_err)?;
    let levels = assemble_spectrum(&disp, n_blocks).map_err(lib_err)?;
    Ok(levels.iter().take(count).map(|level| level.energy).collect())
}

/// The `count` lowest approximate energies for the given λ strategy,
/// written ascending to `out[0..count]`.
///
/// # Safety
///
/// `model` must be a live handle; `out` must point to `count` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn qrabi_spectrum(
    model: *const QrabiModel,
    strategy: QrabiLambdaStrategy,
    count: usize,
    out: *mut f64,
) -> QrabiStatus {
    guard(|| {
        let params = model_ref(model)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        if count == 0 {
            return Err((
                QrabiStatus::InvalidInput,
                "count must be at least 1".into(),
            ));
        }
        let energies = spectrum_for(params, strategy.into(), count)?;
        std::ptr::copy_nonoverlapping(energies.as_ptr(), out, energies.len());
        Ok(())
    })
}

/// The approximate ground-state energy for the given λ strategy.
///
/// # Safety
///
/// `model` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn qrabi_ground_energy(
    model: *const QrabiModel,
    strategy: QrabiLambdaStrategy,
    out: *mut f64,
) -> QrabiStatus {
    qrabi_spectrum(model, strategy, 1, out)
}

/// The `count` lowest exact energies at Fock truncation `n_max`, written
/// ascending to `out[0..count]`.
///
/// # Safety
///
/// `model` must be a live handle; `out` must point to `count` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn qrabi_exact_spectrum(
    model: *const QrabiModel,
    n_max: usize,
    count: usize,
    out: *mut f64,
) -> QrabiStatus {
    guard(|| {
        let params = model_ref(model)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let energies = ed_spectrum(params, n_max, count).map_err(lib_err)?;
        std::ptr::copy_nonoverlapping(energies.as_ptr(), out, energies.len());
        Ok(())
    })
}

/// Approximate ground-state mean photon number for the given λ strategy.
///
/// # Safety
///
/// `model` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn qrabi_mean_photon_ground(
    model: *const QrabiModel,
    strategy: QrabiLambdaStrategy,
    out: *mut f64,
) -> QrabiStatus {
    guard(|| {
        let params = model_ref(model)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let photon = photon_levels(params, strategy.into(), 1).map_err(lib_err)?[0];
        out.write(photon);
        Ok(())
    })
}

/// Exact ground-state mean photon number at Fock truncation `n_max`.
///
/// # Safety
///
/// `model` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn qrabi_exact_mean_photon(
    model: *const QrabiModel,
    n_max: usize,
    out: *mut f64,
) -> QrabiStatus {
    guard(|| {
        let params = model_ref(model)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        out.write(ed_mean_photon(params, n_max).map_err(lib_err)?);
        Ok(())
    })
}

/// Evolve |−1_z⟩ ⊗ |α⟩ under the displaced-frame block Hamiltonian and
/// sample ⟨J_z⟩ and the |−1_z⟩ population at the given times (units 1/ω).
///
/// # Safety
///
/// `model` must be a live handle; `times`, `jz_out`, and `p_minus1_out`
/// must point to `samples` readable/writable doubles respectively.
#[no_mangle]
pub unsafe extern "C" fn qrabi_dynamics(
    model: *const QrabiModel,
    strategy: QrabiLambdaStrategy,
    alpha: f64,
    times: *const f64,
    samples: usize,
    jz_out: *mut f64,
    p_minus1_out: *mut f64,
) -> QrabiStatus {
    guard(|| {
        let params = model_ref(model)?;
        if times.is_null() {
            return Err(null_err("times"));
        }
        if jz_out.is_null() {
            return Err(null_err("jz_out"));
        }
        if p_minus1_out.is_null() {
            return Err(null_err("p_minus1_out"));
        }
        if samples == 0 {
            return Err((
                QrabiStatus::InvalidInput,
                "samples must be at least 1".into(),
            ));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err((
                QrabiStatus::InvalidInput,
                format!("coherent amplitude must be non-negative, got {alpha}"),
            ));
        }
        let times = std::slice::from_raw_parts(times, samples);
        if times.iter().any(|t| !t.is_finite()) {
            return Err((
                QrabiStatus::InvalidInput,
                "sample times must be finite".into(),
            ));
        }
        let scale = params.splitting / (2.0 * std::f64::consts::PI);
        let grid = TimeGrid {
            times: times.to_vec(),
            in_periods: times.iter().map(|t| t * scale).collect(),
        };
        let run = grwa_dynamics(params, strategy.into(), alpha, &grid).map_err(lib_err)?;
        std::ptr::copy_nonoverlapping(run.series.jz.as_ptr(), jz_out, samples);
        std::ptr::copy_nonoverlapping(run.series.p_minus1.as_ptr(), p_minus1_out, samples);
        Ok(())
    })
}

/// Message for the most recent failure on this thread; empty when the last
/// call succeeded. The pointer stays valid until the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn qrabi_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qrabi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
