//! C ABI over the `nppac` simulator.
//!
//! A simulation is an opaque `NppacSim` created by one of the
//! `nppac_sim_new_*` functions and released with [`nppac_sim_free`]. Every
//! fallible function returns an [`NppacStatus`]; on failure a message is
//! available from [`nppac_last_error`] on the same thread. Panics never
//! cross the boundary.
//!
//! Handles are not synchronised: use one handle from one thread at a time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nppac::diagnostics;
use nppac::io::{config, vtk};
use nppac::{Error, Params, State, Stepper};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NppacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    InterfaceNotFound = 4,
    Io = 5,
    Config = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Field selectors for [`nppac_sim_copy_field`].
pub const NPPAC_FIELD_U: u32 = 0;
pub const NPPAC_FIELD_C: u32 = 1;
/// Full potential including the electrode lift.
pub const NPPAC_FIELD_PHI: u32 = 2;
/// Homogenised potential, zero on both electrodes.
pub const NPPAC_FIELD_PHI_BAR: u32 = 3;

/// Opaque simulation handle.
pub struct NppacSim {
    stepper: Stepper,
    state: State,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NppacStatus {
    match e {
        Error::InvalidArgument(_)
        | Error::IndexOutOfRange { .. }
        | Error::SizeMismatch { .. }
        | Error::DuplicateNode(_)
        | Error::ZeroDiagonal(_) => NppacStatus::InvalidArgument,
        Error::NotFinite(_) | Error::Breakdown { .. } | Error::NotConverged { .. } => NppacStatus::Numerical,
        Error::InterfaceNotFound { .. } => NppacStatus::InterfaceNotFound,
        Error::Config { .. } => NppacStatus::Config,
        Error::Io { .. } => NppacStatus::Io,
    }
}

/// Failure inside the wrapper, carrying its status and message.
struct Fail(NppacStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NppacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NppacStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            NppacStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(NppacStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn sim_ref<'a>(sim: *const NppacSim) -> Result<&'a NppacSim, Fail> {
    sim.as_ref().ok_or_else(|| null("sim"))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(NppacStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn create(params: Params, out: *mut *mut NppacSim) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let stepper = Stepper::new(params)?;
    let state = stepper.initial_state()?;
    let boxed = Box::new(NppacSim { stepper, state });
    // SAFETY: `out` was checked to be non-null; the caller guarantees it is writable.
    unsafe { *out = Box::into_raw(boxed) };
    Ok(())
}

/// Creates a simulation with default parameters on an `nx` by `ny` mesh
/// (`0` keeps the default resolution).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_new_default(nx: usize, ny: usize, out: *mut *mut NppacSim) -> NppacStatus {
    guard(|| {
        let mut p = Params::default();
        if nx > 0 {
            p.nx = nx;
        }
        if ny > 0 {
            p.ny = ny;
        }
        create(p, out)
    })
}

/// Creates a simulation from the text of a `key = value` configuration.
///
/// # Safety
/// `config_text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_new_from_config(config_text: *const c_char, out: *mut *mut NppacSim) -> NppacStatus {
    guard(|| {
        let text = c_str(config_text, "config_text")?;
        create(config::parse_config(text)?, out)
    })
}

/// Releases a handle. Passing NULL does nothing.
///
/// # Safety
/// `sim` must be NULL or a handle from `nppac_sim_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_free(sim: *mut NppacSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances the simulation by `n_steps` time steps. On failure the state
/// is left at the last completed step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_step(sim: *mut NppacSim, n_steps: usize) -> NppacStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        for _ in 0..n_steps {
            let (next, _) = sim.stepper.advance(&sim.state)?;
            sim.state = next;
        }
        Ok(())
    })
}

/// Number of mesh nodes, i.e. the length of every field.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_num_nodes(sim: *const NppacSim, out: *mut usize) -> NppacStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sim.stepper.mesh().num_nodes();
        Ok(())
    })
}

/// Current time and step index.
///
/// # Safety
/// `sim` must be a live handle; `t` and `k` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_time(sim: *const NppacSim, t: *mut f64, k: *mut usize) -> NppacStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        if let Some(t) = t.as_mut() {
            *t = sim.state.t;
        }
        if let Some(k) = k.as_mut() {
            *k = sim.state.k;
        }
        Ok(())
    })
}

/// Copies one nodal field (`NPPAC_FIELD_*`) into `buf`, which must hold
/// at least `nppac_sim_num_nodes` values. Node `(i, j)` of the structured
/// mesh is at index `j * (nx + 1) + i`.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_copy_field(sim: *const NppacSim, field: u32, buf: *mut f64, len: usize) -> NppacStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let full;
        let values: &[f64] = match field {
            NPPAC_FIELD_U => &sim.state.u,
            NPPAC_FIELD_C => &sim.state.c,
            NPPAC_FIELD_PHI => {
                full = sim.stepper.full_potential(&sim.state.phi_bar)?;
                &full
            }
            NPPAC_FIELD_PHI_BAR => &sim.state.phi_bar,
            other => {
                return Err(Fail(NppacStatus::InvalidArgument, format!("unknown field selector {other}")));
            }
        };
        if len < values.len() {
            return Err(Fail(
                NppacStatus::BufferTooSmall,
                format!("buffer holds {len} values, field has {}", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Writes the current state as a legacy ASCII VTK file.
///
/// # Safety
/// `sim` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_write_vtk(sim: *const NppacSim, path: *const c_char) -> NppacStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        let path = c_str(path, "path")?;
        let phi = sim.stepper.full_potential(&sim.state.phi_bar)?;
        let s = &sim.state;
        vtk::write_vtk(Path::new(path), sim.stepper.mesh(), s.t, &s.u, &s.c, &phi)?;
        Ok(())
    })
}

/// Fourier amplitudes (modes `0..=n_modes`) of the interface radius around
/// the seed centre, from `n_rays` rays. `buf` must hold `n_modes + 1`
/// values.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nppac_sim_interface_modes(
    sim: *const NppacSim,
    n_modes: usize,
    n_rays: usize,
    buf: *mut f64,
    len: usize,
) -> NppacStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < n_modes + 1 {
            return Err(Fail(
                NppacStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} modes requested", n_modes + 1),
            ));
        }
        let init = &sim.stepper.params().initial;
        let modes = diagnostics::interface_radius_modes(
            sim.stepper.mesh(),
            &sim.state.u,
            [init.seed_x, init.seed_y],
            n_modes,
            n_rays,
        )?;
        ptr::copy_nonoverlapping(modes.as_ptr(), buf, modes.len());
        Ok(())
    })
}

/// Message of the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nppac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nppac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
