//! C ABI for the two-scale Dirac solvers.
//!
//! A solver is created from a [`UaConfig`] and handed out as an opaque
//! [`UaSolver`] pointer. Every function returns a [`UaStatus`]; on failure
//! the message is kept in a thread-local slot readable through
//! [`ua_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ua_dirac::diagnostics::perturbative_order;
use ua_dirac::initdata::{prepare_initial_data, G1Variant};
use ua_dirac::model::{mass, Example};
use ua_dirac::steppers::{build_matrices, reconstruct_phi, step, PredictionVariant, Scheme, SchemeMatrices, TwoScaleState};
use ua_dirac::{DiracModel, Error, SpinorField, TauGrid};

/// Status code returned by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UaStatus {
    Ok = 0,
    /// A null pointer, an undersized buffer or an out-of-range enum value.
    InvalidArgument = 1,
    InvalidConfig = 2,
    Singular = 3,
    Diverged = 4,
    Numerical = 5,
    Io = 6,
    /// The library panicked; the handle involved must not be used again.
    Panic = 7,
}

/// Solver parameters. Enumerations are plain integers so that any value a
/// C caller passes is representable; out-of-range values are rejected.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UaConfig {
    /// 1, 2 or 3 for Examples I, II, III.
    pub example: u32,
    /// 1 for UA1, 2 for UA2.
    pub scheme: u32,
    /// Preparation order 0..=5, or -1 to pick the largest order whose
    /// prepared data stays close to the initial profile.
    pub init_order: i32,
    pub epsilon: f64,
    pub dt: f64,
    /// Even number of spatial points, at least 4.
    pub n: usize,
    /// Even number of `tau` points, at least 2.
    pub n_tau: usize,
    /// 0 for the half-step prediction, 1 for the printed variant.
    pub ua2_prediction: u32,
    /// 0 for the printed `g1`, 1 for the `dx` variant.
    pub g1: u32,
}

/// Opaque solver handle.
pub struct UaSolver {
    model: DiracModel,
    mats: SchemeMatrices,
    state: TwoScaleState,
    phi0_mass: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UaStatus {
    match e {
        Error::InvalidConfig(_) | Error::GridMismatch(_) => UaStatus::InvalidConfig,
        Error::Singular { .. } => UaStatus::Singular,
        Error::Divergence { .. } => UaStatus::Diverged,
        Error::NumericalConsistency(_) => UaStatus::Numerical,
        Error::Io(_) | Error::Serialization(_) => UaStatus::Io,
    }
}

enum Failure {
    Arg(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UaStatus::Ok,
        Ok(Err(Failure::Arg(m))) => {
            set_last_error(m);
            UaStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            UaStatus::Panic
        }
    }
}

fn arg<T>(msg: &str) -> Result<T, Failure> {
    Err(Failure::Arg(msg.to_string()))
}

/// # Safety
/// `p` must be null or point to a live value of `T`.
unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::Arg(format!("{name} is null")))
}

impl UaConfig {
    fn decode(&self) -> Result<(Example, Scheme, Option<u32>, PredictionVariant, G1Variant), Failure> {
        let example = match self.example {
            1 => Example::I,
            2 => Example::II,
            3 => Example::III,
            v => return arg(&format!("example must be 1, 2 or 3, got {v}")),
        };
        let scheme = match self.scheme {
            1 => Scheme::Ua1,
            2 => Scheme::Ua2,
            v => return arg(&format!("scheme must be 1 or 2, got {v}")),
        };
        let order = match self.init_order {
            -1 => None,
            k @ 0..=5 => Some(k as u32),
            v => return arg(&format!("init_order must be -1 or 0..=5, got {v}")),
        };
        let prediction = match self.ua2_prediction {
            0 => PredictionVariant::HalfStep,
            1 => PredictionVariant::Printed,
            v => return arg(&format!("ua2_prediction must be 0 or 1, got {v}")),
        };
        let g1 = match self.g1 {
            0 => G1Variant::Printed,
            1 => G1Variant::Dx,
            v => return arg(&format!("g1 must be 0 or 1, got {v}")),
        };
        Ok((example, scheme, order, prediction, g1))
    }
}

/// Example I, UA2, automatic order, `eps = 1/4`, `dt = 1e-3`, `N = 128`,
/// `N_tau = 32`.
#[no_mangle]
pub extern "C" fn ua_config_default() -> UaConfig {
    UaConfig {
        example: 1,
        scheme: 2,
        init_order: -1,
        epsilon: 0.25,
        dt: 1e-3,
        n: 128,
        n_tau: 32,
        ua2_prediction: 0,
        g1: 0,
    }
}

/// Builds a solver holding the prepared initial data at `t = 0`.
///
/// # Safety
/// `config` must point to a valid [`UaConfig`] and `out` to writable
/// storage for one pointer. On success `*out` owns a solver that must be
/// released with [`ua_solver_free`]; on failure `*out` is set to null.
#[no_mangle]
pub unsafe extern "C" fn ua_solver_new(config: *const UaConfig, out: *mut *mut UaSolver) -> UaStatus {
    guard(|| {
        if out.is_null() {
            return arg("out is null");
        }
        *out = ptr::null_mut();
        let cfg = as_ref(config, "config")?;
        let (example, scheme, order, prediction, g1) = cfg.decode()?;
        let problem = example.problem(cfg.epsilon);
        let model = problem.model(cfg.n)?;
        let phi0 = problem.initial_data(cfg.n)?;
        let tau = TauGrid::new(cfg.n_tau)?;
        let order = match order {
            Some(k) => k,
            None => perturbative_order(&phi0, &model, tau, g1)?,
        };
        let prepared = prepare_initial_data(&phi0, &model, tau, order, g1)?;
        let mats = build_matrices(&model, cfg.dt, tau, scheme, prediction)?;
        let solver = UaSolver { phi0_mass: mass(&phi0), model, mats, state: TwoScaleState::new(prepared.field, scheme) };
        *out = Box::into_raw(Box::new(solver));
        Ok(())
    })
}

/// Advances the solver by `steps` time steps. On failure the solver keeps
/// the last successfully computed state.
///
/// # Safety
/// `solver` must be a live handle from [`ua_solver_new`].
#[no_mangle]
pub unsafe extern "C" fn ua_solver_advance(solver: *mut UaSolver, steps: usize) -> UaStatus {
    guard(|| {
        let s = solver.as_mut().ok_or_else(|| Failure::Arg("solver is null".into()))?;
        for _ in 0..steps {
            s.state = step(&s.state, &s.model, &s.mats)?;
        }
        Ok(())
    })
}

/// Current time `t_n`.
///
/// # Safety
/// `solver` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ua_solver_time(solver: *const UaSolver, out: *mut f64) -> UaStatus {
    guard(|| {
        let s = as_ref(solver, "solver")?;
        if out.is_null() {
            return arg("out is null");
        }
        *out = s.state.t;
        Ok(())
    })
}

/// Number of spatial grid points `N`.
///
/// # Safety
/// `solver` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ua_solver_grid_size(solver: *const UaSolver, out: *mut usize) -> UaStatus {
    guard(|| {
        let s = as_ref(solver, "solver")?;
        if out.is_null() {
            return arg("out is null");
        }
        *out = s.model.grid().len();
        Ok(())
    })
}

/// Writes the `N` grid points `x_j` into `x`.
///
/// # Safety
/// `solver` must be a live handle and `x` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ua_solver_grid_points(solver: *const UaSolver, x: *mut f64, len: usize) -> UaStatus {
    guard(|| {
        let s = as_ref(solver, "solver")?;
        let g = s.model.grid();
        if x.is_null() || len < g.len() {
            return arg(&format!("x must hold {} doubles", g.len()));
        }
        let dst = std::slice::from_raw_parts_mut(x, g.len());
        for (j, v) in dst.iter_mut().enumerate() {
            *v = g.x(j);
        }
        Ok(())
    })
}

fn current_phi(s: &UaSolver) -> SpinorField {
    reconstruct_phi(&s.state, s.model.epsilon())
}

/// Writes `Phi(t_n, x_j)` as `4 N` doubles: `re, im` of `phi_1` at every
/// node, followed by `re, im` of `phi_2`.
///
/// # Safety
/// `solver` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ua_solver_phi(solver: *const UaSolver, out: *mut f64, len: usize) -> UaStatus {
    guard(|| {
        let s = as_ref(solver, "solver")?;
        let n = s.model.grid().len();
        if out.is_null() || len < 4 * n {
            return arg(&format!("out must hold {} doubles", 4 * n));
        }
        let phi = current_phi(s);
        let dst = std::slice::from_raw_parts_mut(out, 4 * n);
        for (c, chunk) in dst.chunks_exact_mut(2 * n).enumerate() {
            for (z, pair) in phi.component(c).iter().zip(chunk.chunks_exact_mut(2)) {
                pair[0] = z.re;
                pair[1] = z.im;
            }
        }
        Ok(())
    })
}

/// Mass `||Phi(t_n)||^2` and its value at `t = 0`.
///
/// # Safety
/// `solver` must be a live handle; `out` and `initial` must be writable
/// (`initial` may be null).
#[no_mangle]
pub unsafe extern "C" fn ua_solver_mass(solver: *const UaSolver, out: *mut f64, initial: *mut f64) -> UaStatus {
    guard(|| {
        let s = as_ref(solver, "solver")?;
        if out.is_null() {
            return arg("out is null");
        }
        *out = mass(&current_phi(s));
        if !initial.is_null() {
            *initial = s.phi0_mass;
        }
        Ok(())
    })
}

/// Energy of `Phi(t_n)`.
///
/// # Safety
/// `solver` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ua_solver_energy(solver: *const UaSolver, out: *mut f64) -> UaStatus {
    guard(|| {
        let s = as_ref(solver, "solver")?;
        if out.is_null() {
            return arg("out is null");
        }
        *out = s.model.energy(&current_phi(s))?;
        Ok(())
    })
}

/// Releases a solver. Null is accepted.
///
/// # Safety
/// `solver` must be null or a handle from [`ua_solver_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ua_solver_free(solver: *mut UaSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to fit, into `buf`. Returns the full message length excluding
/// the terminator (0 when there is no message), so a caller can size `buf`.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ua_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let k = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

/// Forgets the calling thread's last error message.
#[no_mangle]
pub extern "C" fn ua_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}
