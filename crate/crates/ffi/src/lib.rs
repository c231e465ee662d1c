//! C ABI over `conic_uot`.
//!
//! Matrices cross the boundary as row-major `double` arrays of length `n*n`;
//! density fields as arrays of length `n` on a periodic grid of the given
//! length. Every function returns a [`CuotStatus`]; on failure the message
//! is available from [`cuot_last_error_message`] on the same thread.
//! Traces are opaque handles released with [`cuot_trace_free`].
//!
//! # Safety
//!
//! Every pointer argument must be null or valid for the documented number
//! of elements; output buffers must not alias inputs. Null pointers are
//! reported as `CUOT_STATUS_NULL_POINTER`. Trace handles must come from this
//! library and be freed once.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use conic_uot::density::{
    gdiv_metric_eval, integrate_pde, small_metric_eval, DensityField, Grid1D, Model, PdeState,
    PotentialField,
};
use conic_uot::gaussian::{
    hamiltonian, integrate_geodesic, lyapunov_solve, mccann_geodesic, shoot_bvp_with,
    GaussianCotangentState, ShootingOptions, SpdMatrix, SymMatrix,
};
use conic_uot::{Error, GeodesicTrace};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuotStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NotSymmetric = 3,
    NotPositiveDefinite = 4,
    SingularMatrix = 5,
    NonPositiveMass = 6,
    ApexCrossing = 7,
    PositivityLoss = 8,
    LostDefiniteness = 9,
    NonFinite = 10,
    StepTooLarge = 11,
    NonConvergence = 12,
    ConstraintViolation = 13,
    DimensionMismatch = 14,
    BufferTooSmall = 15,
    Panic = 16,
}

/// Density-level model selector for [`cuot_pde_integrate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuotModel {
    Small = 0,
    Wfr = 1,
}

/// Least-squares parabola `m(t) ≈ a t² + b t + c` through a trace.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CuotMassFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub max_residual: f64,
}

/// Opaque trace handle: rows of `t, m, xi, H` followed by the state.
pub struct CuotTrace {
    trace: GeodesicTrace,
    names: Vec<CString>,
}

struct LastError {
    message: CString,
    step: Option<usize>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(message: String, step: Option<usize>) {
    let message = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(LastError { message, step }));
}

fn status_of(e: &Error) -> CuotStatus {
    match e {
        Error::InvalidInput(_) => CuotStatus::InvalidInput,
        Error::NotSymmetric { .. } => CuotStatus::NotSymmetric,
        Error::NotPositiveDefinite { .. } => CuotStatus::NotPositiveDefinite,
        Error::SingularMatrix => CuotStatus::SingularMatrix,
        Error::NonPositiveMass(_) => CuotStatus::NonPositiveMass,
        Error::ApexCrossing { .. } => CuotStatus::ApexCrossing,
        Error::PositivityLoss { .. } => CuotStatus::PositivityLoss,
        Error::LostDefiniteness { .. } => CuotStatus::LostDefiniteness,
        Error::NonFinite { .. } => CuotStatus::NonFinite,
        Error::StepTooLarge { .. } => CuotStatus::StepTooLarge,
        Error::NonConvergence { .. } => CuotStatus::NonConvergence,
        Error::ConstraintViolation { .. } => CuotStatus::ConstraintViolation,
        Error::DimensionMismatch { .. } => CuotStatus::DimensionMismatch,
    }
}

enum Fail {
    Status(CuotStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type Res<T> = Result<T, Fail>;

fn guard(f: impl FnOnce() -> Res<()>) -> CuotStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CuotStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg, None);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string(), e.step());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into(), None);
            CuotStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(CuotStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Res<&'a [f64]> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Res<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &str) -> Res<&'a mut [f64]> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn square(n: usize) -> Res<usize> {
    if n == 0 {
        return Err(Fail::Status(
            CuotStatus::InvalidInput,
            "dimension must be positive".into(),
        ));
    }
    n.checked_mul(n)
        .ok_or_else(|| Fail::Status(CuotStatus::InvalidInput, "dimension overflows".into()))
}

fn into_handle(trace: GeodesicTrace) -> *mut CuotTrace {
    let names = trace
        .columns()
        .iter()
        .map(|c| CString::new(c.as_str()).expect("column names have no nul"))
        .collect();
    Box::into_raw(Box::new(CuotTrace { trace, names }))
}

fn density_inputs(n: usize, length: f64) -> Res<Grid1D> {
    Ok(Grid1D::new(n, length)?)
}

/// Message describing the last failure on this thread, or null when the
/// last call succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cuot_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(err) => err.message.as_ptr(),
        None => ptr::null(),
    })
}

/// Integration step at which the last failure happened; returns 0 and
/// writes the step when one is known, -1 otherwise.
#[no_mangle]
pub unsafe extern "C" fn cuot_last_error_step(step: *mut usize) -> i32 {
    LAST_ERROR.with(
        |e| match (e.borrow().as_ref().and_then(|err| err.step), step.as_mut()) {
            (Some(k), Some(out)) => {
                *out = k;
                0
            }
            _ => -1,
        },
    )
}

/// Static, nul-terminated name of a status code.
#[no_mangle]
pub extern "C" fn cuot_status_name(status: CuotStatus) -> *const c_char {
    let name: &'static CStr = match status {
        CuotStatus::Ok => c"ok",
        CuotStatus::NullPointer => c"null_pointer",
        CuotStatus::InvalidInput => c"invalid_input",
        CuotStatus::NotSymmetric => c"not_symmetric",
        CuotStatus::NotPositiveDefinite => c"not_positive_definite",
        CuotStatus::SingularMatrix => c"singular_matrix",
        CuotStatus::NonPositiveMass => c"nonpositive_mass",
        CuotStatus::ApexCrossing => c"apex_crossing",
        CuotStatus::PositivityLoss => c"positivity_loss",
        CuotStatus::LostDefiniteness => c"lost_definiteness",
        CuotStatus::NonFinite => c"non_finite",
        CuotStatus::StepTooLarge => c"step_too_large",
        CuotStatus::NonConvergence => c"non_convergence",
        CuotStatus::ConstraintViolation => c"constraint_violation",
        CuotStatus::DimensionMismatch => c"dimension_mismatch",
        CuotStatus::BufferTooSmall => c"buffer_too_small",
        CuotStatus::Panic => c"panic",
    };
    name.as_ptr()
}

/// Solves `S V + V S = X` for symmetric `S`.
#[no_mangle]
pub unsafe extern "C" fn cuot_lyapunov_solve(
    n: usize,
    v: *const f64,
    x: *const f64,
    s_out: *mut f64,
) -> CuotStatus {
    guard(|| {
        let nn = square(n)?;
        let v = SpdMatrix::from_row_major(n, slice(v, nn, "v")?)?;
        let x = SymMatrix::from_row_major(n, slice(x, nn, "x")?)?;
        let s = lyapunov_solve(&v, &x)?;
        out_slice(s_out, nn, "s_out")?.copy_from_slice(&s.to_row_major());
        Ok(())
    })
}

/// Point `t ∈ [0, 1]` of the Bures–Wasserstein geodesic, equal to `v` at
/// `t = 0` and `u` at `t = 1`.
#[no_mangle]
pub unsafe extern "C" fn cuot_mccann_geodesic(
    n: usize,
    u: *const f64,
    v: *const f64,
    t: f64,
    w_out: *mut f64,
) -> CuotStatus {
    guard(|| {
        let nn = square(n)?;
        let u = SpdMatrix::from_row_major(n, slice(u, nn, "u")?)?;
        let v = SpdMatrix::from_row_major(n, slice(v, nn, "v")?)?;
        let w = mccann_geodesic(&u, &v, t)?;
        out_slice(w_out, nn, "w_out")?.copy_from_slice(&w.to_row_major());
        Ok(())
    })
}

unsafe fn gaussian_state(
    n: usize,
    v: *const f64,
    m: f64,
    p: *const f64,
    xi: f64,
) -> Res<GaussianCotangentState> {
    let nn = square(n)?;
    let v = SpdMatrix::from_row_major(n, slice(v, nn, "v")?)?;
    let p = SymMatrix::from_row_major(n, slice(p, nn, "p")?)?;
    Ok(GaussianCotangentState::new(v, m, p, xi)?)
}

/// Energy of the Gaussian cotangent state `(V, m, P, ξ)`.
#[no_mangle]
pub unsafe extern "C" fn cuot_gaussian_hamiltonian(
    n: usize,
    v: *const f64,
    m: f64,
    p: *const f64,
    xi: f64,
    h_out: *mut f64,
) -> CuotStatus {
    guard(|| {
        let s = gaussian_state(n, v, m, p, xi)?;
        *out(h_out, "h_out")? = hamiltonian(&s)?;
        Ok(())
    })
}

/// Integrates the Gaussian geodesic for `steps` RK4 steps of size `dt`.
/// Trace columns are `t, m, xi, H`, then `V` and `P` row-major.
#[no_mangle]
pub unsafe extern "C" fn cuot_gaussian_integrate(
    n: usize,
    v: *const f64,
    m: f64,
    p: *const f64,
    xi: f64,
    dt: f64,
    steps: usize,
    trace_out: *mut *mut CuotTrace,
) -> CuotStatus {
    guard(|| {
        let slot = out(trace_out, "trace_out")?;
        let s = gaussian_state(n, v, m, p, xi)?;
        *slot = into_handle(integrate_geodesic(&s, dt, steps)?);
        Ok(())
    })
}

/// Initial momenta of the Gaussian geodesic joining `(Σ₀, m₀)` to
/// `(Σ₁, m₁)` in unit time. `steps` and `max_iterations` of 0 select the
/// library defaults. `iterations_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn cuot_shoot_bvp(
    n: usize,
    sigma0: *const f64,
    m0: f64,
    sigma1: *const f64,
    m1: f64,
    tol: f64,
    steps: usize,
    max_iterations: usize,
    p0_out: *mut f64,
    xi0_out: *mut f64,
    iterations_out: *mut usize,
) -> CuotStatus {
    guard(|| {
        let nn = square(n)?;
        let s0 = SpdMatrix::from_row_major(n, slice(sigma0, nn, "sigma0")?)?;
        let s1 = SpdMatrix::from_row_major(n, slice(sigma1, nn, "sigma1")?)?;
        let p0 = out_slice(p0_out, nn, "p0_out")?;
        let xi0 = out(xi0_out, "xi0_out")?;
        let mut opts = ShootingOptions::default();
        if steps > 0 {
            opts.steps = steps;
        }
        if max_iterations > 0 {
            opts.max_iterations = max_iterations;
        }
        let sol = shoot_bvp_with(&s0, m0, &s1, m1, tol, &opts)?;
        p0.copy_from_slice(&sol.p0.to_row_major());
        *xi0 = sol.xi0;
        if let Some(it) = iterations_out.as_mut() {
            *it = sol.iterations;
        }
        Ok(())
    })
}

/// Integrates the density-level geodesic on a periodic grid of `n` points
/// and the given length. Trace columns are `t, m, xi, H`, then the density
/// and the potential.
#[no_mangle]
pub unsafe extern "C" fn cuot_pde_integrate(
    n: usize,
    length: f64,
    rho: *const f64,
    theta: *const f64,
    model: CuotModel,
    dt: f64,
    steps: usize,
    trace_out: *mut *mut CuotTrace,
) -> CuotStatus {
    guard(|| {
        let slot = out(trace_out, "trace_out")?;
        let grid = density_inputs(n, length)?;
        let rho = DensityField::new(grid, slice(rho, n, "rho")?.to_vec())?;
        let theta = PotentialField::new(slice(theta, n, "theta")?.to_vec())?;
        let state = PdeState::new(rho, theta)?;
        let model = match model {
            CuotModel::Small => Model::Small,
            CuotModel::Wfr => Model::Wfr,
        };
        *slot = into_handle(integrate_pde(&state, model, dt, steps)?);
        Ok(())
    })
}

unsafe fn metric(
    n: usize,
    length: f64,
    rho: *const f64,
    rho_dot: *const f64,
    value_out: *mut f64,
    eval: fn(&DensityField, &[f64]) -> conic_uot::Result<f64>,
) -> CuotStatus {
    guard(|| {
        let grid = density_inputs(n, length)?;
        let rho = DensityField::new(grid, slice(rho, n, "rho")?.to_vec())?;
        let value = eval(&rho, slice(rho_dot, n, "rho_dot")?)?;
        *out(value_out, "value_out")? = value;
        Ok(())
    })
}

/// Squared length of the density velocity `rho_dot` in the small metric.
#[no_mangle]
pub unsafe extern "C" fn cuot_small_metric_eval(
    n: usize,
    length: f64,
    rho: *const f64,
    rho_dot: *const f64,
    value_out: *mut f64,
) -> CuotStatus {
    metric(n, length, rho, rho_dot, value_out, small_metric_eval)
}

/// Squared length of `rho_dot` in the metric with the Fisher–Rao term on
/// the divergence-free remainder.
#[no_mangle]
pub unsafe extern "C" fn cuot_gdiv_metric_eval(
    n: usize,
    length: f64,
    rho: *const f64,
    rho_dot: *const f64,
    value_out: *mut f64,
) -> CuotStatus {
    metric(n, length, rho, rho_dot, value_out, gdiv_metric_eval)
}

unsafe fn handle<'a>(trace: *const CuotTrace) -> Res<&'a CuotTrace> {
    trace.as_ref().ok_or_else(|| null("trace"))
}

/// Number of rows (time samples) in a trace.
#[no_mangle]
pub unsafe extern "C" fn cuot_trace_rows(
    trace: *const CuotTrace,
    rows_out: *mut usize,
) -> CuotStatus {
    guard(|| {
        *out(rows_out, "rows_out")? = handle(trace)?.trace.len();
        Ok(())
    })
}

/// Number of columns in a trace.
#[no_mangle]
pub unsafe extern "C" fn cuot_trace_columns(
    trace: *const CuotTrace,
    columns_out: *mut usize,
) -> CuotStatus {
    guard(|| {
        *out(columns_out, "columns_out")? = handle(trace)?.names.len();
        Ok(())
    })
}

/// Name of column `index`, owned by the trace. Null when out of range.
#[no_mangle]
pub unsafe extern "C" fn cuot_trace_column_name(
    trace: *const CuotTrace,
    index: usize,
) -> *const c_char {
    match trace.as_ref().and_then(|t| t.names.get(index)) {
        Some(name) => name.as_ptr(),
        None => ptr::null(),
    }
}

/// Copies the trace row-major into `buffer`, which must hold
/// `rows * columns` values.
#[no_mangle]
pub unsafe extern "C" fn cuot_trace_copy(
    trace: *const CuotTrace,
    buffer: *mut f64,
    len: usize,
) -> CuotStatus {
    guard(|| {
        let t = handle(trace)?;
        let need = t.trace.len() * t.names.len();
        if len < need {
            return Err(Fail::Status(
                CuotStatus::BufferTooSmall,
                format!("buffer holds {len} values, trace needs {need}"),
            ));
        }
        let dst = out_slice(buffer, need, "buffer")?;
        for (chunk, row) in dst.chunks_mut(t.names.len()).zip(t.trace.rows()) {
            chunk.copy_from_slice(row);
        }
        Ok(())
    })
}

/// Largest relative deviation of `H` from its initial value.
#[no_mangle]
pub unsafe extern "C" fn cuot_trace_h_drift(
    trace: *const CuotTrace,
    drift_out: *mut f64,
) -> CuotStatus {
    guard(|| {
        *out(drift_out, "drift_out")? = handle(trace)?.trace.relative_h_drift();
        Ok(())
    })
}

/// Quadratic fit of the mass column.
#[no_mangle]
pub unsafe extern "C" fn cuot_trace_mass_fit(
    trace: *const CuotTrace,
    fit_out: *mut CuotMassFit,
) -> CuotStatus {
    guard(|| {
        let slot = out(fit_out, "fit_out")?;
        let fit = handle(trace)?.trace.mass_fit().ok_or_else(|| {
            Fail::Status(
                CuotStatus::InvalidInput,
                "trace has fewer than three rows".into(),
            )
        })?;
        *slot = CuotMassFit {
            a: fit.a,
            b: fit.b,
            c: fit.c,
            max_residual: fit.max_residual,
        };
        Ok(())
    })
}

/// Releases a trace. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cuot_trace_free(trace: *mut CuotTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_follow_error_kinds() {
        let cases = [
            Error::InvalidInput("x".into()),
            Error::SingularMatrix,
            Error::LostDefiniteness { step: Some(3) },
            Error::StepTooLarge {
                dt: 1.0,
                limit: 0.1,
            },
            Error::NonConvergence {
                iterations: 2,
                residual: 1.0,
            },
        ];
        for e in cases {
            let name = unsafe { CStr::from_ptr(cuot_status_name(status_of(&e))) };
            assert_eq!(name.to_str().unwrap(), e.kind());
        }
    }

    #[test]
    fn panics_become_a_status() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, CuotStatus::Panic);
        assert!(!cuot_last_error_message().is_null());
        assert_eq!(guard(|| Ok(())), CuotStatus::Ok);
        assert!(cuot_last_error_message().is_null());
    }

    #[test]
    fn dimension_guard() {
        assert!(square(0).is_err());
        assert!(square(usize::MAX).is_err());
        assert_eq!(square(3).ok(), Some(9));
    }
}
