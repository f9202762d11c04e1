//! C interface to rgq-core.
//!
//! Every fallible call returns an [`RgqStatus`]; on failure the message is
//! available from [`rgq_last_error_message`] on the same thread. Matrices are
//! passed row-major with interleaved real and imaginary parts, so a d×d
//! matrix occupies 2·d·d doubles.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rgq_core::harness::{comparison_csv, compare_methods, fidelity, write_atomic, ComparisonResult, Method};
use rgq_core::numeric::density::uniform_grid;
use rgq_core::numeric::{ComplexMatrix, DensityMatrix, C64};
use rgq_core::rg_linear::{oscillator_exact, oscillator_naive, oscillator_rg, OscillatorParams};
use rgq_core::spin_boson::{u_closed_form, AmplitudeFunction, SignVariant, SpinBosonParams};
use rgq_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimMismatch = 3,
    NotPsd = 4,
    NonFinite = 5,
    NumericalFailure = 6,
    Io = 7,
    Panic = 8,
}

/// Method identifiers. In [`rgq_spin_boson_compare`] bit `1 << m` selects method `m`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgqMethod {
    Exact = 0,
    Tcl = 1,
    Rwa = 2,
    Rg = 3,
    Tc = 4,
    Bath = 5,
}

/// Opaque result of a spin-boson comparison run.
pub struct RgqComparison {
    result: ComparisonResult,
    time_unit: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RgqStatus {
    match e {
        Error::DimMismatch(_) | Error::NonSquare { .. } => RgqStatus::DimMismatch,
        Error::NotPsd { .. } => RgqStatus::NotPsd,
        Error::NonFiniteState { .. } | Error::NonFiniteEntry { .. } => RgqStatus::NonFinite,
        Error::InvalidArgument(_) | Error::NonHermitianInput { .. } | Error::NonUniformGrid { .. } => {
            RgqStatus::InvalidArgument
        }
        _ => RgqStatus::NumericalFailure,
    }
}

struct Failure(RgqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RgqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RgqStatus::Ok,
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside rgq".into());
            RgqStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(RgqStatus::NullPointer, "null pointer argument".into())
}

fn method_of(m: u32) -> Result<Method, Failure> {
    Method::ALL
        .get(m as usize)
        .copied()
        .ok_or_else(|| Failure(RgqStatus::InvalidArgument, format!("unknown method id {m}")))
}

unsafe fn read_matrix(dim: usize, data: *const f64) -> Result<ComplexMatrix, Failure> {
    if data.is_null() {
        return Err(null());
    }
    let raw = std::slice::from_raw_parts(data, 2 * dim * dim);
    let entries = raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
    Ok(ComplexMatrix::new(dim, dim, entries)?)
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rgq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Uhlmann fidelity of two d×d density matrices.
///
/// # Safety
/// `rho1` and `rho2` must each point to 2·dim·dim readable doubles and `out`
/// to one writable double.
#[no_mangle]
pub unsafe extern "C" fn rgq_fidelity(dim: usize, rho1: *const f64, rho2: *const f64, out: *mut f64) -> RgqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        if dim == 0 {
            return Err(Failure(RgqStatus::InvalidArgument, "dimension must be positive".into()));
        }
        let a = DensityMatrix::new(read_matrix(dim, rho1)?)?;
        let b = DensityMatrix::new(read_matrix(dim, rho2)?)?;
        *out = fidelity(&a, &b)?;
        Ok(())
    })
}

/// Excited-state amplitude u(t) of the resonant spin-boson model, with Δ and
/// α in units of λ² and t in units of 1/λ².
///
/// # Safety
/// `re` and `im` must point to writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rgq_u_closed_form(
    delta: f64,
    alpha: f64,
    lambda: f64,
    t: f64,
    re: *mut f64,
    im: *mut f64,
) -> RgqStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null());
        }
        let p = SpinBosonParams::in_lambda2_units(delta, alpha, lambda)?;
        let u = u_closed_form(&AmplitudeFunction::new(p, SignVariant::Plus), t / p.lambda2());
        *re = u.re;
        *im = u.im;
        Ok(())
    })
}

/// Exact, naive second-order and RG solutions of ẍ + εẋ + x = 0 at time t,
/// for initial amplitude `a_bar` and phase `theta_bar` at τ = 0.
///
/// # Safety
/// `exact`, `naive` and `rg` must point to writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rgq_oscillator_eval(
    epsilon: f64,
    a_bar: f64,
    theta_bar: f64,
    t: f64,
    exact: *mut f64,
    naive: *mut f64,
    rg: *mut f64,
) -> RgqStatus {
    guard(|| {
        if exact.is_null() || naive.is_null() || rg.is_null() {
            return Err(null());
        }
        if !(epsilon > 0.0 && epsilon < 2.0) {
            return Err(Failure(RgqStatus::InvalidArgument, format!("epsilon must be in (0, 2), got {epsilon}")));
        }
        let p = OscillatorParams::new(epsilon, a_bar, theta_bar)?;
        *exact = oscillator_exact(&p, a_bar, theta_bar, 0.0, t);
        *naive = oscillator_naive(&p, 0.0, t);
        *rg = oscillator_rg(&p, t);
        Ok(())
    })
}

/// Runs the selected methods from the excited state on a uniform grid
/// 0, dt, …, t_max (all in units of λ²) and stores the result in `*out`.
/// The mask must include the exact method. Free with [`rgq_comparison_free`].
///
/// # Safety
/// `out` must point to a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rgq_spin_boson_compare(
    delta: f64,
    alpha: f64,
    lambda: f64,
    t_max: f64,
    dt: f64,
    method_mask: u32,
    out: *mut *mut RgqComparison,
) -> RgqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = std::ptr::null_mut();
        if !(t_max > 0.0 && dt > 0.0 && dt <= t_max && t_max.is_finite()) {
            return Err(Failure(RgqStatus::InvalidArgument, format!("bad grid t_max = {t_max}, dt = {dt}")));
        }
        if method_mask >> Method::ALL.len() != 0 {
            return Err(Failure(RgqStatus::InvalidArgument, format!("unknown bits in method mask {method_mask:#x}")));
        }
        let methods: Vec<Method> =
            Method::ALL.iter().enumerate().filter(|(i, _)| method_mask & (1 << i) != 0).map(|(_, m)| *m).collect();
        let p = SpinBosonParams::in_lambda2_units(delta, alpha, lambda)?;
        let l2 = p.lambda2();
        let grid: Vec<f64> = uniform_grid(t_max, dt).into_iter().map(|t| t / l2).collect();
        let result = compare_methods(&p, &DensityMatrix::basis(2, 0), &grid, &methods)?;
        *out = Box::into_raw(Box::new(RgqComparison { result, time_unit: l2 }));
        Ok(())
    })
}

/// Number of grid points, or 0 for NULL.
///
/// # Safety
/// `c` must be NULL or a live handle from [`rgq_spin_boson_compare`].
#[no_mangle]
pub unsafe extern "C" fn rgq_comparison_len(c: *const RgqComparison) -> usize {
    c.as_ref().map_or(0, |c| c.result.grid.len())
}

/// Copies the grid, in units of λ², into `out`, which holds `len` doubles.
///
/// # Safety
/// `c` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rgq_comparison_times(c: *const RgqComparison, out: *mut f64, len: usize) -> RgqStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(null)?;
        let times: Vec<f64> = c.result.grid.iter().map(|t| t * c.time_unit).collect();
        copy_out(&times, out, len)
    })
}

/// Copies the fidelity series of `method` against the exact map into `out`.
///
/// # Safety
/// `c` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rgq_comparison_fidelity(
    c: *const RgqComparison,
    method: u32,
    out: *mut f64,
    len: usize,
) -> RgqStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(null)?;
        let m = method_of(method)?;
        let f = c.result.fidelity_by_method.get(&m).ok_or_else(|| not_run(m))?;
        copy_out(f, out, len)
    })
}

/// Smallest fidelity of `method` and the time (units of λ²) where it occurs.
///
/// # Safety
/// `c` must be a live handle; `value` and `t` must point to writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rgq_comparison_min_fidelity(
    c: *const RgqComparison,
    method: u32,
    value: *mut f64,
    t: *mut f64,
) -> RgqStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(null)?;
        if value.is_null() || t.is_null() {
            return Err(null());
        }
        let m = method_of(method)?;
        let (v, at) = *c.result.min_fidelity.get(&m).ok_or_else(|| not_run(m))?;
        *value = v;
        *t = at * c.time_unit;
        Ok(())
    })
}

/// Writes the comparison table as CSV to `path` (UTF-8, NUL-terminated).
///
/// # Safety
/// `c` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn rgq_comparison_write_csv(c: *const RgqComparison, path: *const c_char) -> RgqStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(null)?;
        if path.is_null() {
            return Err(null());
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(RgqStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let csv = comparison_csv(&c.result, c.time_unit);
        write_atomic(Path::new(path), csv.as_bytes()).map_err(|e| Failure(RgqStatus::Io, format!("{path}: {e}")))
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `c` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rgq_comparison_free(c: *mut RgqComparison) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

fn not_run(m: Method) -> Failure {
    Failure(RgqStatus::InvalidArgument, format!("method {} was not run", m.as_str()))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    if len < src.len() {
        return Err(Failure(RgqStatus::DimMismatch, format!("buffer holds {len} values, need {}", src.len())));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_status_codes() {
        assert_eq!(status_of(&Error::NotPsd { min_eigenvalue: -1.0 }), RgqStatus::NotPsd);
        assert_eq!(status_of(&Error::NonSquare { rows: 2, cols: 3 }), RgqStatus::DimMismatch);
        assert_eq!(status_of(&Error::NonFiniteState { t: 1.0 }), RgqStatus::NonFinite);
        assert_eq!(status_of(&Error::NoConvergence { iterations: 9 }), RgqStatus::NumericalFailure);
        assert_eq!(status_of(&Error::WindowTooNarrow { error: 0.1, tol: 0.01 }), RgqStatus::NumericalFailure);
    }

    #[test]
    fn method_ids_follow_core_order() {
        for (i, m) in Method::ALL.iter().enumerate() {
            assert_eq!(method_of(i as u32).ok(), Some(*m));
        }
        assert_eq!(method_of(RgqMethod::Bath as u32).ok(), Some(Method::Bath));
        assert!(method_of(Method::ALL.len() as u32).is_err());
    }

    #[test]
    fn panics_are_contained() {
        assert_eq!(guard(|| panic!("boom")), RgqStatus::Panic);
        assert!(!rgq_last_error_message().is_null());
    }
}
