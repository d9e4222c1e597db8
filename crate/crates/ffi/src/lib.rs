//! C ABI for the `ifmap` library.
//!
//! Objects are exposed as opaque handles created by `ifmap_*_new`/`_load`
//! functions and released with the matching `_free`. Every fallible call
//! returns an [`IfmapStatus`]; on failure a description is available from
//! [`ifmap_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use ifmap::cli::{load_scenario, parse_scenario};
use ifmap::{
    capped_load_mapping, compute_fixed_point, coupling_matrix, derive_asymptotic, has_fixed_point, load_mapping,
    power_mapping_for_load, solve_canonical, spectral_radius, AffineMapping, CanonicalProblem, Error, ExistenceVerdict,
    LimitSchedule, LogSqrtMapping, Matrix, MonotoneNorm, NetworkScenario, NonnegVector, SharedMapping, SolverConfig,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IfmapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotConverged = 4,
    InvalidScenario = 5,
    ParseError = 6,
    IoError = 7,
    Undefined = 8,
    Panic = 9,
}

/// Norm selector for [`ifmap_solve_canonical`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IfmapNorm {
    L1 = 0,
    Linf = 1,
}

/// Solver settings; pass NULL wherever a pointer is accepted to use defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IfmapSolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

/// Opaque mapping handle.
pub struct IfmapMapping {
    inner: SharedMapping,
}

/// Opaque network scenario handle.
pub struct IfmapScenario {
    inner: NetworkScenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IfmapStatus {
    match e {
        Error::DimensionMismatch { .. } => IfmapStatus::DimensionMismatch,
        Error::NotConverged { .. } | Error::LimitNotConverged { .. } => IfmapStatus::NotConverged,
        Error::InvalidScenario(_) => IfmapStatus::InvalidScenario,
        Error::Parse(_) => IfmapStatus::ParseError,
        Error::Io(_) => IfmapStatus::IoError,
        Error::Undefined(_) => IfmapStatus::Undefined,
        _ => IfmapStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (IfmapStatus, String)>) -> IfmapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IfmapStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            IfmapStatus::Panic
        }
    }
}

fn lib<T>(r: ifmap::Result<T>) -> Result<T, (IfmapStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (IfmapStatus, String) {
    (IfmapStatus::NullPointer, format!("{name} is NULL"))
}

fn cfg_from(opts: *const IfmapSolverOptions) -> SolverConfig {
    // SAFETY: callers pass either NULL or a pointer to a valid options struct.
    match unsafe { opts.as_ref() } {
        Some(o) => SolverConfig::default().with_tol(o.tol).with_max_iter(o.max_iter),
        None => SolverConfig::default(),
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], (IfmapStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], (IfmapStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn mapping<'a>(m: *const IfmapMapping) -> Result<&'a SharedMapping, (IfmapStatus, String)> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("mapping"))
}

unsafe fn scenario<'a>(s: *const IfmapScenario) -> Result<&'a NetworkScenario, (IfmapStatus, String)> {
    s.as_ref().map(|s| &s.inner).ok_or_else(|| null("scenario"))
}

fn check_len(expected: usize, got: usize) -> Result<(), (IfmapStatus, String)> {
    if expected == got {
        Ok(())
    } else {
        Err((IfmapStatus::DimensionMismatch, format!("buffer length {got}, expected {expected}")))
    }
}

fn emit_mapping(out: *mut *mut IfmapMapping, inner: SharedMapping) -> Result<(), (IfmapStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: `out` is non-null and points to writable storage for a pointer.
    unsafe { *out = Box::into_raw(Box::new(IfmapMapping { inner })) };
    Ok(())
}

/// Message describing the last failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ifmap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ifmap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `x -> Xx + u` with `X` given row-major as `n*n` values.
///
/// # Safety
/// `matrix` must point to `n*n` readable doubles, `offset` to `n`, and `out`
/// to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ifmap_mapping_affine_new(
    n: usize,
    matrix: *const f64,
    offset: *const f64,
    out: *mut *mut IfmapMapping,
) -> IfmapStatus {
    guard(|| {
        let data = slice(matrix, n * n, "matrix")?.to_vec();
        let u = slice(offset, n, "offset")?.to_vec();
        let m = lib(Matrix::from_row_major(n, data))?;
        emit_mapping(out, Arc::new(lib(AffineMapping::new(m, u))?))
    })
}

/// The two-dimensional `(ln(1+x2) + alpha x1 + 0.1, sqrt(x1+x2+1))` mapping.
///
/// # Safety
/// `out` must point to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ifmap_mapping_log_sqrt_new(alpha: f64, out: *mut *mut IfmapMapping) -> IfmapStatus {
    guard(|| emit_mapping(out, Arc::new(lib(LogSqrtMapping::new(alpha))?)))
}

/// # Safety
/// `m` must be NULL or a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ifmap_mapping_free(m: *mut IfmapMapping) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of the mapping, or 0 for a NULL handle.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ifmap_mapping_dim(m: *const IfmapMapping) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// Evaluates the mapping at `x` into `out`; both buffers hold `n` doubles.
///
/// # Safety
/// `m` must be a live handle; `x` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ifmap_mapping_eval(
    m: *const IfmapMapping,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> IfmapStatus {
    guard(|| {
        let t = mapping(m)?;
        check_len(t.dim(), n)?;
        let x = lib(NonnegVector::new(slice(x, n, "x")?.to_vec()))?;
        let y = lib(t.evaluate(&x))?;
        slice_mut(out, n, "out")?.copy_from_slice(y.as_slice());
        Ok(())
    })
}

/// Spectral radius of the asymptotic mapping. `exact` is set to 1 when the
/// value is certified and 0 when only an upper bound is known.
///
/// # Safety
/// `m` must be a live handle; `rho` and `exact` must be writable; `opts`
/// may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ifmap_spectral_radius(
    m: *const IfmapMapping,
    opts: *const IfmapSolverOptions,
    rho: *mut f64,
    exact: *mut c_int,
) -> IfmapStatus {
    guard(|| {
        let t = mapping(m)?;
        if rho.is_null() || exact.is_null() {
            return Err(null("rho/exact"));
        }
        let a = lib(derive_asymptotic(t, &LimitSchedule::default()))?;
        let sr = lib(spectral_radius(&a, &MonotoneNorm::linf(), &cfg_from(opts)))?;
        *rho = sr.value;
        *exact = c_int::from(sr.is_exact());
        Ok(())
    })
}

/// Fixed-point existence. `verdict` is 1 (exists), 0 (does not exist) or
/// -1 (too close to the boundary to decide).
///
/// # Safety
/// `m` must be a live handle; `verdict` and `rho` must be writable; `opts`
/// may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ifmap_has_fixed_point(
    m: *const IfmapMapping,
    opts: *const IfmapSolverOptions,
    verdict: *mut c_int,
    rho: *mut f64,
) -> IfmapStatus {
    guard(|| {
        let t = mapping(m)?;
        if verdict.is_null() || rho.is_null() {
            return Err(null("verdict/rho"));
        }
        let chk = lib(has_fixed_point(t, &LimitSchedule::default(), &MonotoneNorm::linf(), &cfg_from(opts)))?;
        *verdict = match chk.verdict {
            ExistenceVerdict::Exists => 1,
            ExistenceVerdict::DoesNotExist => 0,
            ExistenceVerdict::BoundaryInconclusive => -1,
        };
        *rho = chk.rho;
        Ok(())
    })
}

/// Fixed point by plain iteration from the origin. On divergence `exists`
/// is 0 and `out` is left untouched.
///
/// # Safety
/// `m` must be a live handle; `out` must point to `n` doubles; `exists`
/// must be writable; `opts` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ifmap_fixed_point(
    m: *const IfmapMapping,
    opts: *const IfmapSolverOptions,
    out: *mut f64,
    n: usize,
    exists: *mut c_int,
) -> IfmapStatus {
    guard(|| {
        let t = mapping(m)?;
        check_len(t.dim(), n)?;
        if exists.is_null() {
            return Err(null("exists"));
        }
        let fp = lib(compute_fixed_point(t.as_ref(), &cfg_from(opts)))?;
        *exists = c_int::from(fp.exists);
        if let Some(p) = fp.point {
            slice_mut(out, n, "out")?.copy_from_slice(p.as_slice());
        }
        Ok(())
    })
}

/// Max-min utility at `budget`: writes the optimal power into `power` (`n`
/// doubles) and the utility into `utility`.
///
/// # Safety
/// `m` must be a live handle; `power` must point to `n` doubles; `utility`
/// must be writable; `opts` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ifmap_solve_canonical(
    m: *const IfmapMapping,
    norm: IfmapNorm,
    budget: f64,
    opts: *const IfmapSolverOptions,
    power: *mut f64,
    n: usize,
    utility: *mut f64,
) -> IfmapStatus {
    guard(|| {
        let t = mapping(m)?;
        check_len(t.dim(), n)?;
        if utility.is_null() {
            return Err(null("utility"));
        }
        let norm = match norm {
            IfmapNorm::L1 => MonotoneNorm::l1(),
            IfmapNorm::Linf => MonotoneNorm::linf(),
        };
        let prob = lib(CanonicalProblem::single_norm(t.clone(), norm))?;
        let sol = lib(solve_canonical(&prob, budget, &cfg_from(opts)))?;
        slice_mut(power, n, "power")?.copy_from_slice(sol.power.as_slice());
        *utility = sol.utility;
        Ok(())
    })
}

unsafe fn emit_scenario(out: *mut *mut IfmapScenario, inner: NetworkScenario) -> Result<(), (IfmapStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(IfmapScenario { inner }));
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (IfmapStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (IfmapStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

/// Parses a scenario document from a NUL-terminated JSON string.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ifmap_scenario_from_json(json: *const c_char, out: *mut *mut IfmapScenario) -> IfmapStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        emit_scenario(out, lib(parse_scenario(text, "<json>"))?)
    })
}

/// Loads a scenario document from a file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ifmap_scenario_load(path: *const c_char, out: *mut *mut IfmapScenario) -> IfmapStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        emit_scenario(out, lib(load_scenario(Path::new(path)))?)
    })
}

/// # Safety
/// `s` must be NULL or a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ifmap_scenario_free(s: *mut IfmapScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of base stations, or 0 for a NULL handle.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ifmap_scenario_num_bs(s: *const IfmapScenario) -> usize {
    s.as_ref().map_or(0, |s| s.inner.num_bs)
}

/// Load mapping of the scenario; the capped variant when `capped` is nonzero.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ifmap_scenario_load_mapping(
    s: *const IfmapScenario,
    capped: c_int,
    out: *mut *mut IfmapMapping,
) -> IfmapStatus {
    guard(|| {
        let s = scenario(s)?;
        let t: SharedMapping =
            if capped != 0 { Arc::new(lib(capped_load_mapping(s))?) } else { Arc::new(lib(load_mapping(s))?) };
        emit_mapping(out, t)
    })
}

/// Power mapping of the scenario at full load on every base station.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ifmap_scenario_power_mapping(
    s: *const IfmapScenario,
    out: *mut *mut IfmapMapping,
) -> IfmapStatus {
    guard(|| {
        let s = scenario(s)?;
        emit_mapping(out, Arc::new(lib(power_mapping_for_load(s, vec![1.0; s.num_bs]))?))
    })
}

/// Coupling matrix, row-major, into `out` of length `num_bs * num_bs`.
///
/// # Safety
/// `s` must be a live handle; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ifmap_coupling_matrix(s: *const IfmapScenario, out: *mut f64, len: usize) -> IfmapStatus {
    guard(|| {
        let s = scenario(s)?;
        let m = coupling_matrix(s);
        check_len(m.as_row_major().len(), len)?;
        slice_mut(out, len, "out")?.copy_from_slice(m.as_row_major());
        Ok(())
    })
}
