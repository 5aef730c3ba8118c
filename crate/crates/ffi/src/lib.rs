//! C interface to the `czspace` toolkit.
//!
//! Objects cross the boundary as opaque handles created by `cz_*_new` /
//! `cz_*_load` / `cz_*_parse` and released by the matching `cz_*_free`.
//! Every fallible call returns a [`CzStatus`]; on failure the message is
//! available from [`cz_last_error`] on the same thread until the next call.
//! Panics are caught and reported as [`CzStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use czspace::boyd::{self, BoydExpr};
use czspace::lp_approx::{self, BallSpec};
use czspace::oscillation::{
    batch_membership, default_radii, LittleOConfig, MembershipConfig, Policy, Verdict,
};
use czspace::signals::{self, GridSpec, Meta, SampledFunction};
use czspace::{jet_extract, Error};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Format = 5,
    Domain = 6,
    InsufficientSamples = 7,
    Numerical = 8,
    Incompatible = 9,
    Inapplicable = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for CzStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => CzStatus::Domain,
            Error::InvalidArgument(_) | Error::NoBand { .. } | Error::Indeterminate { .. } => {
                CzStatus::InvalidArgument
            }
            Error::Parse { .. } => CzStatus::Parse,
            Error::Io(_) => CzStatus::Io,
            Error::Format { .. } => CzStatus::Format,
            Error::InsufficientSamples { .. } => CzStatus::InsufficientSamples,
            Error::UnboundedDilation { .. }
            | Error::IndexEstimation(_)
            | Error::Conditioning(_)
            | Error::IterationLimit { .. }
            | Error::ExtractionUnstable { .. }
            | Error::InvariantFailure(_) => CzStatus::Numerical,
            Error::Incompatible { .. } => CzStatus::Incompatible,
            Error::Inapplicable(_) => CzStatus::Inapplicable,
        }
    }
}

/// Little-o verdict at a point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CzVerdict {
    Pass = 0,
    Fail = 1,
    Indeterminate = 2,
}

/// Polynomial selection in oscillation profiles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CzPolicy {
    PerBall = 0,
    FixedJet = 1,
}

/// Membership summary at one point. Quantities that are undefined (no
/// valid radius, vanishing residuals) are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzMembership {
    pub seminorm: f64,
    /// 1 when the big-O verdict holds.
    pub verdict_big_o: i32,
    pub verdict_little_o: CzVerdict,
    pub p_exponent: f64,
    /// Number of radii in the ladder.
    pub radii: usize,
}

/// Opaque weight handle.
pub struct CzWeight(BoydExpr);

/// Opaque sampled-function handle.
pub struct CzSignal(SampledFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: CzStatus, msg: impl Into<String>) -> CzStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> CzStatus {
    let status = CzStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `body`, converting panics to [`CzStatus::Panic`].
fn guard(body: impl FnOnce() -> Result<(), CzStatus>) -> CzStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CzStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(CzStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, CzStatus> {
    if s.is_null() {
        return Err(fail(CzStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CzStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], CzStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CzStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, CzStatus> {
    p.as_ref()
        .ok_or_else(|| fail(CzStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, CzStatus> {
    p.as_mut()
        .ok_or_else(|| fail(CzStatus::NullPointer, format!("{what} is null")))
}

fn point_arg(x: &[f64], f: &SampledFunction) -> Result<(), CzStatus> {
    if x.len() != f.dim() {
        return Err(fail(
            CzStatus::InvalidArgument,
            format!("point has {} coordinates, signal has dimension {}", x.len(), f.dim()),
        ));
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn cz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cz_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Parses a weight such as `"t^0.5 * L2^0.5"`.
///
/// # Safety
/// `expr` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cz_weight_parse(expr: *const c_char, out: *mut *mut CzWeight) -> CzStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let s = str_arg(expr, "expr")?;
        let w = boyd::parse(s).map_err(from_error)?;
        *out = Box::into_raw(Box::new(CzWeight(w)));
        Ok(())
    })
}

/// Releases a weight; null is ignored.
///
/// # Safety
/// `w` must come from [`cz_weight_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cz_weight_free(w: *mut CzWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// `phi(t)` for `t > 0`.
///
/// # Safety
/// `w` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cz_weight_eval(w: *const CzWeight, t: f64, out: *mut f64) -> CzStatus {
    guard(|| {
        let w = ref_arg(w, "weight")?;
        let out = out_arg(out, "out")?;
        *out = w.0.eval(t).map_err(from_error)?;
        Ok(())
    })
}

/// Exact lower and upper Boyd indices.
///
/// # Safety
/// `w` must be a live handle; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cz_weight_indices(
    w: *const CzWeight,
    lower: *mut f64,
    upper: *mut f64,
) -> CzStatus {
    guard(|| {
        let w = ref_arg(w, "weight")?;
        let ind = boyd::indices(&w.0);
        *out_arg(lower, "lower")? = ind.lower;
        *out_arg(upper, "upper")? = ind.upper;
        Ok(())
    })
}

/// Wraps `n` samples at `origin + spacing * i` as a one-dimensional signal.
///
/// # Safety
/// `values` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cz_signal_new_1d(
    origin: f64,
    spacing: f64,
    values: *const f64,
    n: usize,
    out: *mut *mut CzSignal,
) -> CzStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let v = slice_arg(values, n, "values")?;
        let grid = GridSpec {
            origin: vec![origin],
            spacing,
            shape: vec![n],
        };
        let f = SampledFunction::new(grid, v.to_vec(), Meta::default()).map_err(from_error)?;
        *out = Box::into_raw(Box::new(CzSignal(f)));
        Ok(())
    })
}

/// Loads a `.szf` file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cz_signal_load(path: *const c_char, out: *mut *mut CzSignal) -> CzStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let p = str_arg(path, "path")?;
        let f = signals::load(Path::new(p)).map_err(from_error)?;
        *out = Box::into_raw(Box::new(CzSignal(f)));
        Ok(())
    })
}

/// Writes a `.szf` file atomically.
///
/// # Safety
/// `s` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cz_signal_save(s: *const CzSignal, path: *const c_char) -> CzStatus {
    guard(|| {
        let s = ref_arg(s, "signal")?;
        let p = str_arg(path, "path")?;
        signals::save(&s.0, Path::new(p)).map_err(from_error)
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cz_signal_len(s: *const CzSignal) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Dimension (1 or 2), or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cz_signal_dim(s: *const CzSignal) -> usize {
    s.as_ref().map_or(0, |s| s.0.dim())
}

/// Releases a signal; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cz_signal_free(s: *mut CzSignal) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of coefficients of a polynomial of `degree` in `dim` variables.
#[no_mangle]
pub extern "C" fn cz_coeff_count(dim: usize, degree: usize) -> usize {
    czspace::multi_index::count(dim, degree)
}

/// Best `L^p` polynomial of `degree` on the ball `B(x, r)`. Coefficients
/// are `D^a P(x) / a!` in graded order; `coeffs_len` must be at least
/// [`cz_coeff_count`]. `p` may be `INFINITY`.
///
/// # Safety
/// `x` must point to `dim` doubles, `coeffs` to `coeffs_len` writable
/// doubles; `residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn cz_best_poly(
    s: *const CzSignal,
    x: *const f64,
    dim: usize,
    r: f64,
    p: f64,
    degree: usize,
    coeffs: *mut f64,
    coeffs_len: usize,
    residual: *mut f64,
) -> CzStatus {
    guard(|| {
        let f = &ref_arg(s, "signal")?.0;
        let x = slice_arg(x, dim, "x")?;
        point_arg(x, f)?;
        let best = lp_approx::best_poly(f, &BallSpec::new(x, r, p), degree).map_err(from_error)?;
        copy_out(&best.jet.coeffs, coeffs, coeffs_len)?;
        if let Some(res) = residual.as_mut() {
            *res = best.residual;
        }
        Ok(())
    })
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> Result<(), CzStatus> {
    if len < src.len() {
        return Err(fail(
            CzStatus::BufferTooSmall,
            format!("need {} coefficients, buffer holds {len}", src.len()),
        ));
    }
    if dst.is_null() {
        return Err(fail(CzStatus::NullPointer, "coeffs is null"));
    }
    std::slice::from_raw_parts_mut(dst, src.len()).copy_from_slice(src);
    Ok(())
}

/// Jet of `degree` at `x` by mollification, over `levels` dyadic scales
/// from `eps_max` down (`eps_max <= 0` picks the default ladder).
///
/// # Safety
/// `x` must point to `dim` doubles, `coeffs` to `coeffs_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cz_extract_jet(
    s: *const CzSignal,
    x: *const f64,
    dim: usize,
    degree: usize,
    eps_max: f64,
    levels: usize,
    coeffs: *mut f64,
    coeffs_len: usize,
) -> CzStatus {
    guard(|| {
        let f = &ref_arg(s, "signal")?.0;
        let x = slice_arg(x, dim, "x")?;
        point_arg(x, f)?;
        let eps = if eps_max > 0.0 {
            jet_extract::dyadic_epsilons(eps_max, levels)
        } else {
            jet_extract::default_epsilons(f, x)
        };
        let ex = jet_extract::extract_jet(f, x, degree, &eps, None).map_err(from_error)?;
        copy_out(&ex.jet.coeffs, coeffs, coeffs_len)
    })
}

/// Oscillation profile over `levels` dyadic radii and the membership
/// verdicts of `f` at `x` for weight `w`, exponent `p` and `degree`.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cz_membership(
    s: *const CzSignal,
    x: *const f64,
    dim: usize,
    w: *const CzWeight,
    p: f64,
    degree: usize,
    policy: CzPolicy,
    levels: usize,
    out: *mut CzMembership,
) -> CzStatus {
    guard(|| {
        let f = &ref_arg(s, "signal")?.0;
        let x = slice_arg(x, dim, "x")?;
        point_arg(x, f)?;
        let w = ref_arg(w, "weight")?;
        let out = out_arg(out, "out")?;
        let radii = default_radii(f, levels);
        let cfg = MembershipConfig {
            p,
            degree,
            phi: w.0.clone(),
            policy: match policy {
                CzPolicy::PerBall => Policy::PerBall,
                CzPolicy::FixedJet => Policy::FixedJet,
            },
            radii: radii.clone(),
            little_o: LittleOConfig::default(),
        };
        let b = batch_membership(f, &[x.to_vec()], &cfg).map_err(from_error)?;
        let r = &b.reports[0];
        if let Some(e) = &r.error {
            return Err(fail(CzStatus::InsufficientSamples, e.clone()));
        }
        *out = CzMembership {
            seminorm: r.seminorm.unwrap_or(f64::NAN),
            verdict_big_o: r.verdict_big_o as i32,
            verdict_little_o: match r.verdict_t {
                Verdict::Pass => CzVerdict::Pass,
                Verdict::Fail => CzVerdict::Fail,
                Verdict::Indeterminate => CzVerdict::Indeterminate,
            },
            p_exponent: r.p_exponent.unwrap_or(f64::NAN),
            radii: radii.len(),
        };
        Ok(())
    })
}
