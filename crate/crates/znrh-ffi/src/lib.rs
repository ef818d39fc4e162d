//! C ABI for the znrh solver.
//!
//! Handles are opaque pointers created by `*_new` and released by `*_free`.
//! Every fallible call returns a `ZnrhStatus`; the message of the last
//! failure on the calling thread is available through `znrh_last_error`.

use num_complex::Complex64 as C;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use znrh::rh::{self, RHSolution};
use znrh::{Error, PeriodData, Side, ZnCurve};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZnrhStatus {
    Ok = 0,
    NullPointer = 1,
    /// bad sizes, duplicate points, lambda0 on the wrong side, ...
    InvalidArgument = 2,
    /// quadrature or theta evaluation failed
    Numerical = 3,
    /// theta[eps, delta](0) vanishes: the problem has no solution
    NotSolvable = 4,
    /// the point lies on the contour and no side was given
    OnContour = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZnrhComplex {
    pub re: f64,
    pub im: f64,
}

impl From<ZnrhComplex> for C {
    fn from(z: ZnrhComplex) -> C {
        C::new(z.re, z.im)
    }
}

impl From<C> for ZnrhComplex {
    fn from(z: C) -> ZnrhComplex {
        ZnrhComplex { re: z.re, im: z.im }
    }
}

/// Boundary side for points on the contour.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZnrhSide {
    Auto = 0,
    Plus = 1,
    Minus = 2,
}

/// A curve y^N = p q^(N-1) together with its period data.
pub struct ZnrhCurve {
    periods: PeriodData,
}

/// A solved Riemann-Hilbert problem.
pub struct ZnrhSolution {
    sol: RHSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> ZnrhStatus {
    match e {
        Error::SolvabilityViolation(_) => ZnrhStatus::NotSolvable,
        Error::CutAmbiguity => ZnrhStatus::OnContour,
        Error::Validation(_)
        | Error::BadArity(_)
        | Error::DuplicatePoints
        | Error::DomainError(_)
        | Error::ZeroConstant(_) => ZnrhStatus::InvalidArgument,
        _ => ZnrhStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), (ZnrhStatus, String)>>(f: F) -> ZnrhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZnrhStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ZnrhStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (ZnrhStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ZnrhStatus, String) {
    (ZnrhStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (ZnrhStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Build a curve of degree `n` from `count` = 2m+1 branch points.
///
/// # Safety
/// `lambdas` must point to `count` readable values and `out` must be a valid
/// pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn znrh_curve_new(n: usize, lambdas: *const ZnrhComplex, count: usize, out: *mut *mut ZnrhCurve) -> ZnrhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let l: Vec<C> = slice(lambdas, count, "lambdas")?.iter().map(|z| C::from(*z)).collect();
        let curve = ZnCurve::new(n, &l).map_err(lib_err)?;
        let periods = PeriodData::new(&curve).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ZnrhCurve { periods }));
        Ok(())
    })
}

/// Release a curve handle; null is ignored.
///
/// # Safety
/// `curve` must be null or a handle returned by `znrh_curve_new` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn znrh_curve_free(curve: *mut ZnrhCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Genus (N-1)m of the curve, 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn znrh_curve_genus(curve: *const ZnrhCurve) -> usize {
    curve.as_ref().map(|c| c.periods.genus()).unwrap_or(0)
}

/// Branch point k (1-based) after sorting by real part.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn znrh_curve_branch_point(curve: *const ZnrhCurve, k: usize, out: *mut ZnrhComplex) -> ZnrhStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let np = c.periods.curve.npoints();
        if k == 0 || k > np {
            return Err((ZnrhStatus::InvalidArgument, format!("branch point index {k} outside 1..={np}")));
        }
        *out = c.periods.curve.lambda(k).into();
        Ok(())
    })
}

/// Write the g x g Riemann matrix row-major into `out` (length `len` >= g*g).
///
/// # Safety
/// `curve` must be a live handle and `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn znrh_curve_period_matrix(curve: *const ZnrhCurve, out: *mut ZnrhComplex, len: usize) -> ZnrhStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        let g = c.periods.genus();
        if len < g * g {
            return Err((ZnrhStatus::InvalidArgument, format!("buffer holds {len} values, need {}", g * g)));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, g * g);
        for i in 0..g {
            for j in 0..g {
                dst[i * g + j] = c.periods.pi[(i, j)].into();
            }
        }
        Ok(())
    })
}

/// Solve the problem with constants c, d (each of length (N-1)m) normalized at lambda0.
///
/// # Safety
/// `curve` must be a live handle, `c` and `d` must point to `len` values and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn znrh_solution_new(
    curve: *const ZnrhCurve,
    c: *const ZnrhComplex,
    d: *const ZnrhComplex,
    len: usize,
    lambda0: ZnrhComplex,
    out: *mut *mut ZnrhSolution,
) -> ZnrhStatus {
    guard(|| {
        let cv = curve.as_ref().ok_or_else(|| null("curve"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cs: Vec<C> = slice(c, len, "c")?.iter().map(|z| C::from(*z)).collect();
        let ds: Vec<C> = slice(d, len, "d")?.iter().map(|z| C::from(*z)).collect();
        let curve = &cv.periods.curve;
        let ms = rh::build_monodromy(curve.n, curve.m, &cs, &ds).map_err(lib_err)?;
        let ch = rh::chars_from_constants(&ms);
        let sol = RHSolution::new(cv.periods.clone(), ch, lambda0.into(), Some(ms)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ZnrhSolution { sol }));
        Ok(())
    })
}

/// Release a solution handle; null is ignored.
///
/// # Safety
/// `sol` must be null or a handle returned by `znrh_solution_new` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn znrh_solution_free(sol: *mut ZnrhSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Matrix size N of the solution, 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn znrh_solution_size(sol: *const ZnrhSolution) -> usize {
    sol.as_ref().map(|s| s.sol.n()).unwrap_or(0)
}

/// Evaluate Y(lambda) row-major into `out` (length `len` >= N*N).
///
/// # Safety
/// `sol` must be a live handle and `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn znrh_solution_eval(
    sol: *const ZnrhSolution,
    lambda: ZnrhComplex,
    side: ZnrhSide,
    out: *mut ZnrhComplex,
    len: usize,
) -> ZnrhStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        let n = s.sol.n();
        if len < n * n {
            return Err((ZnrhStatus::InvalidArgument, format!("buffer holds {len} values, need {}", n * n)));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let side = match side {
            ZnrhSide::Auto => Side::Auto,
            ZnrhSide::Plus => Side::Plus,
            ZnrhSide::Minus => Side::Minus,
        };
        let y = s.sol.y(lambda.into(), side).map_err(lib_err)?;
        let dst = std::slice::from_raw_parts_mut(out, n * n);
        for r in 0..n {
            for c in 0..n {
                dst[r * n + c] = y[(r, c)].into();
            }
        }
        Ok(())
    })
}

/// Largest jump residual |Y_- - Y_+ G_k| over `per_piece` samples on every contour piece.
///
/// # Safety
/// `sol` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn znrh_solution_jump_residual(sol: *const ZnrhSolution, per_piece: usize, out: *mut f64) -> ZnrhStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = rh::jump_residuals(&s.sol, per_piece.max(1)).map_err(lib_err)?;
        *out = r.into_iter().fold(0.0, f64::max);
        Ok(())
    })
}

/// The isomonodromic tau function at the curve's branch points.
///
/// # Safety
/// `sol` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn znrh_solution_tau(sol: *const ZnrhSolution, out: *mut ZnrhComplex) -> ZnrhStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = znrh::schlesinger::tau(&s.sol).map_err(lib_err)?.value.into();
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Free it with `znrh_string_free`.
#[no_mangle]
pub extern "C" fn znrh_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(m) => CString::new(m.replace('\0', " ")).map(|c| c.into_raw()).unwrap_or(std::ptr::null_mut()),
        None => std::ptr::null_mut(),
    })
}

/// Release a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a pointer obtained from `znrh_last_error` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn znrh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
