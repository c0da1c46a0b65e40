//! C ABI for `mvcrofoot`.
//!
//! Objects are opaque heap handles released with the matching `*_free`.
//! Complex arrays are interleaved `re, im` doubles; matrices are row-major.
//! Every function returns an [`MvcStatus`]; on failure
//! [`mvc_last_error_message`] describes the error.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use mvcrofoot::crofoot::{crofoot_map, crofoot_theta, CrofootPair, Direction, StrictContraction};
use mvcrofoot::inner_function::{
    assemble_inner_with, random_inner, ElementaryFactor, InnerOptions, MatrixInnerFunction,
};
use mvcrofoot::instance::{to_canonical_json, InstanceFile};
use mvcrofoot::linalg::{CMat, CVec};
use mvcrofoot::model_space::ModelVector;
use mvcrofoot::suite::{run_suite, Suite, SuiteConfig};
use mvcrofoot::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotUnitary = 3,
    NotPure = 4,
    FactorInvalid = 5,
    Singular = 6,
    GenerationFailed = 7,
    NotStrict = 8,
    PurityViolation = 9,
    DimensionMismatch = 10,
    Numerical = 11,
    Malformed = 12,
    Io = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvcDirection {
    Forward = 0,
    Inverse = 1,
}

/// A pure matrix inner function.
pub struct MvcInner {
    theta: MatrixInnerFunction,
}

/// An inner function, a strict contraction and the transformed function.
pub struct MvcPair {
    pair: CrofootPair,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> MvcStatus {
    match e {
        Error::NotUnitary { .. } | Error::NotInvolutive { .. } => MvcStatus::NotUnitary,
        Error::NotPure { .. } => MvcStatus::NotPure,
        Error::FactorInvalid(_) | Error::OutOfDisk(_) => MvcStatus::FactorInvalid,
        Error::SingularResolvent | Error::FeedbackSingular => MvcStatus::Singular,
        Error::GenerationFailed { .. } => MvcStatus::GenerationFailed,
        Error::NotStrict { .. } => MvcStatus::NotStrict,
        Error::PurityViolation(_) => MvcStatus::PurityViolation,
        Error::DimensionMismatch(_) | Error::GridMismatch(..) => MvcStatus::DimensionMismatch,
        Error::GridTooCoarse { .. }
        | Error::NotInKTheta { .. }
        | Error::IncompatibleInputs(_)
        | Error::IllConditioned { .. } => MvcStatus::Numerical,
        Error::InvalidGrid(_) => MvcStatus::InvalidArgument,
        Error::Malformed(_) => MvcStatus::Malformed,
        Error::Io(_) => MvcStatus::Io,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), (MvcStatus, String)>>(f: F) -> MvcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MvcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MvcStatus::Panic
        }
    }
}

fn lift(e: Error) -> (MvcStatus, String) {
    (status_of(&e), format!("{}: {e}", e.kind()))
}

fn null(what: &str) -> (MvcStatus, String) {
    (MvcStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: &str) -> (MvcStatus, String) {
    (MvcStatus::InvalidArgument, msg.to_owned())
}

unsafe fn read_complex(ptr: *const f64, count: usize, what: &str) -> Result<Vec<Complex64>, (MvcStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    let raw = std::slice::from_raw_parts(ptr, 2 * count);
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(invalid(&format!("{what} has a non-finite entry")));
    }
    Ok(raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

unsafe fn read_matrix(ptr: *const f64, d: usize, what: &str) -> Result<CMat, (MvcStatus, String)> {
    let v = read_complex(ptr, d * d, what)?;
    Ok(CMat::from_row_slice(d, d, &v))
}

unsafe fn write_matrix(out: *mut f64, m: &CMat) -> Result<(), (MvcStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let buf = std::slice::from_raw_parts_mut(out, 2 * m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let k = 2 * (i * m.ncols() + j);
            buf[k] = m[(i, j)].re;
            buf[k + 1] = m[(i, j)].im;
        }
    }
    Ok(())
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (MvcStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (MvcStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (MvcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mvc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Seeded random pure inner function of size `d` and degree `n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mvc_inner_random(
    d: usize,
    n: usize,
    seed: u64,
    symmetric: bool,
    radius_cap: f64,
    out: *mut *mut MvcInner,
) -> MvcStatus {
    guard(|| {
        let theta = random_inner(d, n, seed, symmetric, radius_cap).map_err(lift)?;
        store(out, MvcInner { theta })
    })
}

/// `Θ = U0·F_1⋯F_n` with `F_k` the factor with zero `zeros[k]` and unit
/// direction `directions[k·d .. (k+1)·d]`.
///
/// # Safety
/// `u0` holds `2·d·d` doubles, `zeros` `2·n`, `directions` `2·n·d`;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mvc_inner_assemble(
    d: usize,
    u0: *const f64,
    n: usize,
    zeros: *const f64,
    directions: *const f64,
    radius_cap: f64,
    out: *mut *mut MvcInner,
) -> MvcStatus {
    guard(|| {
        if d == 0 || n == 0 {
            return Err(invalid("d and n must be positive"));
        }
        let u0 = read_matrix(u0, d, "u0")?;
        let zeros = read_complex(zeros, n, "zeros")?;
        let dirs = read_complex(directions, n * d, "directions")?;
        let factors = zeros
            .iter()
            .zip(dirs.chunks_exact(d))
            .map(|(&a, u)| ElementaryFactor::new(a, CVec::from_column_slice(u)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(lift)?;
        let opts = InnerOptions { radius_cap, ..InnerOptions::default() };
        let theta = assemble_inner_with(u0, factors, &opts).map_err(lift)?;
        store(out, MvcInner { theta })
    })
}

/// # Safety
/// `h` is null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mvc_inner_free(h: *mut MvcInner) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Size `d`, or 0 for a null handle.
///
/// # Safety
/// `h` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mvc_inner_dim(h: *const MvcInner) -> usize {
    h.as_ref().map_or(0, |h| h.theta.dim())
}

/// Degree `n = dim K_Θ`, or 0 for a null handle.
///
/// # Safety
/// `h` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mvc_inner_degree(h: *const MvcInner) -> usize {
    h.as_ref().map_or(0, |h| h.theta.degree())
}

/// Writes `Θ(re + i·im)` into `out` (`2·d·d` doubles).
///
/// # Safety
/// `h` is live and `out` has room for `2·d·d` doubles.
#[no_mangle]
pub unsafe extern "C" fn mvc_inner_evaluate(h: *const MvcInner, re: f64, im: f64, out: *mut f64) -> MvcStatus {
    guard(|| {
        let h = borrow(h, "inner function")?;
        let v = h.theta.evaluate(Complex64::new(re, im)).map_err(lift)?;
        write_matrix(out, &v)
    })
}

/// Builds the transformed function for the strict contraction `w`.
///
/// # Safety
/// `theta` is live, `w` holds `2·d·d` doubles and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn mvc_pair_new(theta: *const MvcInner, w: *const f64, out: *mut *mut MvcPair) -> MvcStatus {
    guard(|| {
        let theta = borrow(theta, "inner function")?;
        let w = read_matrix(w, theta.theta.dim(), "w")?;
        let w = StrictContraction::new(w).map_err(lift)?;
        let pair = crofoot_theta(&theta.theta, &w).map_err(lift)?;
        store(out, MvcPair { pair })
    })
}

/// # Safety
/// `p` is null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mvc_pair_free(p: *mut MvcPair) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Writes `Θ′(re + i·im)` into `out` (`2·d·d` doubles).
///
/// # Safety
/// `p` is live and `out` has room for `2·d·d` doubles.
#[no_mangle]
pub unsafe extern "C" fn mvc_pair_theta_prime_evaluate(p: *const MvcPair, re: f64, im: f64, out: *mut f64) -> MvcStatus {
    guard(|| {
        let p = borrow(p, "pair")?;
        let v = p.pair.theta_prime().evaluate(Complex64::new(re, im)).map_err(lift)?;
        write_matrix(out, &v)
    })
}

/// Applies `J_W` (forward) or its inverse to a coordinate vector of
/// length `n` (`2·n` doubles in, `2·n` doubles out).
///
/// # Safety
/// `p` is live; `input` and `output` each hold `2·n` doubles.
#[no_mangle]
pub unsafe extern "C" fn mvc_pair_map(
    p: *const MvcPair,
    direction: MvcDirection,
    input: *const f64,
    output: *mut f64,
) -> MvcStatus {
    guard(|| {
        let p = borrow(p, "pair")?;
        let n = p.pair.theta().degree();
        let x = CVec::from_vec(read_complex(input, n, "input")?);
        let (source, dir) = match direction {
            MvcDirection::Forward => (p.pair.theta(), Direction::Forward),
            MvcDirection::Inverse => (p.pair.theta_prime(), Direction::Inverse),
        };
        let f = ModelVector::new(source, x).map_err(lift)?;
        let g = crofoot_map(&p.pair, &f, dir).map_err(lift)?;
        write_matrix(output, &CMat::from_column_slice(1, n, g.coords().as_slice()))
    })
}

/// Loads an instance file, runs `suite` and returns the JSON report in
/// `*report` (free with [`mvc_string_free`]). `*passed` tells whether every
/// check passed. A failed check is not an error.
///
/// # Safety
/// `path` and `suite` are NUL-terminated; `report` and `passed` are writable.
#[no_mangle]
pub unsafe extern "C" fn mvc_verify_instance(
    path: *const c_char,
    suite: *const c_char,
    tol: f64,
    grid: usize,
    report: *mut *mut c_char,
    passed: *mut bool,
) -> MvcStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let suite: Suite = read_str(suite, "suite")?.parse().map_err(lift)?;
        if report.is_null() || passed.is_null() {
            return Err(null("output"));
        }
        let (file, instance) = InstanceFile::load(Path::new(path)).map_err(lift)?;
        let cfg = SuiteConfig::new(tol, grid, file.seed).map_err(lift)?;
        let r = run_suite(&instance, suite, &cfg);
        let text = to_canonical_json(&r).map_err(lift)?;
        let text = CString::new(text).map_err(|_| invalid("report contains NUL"))?;
        *passed = r.pass;
        *report = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mvc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
