//! C interface to `wirtflow`.
//!
//! Complex vectors cross the boundary as interleaved `double` arrays
//! `[re0, im0, re1, im1, …]`; every length argument counts complex entries.
//! Functions return a [`WfStatus`]; on failure [`wf_last_error`] describes
//! the problem. Ensembles are opaque and must be released with
//! [`wf_ensemble_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wirtflow::init::{spectral_init, SpectralConfig};
use wirtflow::io::load_cdpe;
use wirtflow::measurements::{
    pattern_moments, CdpEnsemble, Ensemble, GaussianEnsemble, MeasurementOperator, Observations, PatternKind,
};
use wirtflow::rng::RandomSource;
use wirtflow::solver::{solve, Schedule, SolverConfig};
use wirtflow::vector::{dist, ComplexVector};
use wirtflow::{Complex64, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Io = 4,
    Diverged = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WfPattern {
    Octanary = 0,
    Ternary = 1,
}

impl From<WfPattern> for PatternKind {
    fn from(p: WfPattern) -> Self {
        match p {
            WfPattern::Octanary => PatternKind::Octanary,
            WfPattern::Ternary => PatternKind::Ternary,
        }
    }
}

/// Measurement ensemble handle.
pub struct WfEnsemble {
    inner: Ensemble,
}

/// Solver settings. A positive `constant_mu` selects a constant step;
/// otherwise `mu_τ = min(1 − exp(−τ/tau0), mu_max)`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WfSolveOptions {
    pub max_iterations: usize,
    pub tau0: f64,
    pub mu_max: f64,
    pub constant_mu: f64,
    pub gradient_tolerance: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WfMoments {
    pub mean_re: f64,
    pub mean_im: f64,
    pub second_re: f64,
    pub second_im: f64,
    pub abs2: f64,
    pub abs4: f64,
    pub max_abs: f64,
    pub symmetric: bool,
    pub admissible: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> WfStatus {
    match e {
        Error::DimensionMismatch { .. } => WfStatus::DimensionMismatch,
        Error::Io(_) | Error::Format(_) | Error::Image(_) | Error::Serialization(_) => WfStatus::Io,
        Error::Divergence { .. } => WfStatus::Diverged,
        _ => WfStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn guard<F: FnOnce() -> Outcome>(f: F) -> WfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            WfStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            WfStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            WfStatus::Panic
        }
    }
}

unsafe fn handle<'a>(h: *const WfEnsemble) -> Result<&'a Ensemble, Failure> {
    h.as_ref().map(|e| &e.inner).ok_or(Failure::Null("ensemble"))
}

unsafe fn read_complex(p: *const f64, len: usize, what: &'static str) -> Result<Vec<Complex64>, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    let raw = std::slice::from_raw_parts(p, 2 * len);
    Ok(raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

unsafe fn read_vector(p: *const f64, len: usize, what: &'static str) -> Result<ComplexVector, Failure> {
    Ok(ComplexVector::new(read_complex(p, len, what)?)?)
}

unsafe fn write_complex(out: *mut f64, values: &[Complex64]) -> Outcome {
    if out.is_null() {
        return Err(Failure::Null("output"));
    }
    let dst = std::slice::from_raw_parts_mut(out, 2 * values.len());
    for (d, v) in dst.chunks_exact_mut(2).zip(values) {
        d[0] = v.re;
        d[1] = v.im;
    }
    Ok(())
}

unsafe fn read_observations(p: *const f64, len: usize) -> Result<Observations, Failure> {
    if p.is_null() {
        return Err(Failure::Null("observations"));
    }
    Ok(Observations::new(std::slice::from_raw_parts(p, len).to_vec())?)
}

fn expect_len(expected: usize, actual: usize) -> Outcome {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual }.into());
    }
    Ok(())
}

unsafe fn store(out: *mut *mut WfEnsemble, inner: Ensemble) -> Outcome {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(WfEnsemble { inner }));
    Ok(())
}

/// Message for the most recent failing call on this thread, or "".
/// The pointer stays valid until the next call into this library from the
/// same thread.
#[no_mangle]
pub extern "C" fn wf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn wf_solve_options_default() -> WfSolveOptions {
    WfSolveOptions { max_iterations: 300, tau0: 330.0, mu_max: 0.4, constant_mu: 0.0, gradient_tolerance: 0.0 }
}

/// Samples `m` complex Gaussian sampling vectors in dimension `n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn wf_gaussian_ensemble_new(
    n: usize,
    m: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut WfEnsemble,
) -> WfStatus {
    guard(|| {
        let ens = GaussianEnsemble::sample(n, m, &mut RandomSource::new(seed, stream))?;
        store(out, Ensemble::Gaussian(ens))
    })
}

/// Samples `patterns` modulation codes of length `n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn wf_cdp_ensemble_new(
    n: usize,
    patterns: usize,
    pattern: WfPattern,
    seed: u64,
    stream: u64,
    out: *mut *mut WfEnsemble,
) -> WfStatus {
    guard(|| {
        let dist = PatternKind::from(pattern).distribution()?;
        let ens = CdpEnsemble::sample(n, patterns, &dist, &mut RandomSource::new(seed, stream))?;
        store(out, Ensemble::Cdp(ens))
    })
}

/// Loads codes from a CDPE1 file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` as for the constructors.
#[no_mangle]
pub unsafe extern "C" fn wf_cdp_ensemble_load(path: *const c_char, out: *mut *mut WfEnsemble) -> WfStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::Precondition("path is not valid UTF-8".into()))?;
        store(out, Ensemble::Cdp(load_cdpe(path)?))
    })
}

/// # Safety
/// `ensemble` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wf_ensemble_free(ensemble: *mut WfEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// Signal dimension `n`, or 0 for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wf_ensemble_dim(ensemble: *const WfEnsemble) -> usize {
    ensemble.as_ref().map_or(0, |e| e.inner.dim())
}

/// Number of measurements `m`, or 0 for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wf_ensemble_measurements(ensemble: *const WfEnsemble) -> usize {
    ensemble.as_ref().map_or(0, |e| e.inner.num_measurements())
}

/// `out = A z`; `z` holds `n` and `out` room for `m` complex entries.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn wf_forward(
    ensemble: *const WfEnsemble,
    z: *const f64,
    n: usize,
    out: *mut f64,
    m: usize,
) -> WfStatus {
    guard(|| {
        let ens = handle(ensemble)?;
        expect_len(ens.dim(), n)?;
        expect_len(ens.num_measurements(), m)?;
        let v = read_vector(z, n, "z")?;
        write_complex(out, ens.forward(&v)?.as_slice())
    })
}

/// `out = A^* v`; `v` holds `m` and `out` room for `n` complex entries.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn wf_adjoint(
    ensemble: *const WfEnsemble,
    v: *const f64,
    m: usize,
    out: *mut f64,
    n: usize,
) -> WfStatus {
    guard(|| {
        let ens = handle(ensemble)?;
        expect_len(ens.dim(), n)?;
        expect_len(ens.num_measurements(), m)?;
        let v = read_vector(v, m, "v")?;
        write_complex(out, ens.adjoint(&v)?.as_slice())
    })
}

/// `y = |A x|²` into `m` real values.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn wf_observe(
    ensemble: *const WfEnsemble,
    x: *const f64,
    n: usize,
    y: *mut f64,
    m: usize,
) -> WfStatus {
    guard(|| {
        let ens = handle(ensemble)?;
        expect_len(ens.dim(), n)?;
        expect_len(ens.num_measurements(), m)?;
        let x = read_vector(x, n, "x")?;
        if y.is_null() {
            return Err(Failure::Null("y"));
        }
        let obs = ens.observe(&x)?;
        std::slice::from_raw_parts_mut(y, m).copy_from_slice(obs.as_slice());
        Ok(())
    })
}

/// Spectral initialization with `power_iterations` power steps started from
/// the stream `(seed, 0)`. Writes `n` complex entries to `z_out`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn wf_spectral_init(
    ensemble: *const WfEnsemble,
    y: *const f64,
    m: usize,
    power_iterations: usize,
    seed: u64,
    z_out: *mut f64,
    n: usize,
) -> WfStatus {
    guard(|| {
        let ens = handle(ensemble)?;
        expect_len(ens.dim(), n)?;
        expect_len(ens.num_measurements(), m)?;
        let y = read_observations(y, m)?;
        let config = SpectralConfig::with_power_iterations(power_iterations);
        let init = spectral_init(ens, &y, &config, &mut RandomSource::new(seed, 0))?;
        write_complex(z_out, init.z.as_slice())
    })
}

/// Runs Wirtinger Flow from `z0`; writes the final iterate to `z_out` and,
/// when `iterations_run` is non-null, the number of gradient evaluations.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `options` may be null for
/// the defaults.
#[no_mangle]
pub unsafe extern "C" fn wf_solve(
    ensemble: *const WfEnsemble,
    y: *const f64,
    m: usize,
    z0: *const f64,
    n: usize,
    options: *const WfSolveOptions,
    z_out: *mut f64,
    iterations_run: *mut usize,
) -> WfStatus {
    guard(|| {
        let ens = handle(ensemble)?;
        expect_len(ens.dim(), n)?;
        expect_len(ens.num_measurements(), m)?;
        let y = read_observations(y, m)?;
        let z0 = read_vector(z0, n, "z0")?;
        let opts = options.as_ref().copied().unwrap_or_else(|| wf_solve_options_default());
        let schedule = if opts.constant_mu > 0.0 {
            Schedule::constant(opts.constant_mu)
        } else {
            Schedule::heuristic(opts.tau0, opts.mu_max)
        };
        let config = SolverConfig::new(opts.max_iterations, schedule).with_gradient_tolerance(opts.gradient_tolerance);
        let result = solve(ens, &y, &z0, &config, None)?;
        write_complex(z_out, result.z_final.as_slice())?;
        if !iterations_run.is_null() {
            *iterations_run = result.iterations_run;
        }
        Ok(())
    })
}

/// Distance between `z` and `x` up to a global phase.
///
/// # Safety
/// `z` and `x` must hold `n` complex entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wf_dist(z: *const f64, x: *const f64, n: usize, out: *mut f64) -> WfStatus {
    guard(|| {
        let z = read_vector(z, n, "z")?;
        let x = read_vector(x, n, "x")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = dist(&z, &x)?;
        Ok(())
    })
}

/// Exact moments of a built-in modulation distribution.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wf_pattern_moments(pattern: WfPattern, out: *mut WfMoments) -> WfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let r = pattern_moments(&PatternKind::from(pattern).distribution()?);
        *out = WfMoments {
            mean_re: r.mean.re,
            mean_im: r.mean.im,
            second_re: r.second_moment.re,
            second_im: r.second_moment.im,
            abs2: r.abs2,
            abs4: r.abs4,
            max_abs: r.max_abs,
            symmetric: r.symmetric,
            admissible: r.admissible,
        };
        Ok(())
    })
}
