//! C ABI over `lattice_smooth`.
//!
//! Objects cross the boundary as opaque handles created by `ls_*_new` or
//! `ls_*_generate` and released by the matching `ls_*_free`. Every fallible
//! function returns an [`LsStatus`]; on failure the message is available from
//! [`ls_last_error_message`] on the same thread. Structured inputs and
//! outputs (generator specs, marginal laws, study configs and reports) are
//! JSON strings in UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lattice_smooth::experiment::{self, ExperimentConfig};
use lattice_smooth::orlicz::{self, MarginalSpec, YoungFunctionBeta};
use lattice_smooth::{EstimationProblem, Error, FieldSample, GeneratorSpec, KernelSpec, LatticeShape};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Numerical = 4,
    Divergent = 5,
    Unsupported = 6,
    Config = 7,
    Capacity = 8,
    Io = 9,
    Panic = 10,
}

/// Realized error field.
pub struct LsField(FieldSample);

/// Probability kernel on `[-1, 1]^d`.
pub struct LsKernel(KernelSpec);

/// Design, bandwidth and kernel of one estimation problem.
pub struct LsProblem(EstimationProblem);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LsStatus {
    match e {
        Error::Validation(_) => LsStatus::InvalidArgument,
        Error::Capacity(_) => LsStatus::Capacity,
        Error::UnsupportedModel(_) => LsStatus::Unsupported,
        Error::Domain(_) => LsStatus::Domain,
        Error::DegenerateBandwidth(_) | Error::Configuration(_) | Error::Json(_) => LsStatus::Config,
        Error::Numerical { .. } => LsStatus::Numerical,
        Error::Divergent(_) => LsStatus::Divergent,
        Error::Replication { source, .. } => status_of(source),
        Error::Io(_) => LsStatus::Io,
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

fn guard<F>(body: F) -> LsStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            LsStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            LsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            LsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::Validation(format!("{what} is not valid UTF-8"))))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

fn json_error(e: serde_json::Error) -> Failure {
    Failure::Lib(Error::Configuration(format!("invalid JSON: {e}")))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Draws a field on `{1..n}^d` from a JSON generator spec.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_field_generate(
    spec_json: *const c_char,
    d: usize,
    n: usize,
    seed: u64,
    out: *mut *mut LsField,
) -> LsStatus {
    guard(|| {
        let spec: GeneratorSpec = serde_json::from_str(str_arg(spec_json, "spec_json")?).map_err(json_error)?;
        let shape = LatticeShape::new(d, n)?;
        let field = lattice_smooth::generate(&spec, shape, seed)?;
        write_out(out, Box::into_raw(Box::new(LsField(field))), "out")
    })
}

/// Number of sites `n^d`, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_field_len(field: *const LsField) -> usize {
    field.as_ref().map_or(0, |f| f.0.values().len())
}

/// Copies the field values in row-major order (first axis slowest) into
/// `buffer`, which must hold `len` doubles with `len` equal to the site count.
///
/// # Safety
/// `field` must be a live handle and `buffer` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ls_field_values(field: *const LsField, buffer: *mut f64, len: usize) -> LsStatus {
    guard(|| {
        let f = handle(field, "field")?;
        if buffer.is_null() {
            return Err(Failure::Null("buffer"));
        }
        let values = f.0.values();
        if len != values.len() {
            return Err(Error::Validation(format!("buffer holds {len} values, field has {}", values.len())).into());
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buffer, len);
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_field_free(field: *mut LsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Uniform density `2^-d` on `[-1, 1]^d`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_kernel_uniform(d: usize, out: *mut *mut LsKernel) -> LsStatus {
    guard(|| {
        let k = KernelSpec::uniform(d)?;
        write_out(out, Box::into_raw(Box::new(LsKernel(k))), "out")
    })
}

/// Normalized `height + tent * prod_k (1 - |u_k|)` on `[-1, 1]^d`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_kernel_pedestal(d: usize, height: f64, tent: f64, out: *mut *mut LsKernel) -> LsStatus {
    guard(|| {
        let k = KernelSpec::pedestal(d, height, tent)?;
        write_out(out, Box::into_raw(Box::new(LsKernel(k))), "out")
    })
}

/// `K(u)` for a point `u` of length `d`.
///
/// # Safety
/// `kernel` must be a live handle, `u` valid for `d` reads and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_kernel_eval(kernel: *const LsKernel, u: *const f64, d: usize, value: *mut f64) -> LsStatus {
    guard(|| {
        let k = handle(kernel, "kernel")?;
        if d != k.0.dim() {
            return Err(Error::Domain(format!("point has {d} coordinates, kernel dimension is {}", k.0.dim())).into());
        }
        let u = slice_arg(u, d, "u")?;
        write_out(value, k.0.eval(u), "value")
    })
}

/// Certified lower bound, upper bound and Lipschitz constant.
///
/// # Safety
/// `kernel` must be a live handle and the three outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ls_kernel_constants(
    kernel: *const LsKernel,
    lower: *mut f64,
    upper: *mut f64,
    lipschitz: *mut f64,
) -> LsStatus {
    guard(|| {
        let k = handle(kernel, "kernel")?;
        write_out(lower, k.0.lower(), "lower")?;
        write_out(upper, k.0.upper(), "upper")?;
        write_out(lipschitz, k.0.lipschitz(), "lipschitz")
    })
}

/// # Safety
/// `kernel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_kernel_free(kernel: *mut LsKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Estimation problem on `{1..n}^d` with bandwidth `h`; the kernel is copied.
///
/// # Safety
/// `kernel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_problem_new(
    kernel: *const LsKernel,
    n: usize,
    h: f64,
    out: *mut *mut LsProblem,
) -> LsStatus {
    guard(|| {
        let k = handle(kernel, "kernel")?;
        let shape = LatticeShape::new(k.0.dim(), n)?;
        let p = EstimationProblem::new(shape, k.0.clone(), h)?;
        write_out(out, Box::into_raw(Box::new(LsProblem(p))), "out")
    })
}

/// `sum_i a_i(x)`.
///
/// # Safety
/// `problem` must be a live handle, `x` valid for `d` reads, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_problem_weight_sum(problem: *const LsProblem, x: *const f64, d: usize, value: *mut f64) -> LsStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let x = slice_arg(x, d, "x")?;
        write_out(value, p.0.weight_sum(x)?, "value")
    })
}

/// `g_n(x)` for observations `y` of length `n^d` in row-major order.
///
/// # Safety
/// `problem` must be a live handle, `y` valid for `len` reads, `x` for `d`
/// reads and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_problem_estimate(
    problem: *const LsProblem,
    y: *const f64,
    len: usize,
    x: *const f64,
    d: usize,
    value: *mut f64,
) -> LsStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let y = slice_arg(y, len, "y")?;
        let x = slice_arg(x, d, "x")?;
        write_out(value, p.0.estimate(y, x)?, "value")
    })
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_problem_free(problem: *mut LsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// `psi_beta(x)` for `x >= 0`.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_psi(beta: f64, x: f64, value: *mut f64) -> LsStatus {
    guard(|| {
        let yf = YoungFunctionBeta::new(beta)?;
        write_out(value, orlicz::psi_eval(&yf, x)?, "value")
    })
}

/// `2q / (2 - q)` for `0 < q < 2`.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_beta_of_q(q: f64, value: *mut f64) -> LsStatus {
    guard(|| write_out(value, orlicz::beta_of_q(q)?, "value"))
}

/// Luxemburg norm of a JSON marginal law, e.g. `{"law":"gaussian","sigma":1}`.
///
/// # Safety
/// `marginal_json` must be a NUL-terminated string and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_luxemburg_norm(marginal_json: *const c_char, beta: f64, tol: f64, value: *mut f64) -> LsStatus {
    guard(|| {
        let z: MarginalSpec = serde_json::from_str(str_arg(marginal_json, "marginal_json")?).map_err(json_error)?;
        write_out(value, orlicz::luxemburg_norm(&z, beta, tol)?, "value")
    })
}

/// Runs a study on a JSON experiment config and returns its JSON report in
/// `*report`, to be released with [`ls_string_free`]. `study` is one of
/// `rates`, `bias`, `variance`, `simulate`, `estimate`, `conditions`.
///
/// # Safety
/// `study` and `config_json` must be NUL-terminated strings and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_run_study(study: *const c_char, config_json: *const c_char, report: *mut *mut c_char) -> LsStatus {
    guard(|| {
        let study = str_arg(study, "study")?;
        let cfg = ExperimentConfig::from_json(str_arg(config_json, "config_json")?)?;
        let json = match study {
            "rates" => serde_json::to_string(&experiment::run_rate_study(&cfg)?),
            "bias" => serde_json::to_string(&experiment::run_bias_study(&cfg)?),
            "variance" => serde_json::to_string(&experiment::run_variance_study(&cfg)?),
            "simulate" => serde_json::to_string(&experiment::run_simulation(&cfg)?),
            "estimate" => serde_json::to_string(&experiment::run_estimation(&cfg)?),
            "conditions" => serde_json::to_string(&experiment::evaluate_conditions(&cfg)?),
            other => return Err(Error::Configuration(format!("unknown study '{other}'")).into()),
        }
        .map_err(Error::from)?;
        let c = CString::new(json).map_err(|_| Error::Validation("report contains NUL".into()))?;
        write_out(report, c.into_raw(), "report")
    })
}
