//! C ABI over `invset-core`.
//!
//! Objects are opaque handles created by `invset_*_new`/`invset_*_run` style
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`InvsetStatus`]; on failure [`invset_last_error`] describes the
//! problem. Strings handed out by the library are NUL-terminated, owned by the
//! caller, and must be released with [`invset_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use invset_core::bell::{run_chsh_experiment, ChshReport, ExperimentConfig, InvariantSetRule};
use invset_core::cantor::{
    cantor_distance, cantor_encode, cantor_membership, euclidean_distance, hausdorff_dimension,
    CantorError, CantorPoint, Membership,
};
use invset_core::padic::{embed, padic_distance, PAdicRational, PadicError};
use invset_core::rational::parse_rational;
use invset_core::trig::{is_rational, snap_cosine, third_side, PhaseAngle, Rationality, TrigError};
use invset_core::BigRational;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvsetStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not UTF-8 or not a number.
    InvalidArgument = 2,
    /// The inputs are well-formed but outside the operation's domain.
    DomainError = 3,
    /// A search budget or size limit was exceeded.
    ResourceLimit = 4,
    /// The library panicked; the call had no effect on its outputs.
    Panic = 5,
}

/// Truncated element of `Q_p`.
pub struct InvsetPadic(PAdicRational);

/// Finite-depth point of the Cantor set `C(p)`.
pub struct InvsetCantorPoint(CantorPoint);

/// Result of a CHSH run on the standard geometry.
pub struct InvsetChshReport(ChshReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(InvsetStatus, String);

impl From<PadicError> for Failure {
    fn from(e: PadicError) -> Self {
        Failure(InvsetStatus::DomainError, e.to_string())
    }
}

impl From<CantorError> for Failure {
    fn from(e: CantorError) -> Self {
        let status = match e {
            CantorError::TooManyIntervals { .. } => InvsetStatus::ResourceLimit,
            _ => InvsetStatus::DomainError,
        };
        Failure(status, e.to_string())
    }
}

impl From<TrigError> for Failure {
    fn from(e: TrigError) -> Self {
        let status = match e {
            TrigError::BudgetExceeded { .. } | TrigError::LevelTooLarge(_) => InvsetStatus::ResourceLimit,
            _ => InvsetStatus::DomainError,
        };
        Failure(status, e.to_string())
    }
}

impl From<invset_core::bell::BellError> for Failure {
    fn from(e: invset_core::bell::BellError) -> Self {
        Failure(InvsetStatus::DomainError, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(InvsetStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> InvsetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            InvsetStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            InvsetStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(InvsetStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn rational_arg(s: *const c_char, what: &str) -> Result<BigRational, Failure> {
    parse_rational(str_arg(s, what)?).map_err(|e| Failure(InvsetStatus::InvalidArgument, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| Failure(InvsetStatus::DomainError, "interior NUL".into()))?;
    out.write(c.into_raw());
    Ok(())
}

unsafe fn write_box<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

/// Message for the last failed call on this thread, or `""`. The pointer stays
/// valid until the next `invset_*` call on the same thread.
#[no_mangle]
pub extern "C" fn invset_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn invset_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn invset_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Embeds a rational (`"a/b"`, integer or decimal) into `Q_p` with `precision`
/// unit digits.
///
/// # Safety
/// `rational` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_padic_new(
    rational: *const c_char,
    p: u64,
    precision: usize,
    out: *mut *mut InvsetPadic,
) -> InvsetStatus {
    guard(|| {
        let q = rational_arg(rational, "rational")?;
        write_box(out, InvsetPadic(embed(&q, p, precision)?))
    })
}

/// # Safety
/// `x` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn invset_padic_free(x: *mut InvsetPadic) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_padic_add(
    x: *const InvsetPadic,
    y: *const InvsetPadic,
    out: *mut *mut InvsetPadic,
) -> InvsetStatus {
    guard(|| {
        let s = handle(x, "x")?.0.add(&handle(y, "y")?.0)?;
        write_box(out, InvsetPadic(s))
    })
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_padic_mul(
    x: *const InvsetPadic,
    y: *const InvsetPadic,
    out: *mut *mut InvsetPadic,
) -> InvsetStatus {
    guard(|| {
        let m = handle(x, "x")?.0.mul(&handle(y, "y")?.0)?;
        write_box(out, InvsetPadic(m))
    })
}

/// `|x|_p` as an exact fraction string.
///
/// # Safety
/// `x` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_padic_norm(x: *const InvsetPadic, out: *mut *mut c_char) -> InvsetStatus {
    guard(|| write_string(out, handle(x, "x")?.0.norm().to_rational().to_string()))
}

/// `|x − y|_p` as an exact fraction string.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_padic_distance(
    x: *const InvsetPadic,
    y: *const InvsetPadic,
    out: *mut *mut c_char,
) -> InvsetStatus {
    guard(|| {
        let d = padic_distance(&handle(x, "x")?.0, &handle(y, "y")?.0)?;
        write_string(out, d.to_rational().to_string())
    })
}

/// Valuation of a nonzero element; `DomainError` for zero.
///
/// # Safety
/// `x` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_padic_valuation(x: *const InvsetPadic, out: *mut i64) -> InvsetStatus {
    guard(|| {
        let v = handle(x, "x")?
            .0
            .valuation()
            .ok_or_else(|| Failure(InvsetStatus::DomainError, "zero has no finite valuation".into()))?;
        write_out(out, v, "out")
    })
}

/// Digit display such as `3^0 · …1112_3`.
///
/// # Safety
/// `x` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_padic_to_string(x: *const InvsetPadic, out: *mut *mut c_char) -> InvsetStatus {
    guard(|| write_string(out, handle(x, "x")?.0.to_string()))
}

/// `F_p(x)` for a p-adic integer `x`.
///
/// # Safety
/// `x` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_cantor_encode(
    x: *const InvsetPadic,
    out: *mut *mut InvsetCantorPoint,
) -> InvsetStatus {
    guard(|| {
        let pt = cantor_encode(&handle(x, "x")?.0)?;
        write_box(out, InvsetCantorPoint(pt))
    })
}

/// # Safety
/// `pt` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn invset_cantor_point_free(pt: *mut InvsetCantorPoint) {
    if !pt.is_null() {
        drop(Box::from_raw(pt));
    }
}

/// Exact coordinate in `[0, 1]` as a fraction string.
///
/// # Safety
/// `pt` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_cantor_point_coordinate(
    pt: *const InvsetCantorPoint,
    out: *mut *mut c_char,
) -> InvsetStatus {
    guard(|| write_string(out, handle(pt, "pt")?.0.coordinate().to_string()))
}

/// p-adic distance `D` between the preimages, as a fraction string.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_cantor_distance(
    a: *const InvsetCantorPoint,
    b: *const InvsetCantorPoint,
    out: *mut *mut c_char,
) -> InvsetStatus {
    guard(|| {
        let d = cantor_distance(&handle(a, "a")?.0, &handle(b, "b")?.0)?;
        write_string(out, d.to_rational().to_string())
    })
}

/// Euclidean distance `E` as a fraction string.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_cantor_euclidean(
    a: *const InvsetCantorPoint,
    b: *const InvsetCantorPoint,
    out: *mut *mut c_char,
) -> InvsetStatus {
    guard(|| write_string(out, euclidean_distance(&handle(a, "a")?.0, &handle(b, "b")?.0).to_string()))
}

/// Writes 0 if `point` survives to `depth`, else the 1-based level removing it.
///
/// # Safety
/// `point` must be a NUL-terminated string; `out_level` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_cantor_membership(
    point: *const c_char,
    p: u64,
    depth: u32,
    out_level: *mut u32,
) -> InvsetStatus {
    guard(|| {
        let q = rational_arg(point, "point")?;
        let level = match cantor_membership(&q, p, depth)? {
            Membership::InsideAtDepth => 0,
            Membership::ExcludedAtDepth(l) => l,
        };
        write_out(out_level, level, "out_level")
    })
}

/// `log p / log(2p − 1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_hausdorff_dimension(p: u64, out: *mut f64) -> InvsetStatus {
    guard(|| write_out(out, hausdorff_dimension(p)?, "out"))
}

/// Decides whether `cos_ac·cos_bc + sin·sin·cos(phase·π)` is rational. When it
/// is, `*out_value` receives the exact value (free it); otherwise NULL.
///
/// # Safety
/// String arguments must be NUL-terminated; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_is_rational(
    cos_ac: *const c_char,
    cos_bc: *const c_char,
    phase: *const c_char,
    out_rational: *mut bool,
    out_value: *mut *mut c_char,
) -> InvsetStatus {
    guard(|| {
        let phase = PhaseAngle::new(rational_arg(phase, "phase")?)?;
        let a = third_side(&rational_arg(cos_ac, "cos_ac")?, &rational_arg(cos_bc, "cos_bc")?, &phase)?;
        if out_value.is_null() {
            return Err(null("out_value"));
        }
        match is_rational(&a) {
            Rationality::Rational(v) => {
                write_out(out_rational, true, "out_rational")?;
                write_string(out_value, v.to_string())
            }
            Rationality::Irrational => {
                write_out(out_rational, false, "out_rational")?;
                out_value.write(ptr::null_mut());
                Ok(())
            }
        }
    })
}

/// Nearest `m / 2^level` to a cosine, ties toward zero.
///
/// # Safety
/// `cosine` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_snap_cosine(
    cosine: *const c_char,
    level: u32,
    out: *mut *mut c_char,
) -> InvsetStatus {
    guard(|| {
        let s = snap_cosine(&rational_arg(cosine, "cosine")?, level)?;
        write_string(out, s.to_string())
    })
}

/// Runs CHSH on the snapped standard geometry at `level`. `n_trials = 0`
/// skips Monte Carlo.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_chsh_run(
    level: u32,
    n_trials: u64,
    seed: u64,
    enforce_rule: bool,
    out: *mut *mut InvsetChshReport,
) -> InvsetStatus {
    guard(|| {
        let rule = if enforce_rule {
            InvariantSetRule::Enforced
        } else {
            InvariantSetRule::Disabled
        };
        let r = run_chsh_experiment(&ExperimentConfig::standard(level), n_trials, seed, rule)?;
        write_box(out, InvsetChshReport(r))
    })
}

/// # Safety
/// `r` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn invset_chsh_report_free(r: *mut InvsetChshReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Exact `A′` as a fraction string.
///
/// # Safety
/// `r` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_chsh_report_a_prime(
    r: *const InvsetChshReport,
    out: *mut *mut c_char,
) -> InvsetStatus {
    guard(|| write_string(out, handle(r, "report")?.0.a_prime_exact.to_string()))
}

/// Whether the joint quantity `A` was reported undefined.
///
/// # Safety
/// `r` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_chsh_report_a_undefined(
    r: *const InvsetChshReport,
    out: *mut bool,
) -> InvsetStatus {
    guard(|| write_out(out, handle(r, "report")?.0.a_status.is_undefined(), "out"))
}

/// Monte Carlo `A′` and its standard error; `DomainError` if the run had no trials.
///
/// # Safety
/// `r` must be live; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_chsh_report_monte_carlo(
    r: *const InvsetChshReport,
    out_a_prime: *mut f64,
    out_stderr: *mut f64,
) -> InvsetStatus {
    guard(|| {
        let r = &handle(r, "report")?.0;
        let (Some(mc), Some(se)) = (r.a_prime_mc, r.stderr) else {
            return Err(Failure(InvsetStatus::DomainError, "run had no Monte Carlo trials".into()));
        };
        write_out(out_a_prime, mc, "out_a_prime")?;
        write_out(out_stderr, se, "out_stderr")
    })
}

/// The full report as JSON.
///
/// # Safety
/// `r` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn invset_chsh_report_json(
    r: *const InvsetChshReport,
    out: *mut *mut c_char,
) -> InvsetStatus {
    guard(|| {
        let json = serde_json::to_string(&handle(r, "report")?.0)
            .map_err(|e| Failure(InvsetStatus::DomainError, e.to_string()))?;
        write_string(out, json)
    })
}
