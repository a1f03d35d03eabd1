//! C interface.
//!
//! Every fallible function returns an [`SpStatus`]; on failure the message is
//! available from [`sp_last_error`] on the same thread until the next failing
//! call. Objects are opaque handles created by `sp_*_new` and released by the
//! matching `sp_*_free`. Strings returned through `char **` are owned by the
//! caller and released with [`sp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sparsepois::boundaries::{boundary_point, MeansScale};
use sparsepois::detectors::{DetectorKind, PreparedNull};
use sparsepois::harness::{self, CalibrationConfig, GridConfig};
use sparsepois::model::{Hypothesis, ModelSpec, RngStream, Sidedness};
use sparsepois::poisson::{self, PoissonParams};
use sparsepois::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    LengthMismatch = 4,
    UnknownDetector = 5,
    FingerprintMismatch = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpSidedness {
    TwoSided = 0,
    OneSided = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpHypothesis {
    Null = 0,
    Alternative = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpMeansScale {
    Large = 0,
    Small = 1,
}

/// Null means with cached tail tables and threshold sets.
pub struct SpNull(PreparedNull);

/// A resolved scenario: null means plus the alternative.
pub struct SpModel(ModelSpec);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::Domain { .. } => SpStatus::Domain,
        Error::LengthMismatch { .. } => SpStatus::LengthMismatch,
        Error::UnknownDetector(_) => SpStatus::UnknownDetector,
        Error::FingerprintMismatch { .. } => SpStatus::FingerprintMismatch,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => SpStatus::Parse,
        Error::Io(_) => SpStatus::Io,
        _ => SpStatus::InvalidArgument,
    }
}

struct Fail(SpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null_ptr(what: &str) -> Fail {
    Fail(SpStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null_ptr(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null_ptr(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null_ptr(what))
}

fn side(s: SpSidedness) -> Sidedness {
    match s {
        SpSidedness::TwoSided => Sidedness::TwoSided,
        SpSidedness::OneSided => Sidedness::OneSided,
    }
}

fn give_string(s: String, out: &mut *mut c_char) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(SpStatus::InvalidArgument, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message of the last failure on this thread; empty when none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Natural log of the P-value of count `x` under Poisson(`lambda`).
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn sp_poisson_log_pvalue(
    lambda: f64,
    x: u64,
    sidedness: SpSidedness,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = PoissonParams::new(lambda)?;
        *out = match side(sidedness) {
            Sidedness::TwoSided => poisson::two_sided_pvalue(&p, x),
            Sidedness::OneSided => poisson::one_sided_pvalue(&p, x),
        }
        .ln();
        Ok(())
    })
}

/// Natural log of `P(X >= x)` and `P(X <= x)` under Poisson(`lambda`). Either output may be null.
///
/// # Safety
/// Non-null outputs must be valid pointers to doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_poisson_log_tails(
    lambda: f64,
    x: u64,
    log_upper: *mut f64,
    log_lower: *mut f64,
) -> SpStatus {
    guard(|| {
        let p = PoissonParams::new(lambda)?;
        if let Some(u) = log_upper.as_mut() {
            *u = p.survival_upper(x).ln();
        }
        if let Some(l) = log_lower.as_mut() {
            *l = p.survival_lower(x).ln();
        }
        Ok(())
    })
}

/// Detection boundary at `beta` (critical `s`, `r` or `gamma`).
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn sp_boundary(
    beta: f64,
    sidedness: SpSidedness,
    scale: SpMeansScale,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let scale = match scale {
            SpMeansScale::Large => MeansScale::Large,
            SpMeansScale::Small => MeansScale::Small,
        };
        *out = boundary_point(beta, side(sidedness), scale)?.threshold;
        Ok(())
    })
}

/// Prepares the null for `n` means.
///
/// # Safety
/// `lambdas` must point to `n` doubles and `out` to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sp_null_new(lambdas: *const f64, n: usize, out: *mut *mut SpNull) -> SpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let lambdas = slice_arg(lambdas, n, "lambdas")?;
        *out = Box::into_raw(Box::new(SpNull(PreparedNull::new(lambdas)?)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`sp_null_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_null_free(h: *mut SpNull) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of means in the null.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_null_len(h: *const SpNull) -> usize {
    h.as_ref().map_or(0, |h| h.0.n())
}

/// Statistic of the named detector on `counts`. `model` may be null except for "lrt".
/// A statistic of `-inf` means the detector's threshold set was empty.
///
/// # Safety
/// `h` must be live, `detector` NUL-terminated, `counts` must point to `n` values,
/// `model` null or live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sp_null_evaluate(
    h: *const SpNull,
    model: *const SpModel,
    detector: *const c_char,
    counts: *const u64,
    n: usize,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null_ptr("handle"))?;
        let kind = DetectorKind::from_name(str_arg(detector, "detector")?)?;
        let counts = slice_arg(counts, n, "counts")?;
        let out = out_arg(out, "out")?;
        let r = match model.as_ref() {
            Some(m) => h.0.evaluate_against(kind, counts, &m.0)?,
            None => h.0.evaluate(kind, counts)?,
        };
        *out = r.statistic;
        Ok(())
    })
}

/// Simulated critical value of a detector at level `alpha` from `null_reps` null draws.
///
/// # Safety
/// As for [`sp_null_evaluate`].
#[no_mangle]
pub unsafe extern "C" fn sp_calibrate(
    h: *const SpNull,
    model: *const SpModel,
    detector: *const c_char,
    alpha: f64,
    null_reps: usize,
    seed: u64,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null_ptr("handle"))?;
        let kind = DetectorKind::from_name(str_arg(detector, "detector")?)?;
        let out = out_arg(out, "out")?;
        let cfg = CalibrationConfig { alpha, null_reps, seed };
        let cal = harness::calibrate(&h.0, model.as_ref().map(|m| &m.0), &[kind], &cfg)?;
        *out = cal[0].critical_value;
        Ok(())
    })
}

/// Builds a scenario from its JSON description.
///
/// # Safety
/// `json` must be NUL-terminated and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sp_model_from_json(json: *const c_char, out: *mut *mut SpModel) -> SpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec: ModelSpec = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(SpModel(spec)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from [`sp_model_from_json`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_model_free(m: *mut SpModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_model_len(m: *const SpModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.n())
}

/// Copies the model's null means into `out` (length `n`).
///
/// # Safety
/// `m` must be live and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_model_lambdas(m: *const SpModel, out: *mut f64, n: usize) -> SpStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null_ptr("model"))?;
        if n != m.0.n() {
            return Err(Error::LengthMismatch { lambdas: m.0.n(), counts: n }.into());
        }
        if out.is_null() {
            return Err(null_ptr("out"));
        }
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(m.0.lambdas());
        Ok(())
    })
}

/// Draws one sample from the `(seed, stream_id)` random stream into `out` (length `n`).
///
/// # Safety
/// `m` must be live and `out` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn sp_model_sample(
    m: *const SpModel,
    seed: u64,
    stream_id: u64,
    under: SpHypothesis,
    out: *mut u64,
    n: usize,
) -> SpStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null_ptr("model"))?;
        if n != m.0.n() {
            return Err(Error::LengthMismatch { lambdas: m.0.n(), counts: n }.into());
        }
        if out.is_null() {
            return Err(null_ptr("out"));
        }
        let under = match under {
            SpHypothesis::Null => Hypothesis::Null,
            SpHypothesis::Alternative => Hypothesis::Alternative,
        };
        let s = m.0.sample(RngStream::new(seed, stream_id), under);
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&s.counts);
        Ok(())
    })
}

/// Runs a power grid described by `config_json` on `workers` threads (0 = all cores)
/// and returns the CSV table in `*out_csv`.
///
/// # Safety
/// `config_json` must be NUL-terminated and `out_csv` a valid pointer; free the
/// result with [`sp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sp_run_grid_csv(
    config_json: *const c_char,
    workers: usize,
    out_csv: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        let out = out_arg(out_csv, "out_csv")?;
        *out = ptr::null_mut();
        let cfg: GridConfig = serde_json::from_str(str_arg(config_json, "config_json")?).map_err(Error::from)?;
        let grid = harness::run_grid(&cfg, workers)?;
        let mut buf = Vec::new();
        harness::write_grid_csv(&grid.cells, &mut buf)?;
        give_string(String::from_utf8(buf).expect("csv output is UTF-8"), out)
    })
}
