//! C ABI over the `obal` engine.
//!
//! Every fallible function returns an [`ObalStatus`]; on failure the message
//! is kept per thread and read back with [`obal_last_error_message`]. Engines
//! are opaque handles created by `obal_engine_new` or
//! `obal_engine_from_checkpoint` and released with `obal_engine_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use obal::engine::{EngineConfig, ObalEngine as Engine};
use obal::linalg::{coral_transform, CovMatrix};
use obal::streams::{Instance, TargetInstance};
use obal::ObalError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotInitialized = 4,
    Serialization = 5,
    Numerical = 6,
    Internal = 7,
}

/// Opaque engine handle.
pub struct ObalEngine {
    inner: Engine,
}

/// Outcome of one target instance.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ObalTargetResult {
    /// False while the first initialization batch is being buffered.
    pub has_prediction: bool,
    pub prediction: usize,
    /// Predicted by the ensemble frozen at the last target drift.
    pub stale: bool,
    pub drift: bool,
    pub reinitialized: bool,
}

/// Running totals of an engine.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ObalCounters {
    pub source_drifts: u64,
    pub target_drifts: u64,
    pub reinits: u64,
    pub pool_evictions: u64,
    pub classifiers_created: u64,
    pub max_pool_size: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &ObalError) -> ObalStatus {
    match err {
        ObalError::DimensionMismatch { .. } | ObalError::LengthMismatch { .. } => ObalStatus::DimensionMismatch,
        ObalError::NotInitialized | ObalError::Untrained | ObalError::EmptyEnsemble => ObalStatus::NotInitialized,
        ObalError::Serde(_) | ObalError::FormatVersion { .. } | ObalError::Toml(_) => ObalStatus::Serialization,
        ObalError::NonFinite(_) | ObalError::NotSymmetric(_) => ObalStatus::Numerical,
        _ => ObalStatus::InvalidArgument,
    }
}

struct Failure(ObalStatus, String);

impl From<ObalError> for Failure {
    fn from(e: ObalError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ObalStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic and converts it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ObalStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ObalStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {message}"));
            ObalStatus::Internal
        }
    }
}

unsafe fn slice_in<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn slice_out<'a, T>(data: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(data, len))
}

unsafe fn engine_mut<'a>(engine: *mut ObalEngine) -> Result<&'a mut Engine, Failure> {
    engine.as_mut().map(|e| &mut e.inner).ok_or_else(|| null("engine"))
}

unsafe fn engine_ref<'a>(engine: *const ObalEngine) -> Result<&'a Engine, Failure> {
    engine.as_ref().map(|e| &e.inner).ok_or_else(|| null("engine"))
}

unsafe fn str_in<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(ObalStatus::InvalidArgument, format!("{what} is not UTF-8: {e}")))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length without the NUL.
/// Returns 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn obal_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Creates an engine. `config_json` is a JSON object of engine settings;
/// missing keys take their defaults and a null pointer selects all defaults.
///
/// # Safety
/// `config_json` must be null or a NUL-terminated string; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn obal_engine_new(
    config_json: *const c_char,
    n_sources: usize,
    dim: usize,
    n_classes: usize,
    out: *mut *mut ObalEngine,
) -> ObalStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config: EngineConfig = if config_json.is_null() {
            EngineConfig::default()
        } else {
            serde_json::from_str(str_in(config_json, "config_json")?).map_err(ObalError::from)?
        };
        let inner = Engine::new(config, n_sources, dim, n_classes)?;
        *out = Box::into_raw(Box::new(ObalEngine { inner }));
        Ok(())
    })
}

/// Releases an engine. Null is ignored.
///
/// # Safety
/// `engine` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn obal_engine_free(engine: *mut ObalEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Feeds one labeled instance of source stream `index`. `drift` (nullable)
/// receives whether the source's drift detector fired.
///
/// # Safety
/// `features` must point to `dim` doubles; `drift` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn obal_engine_process_source(
    engine: *mut ObalEngine,
    index: usize,
    features: *const f64,
    dim: usize,
    label: usize,
    timestamp: u64,
    drift: *mut bool,
) -> ObalStatus {
    guard(|| {
        let e = engine_mut(engine)?;
        let x = slice_in(features, dim, "features")?.to_vec();
        let outcome = e.process_source(index, &Instance::labeled(x, label, timestamp))?;
        if let Some(d) = drift.as_mut() {
            *d = outcome.drift;
        }
        Ok(())
    })
}

/// Predicts one unlabeled target instance, then lets it update the engine.
///
/// # Safety
/// `features` must point to `dim` doubles; `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn obal_engine_process_target(
    engine: *mut ObalEngine,
    features: *const f64,
    dim: usize,
    timestamp: u64,
    out: *mut ObalTargetResult,
) -> ObalStatus {
    guard(|| {
        let e = engine_mut(engine)?;
        let x = slice_in(features, dim, "features")?.to_vec();
        let r = e.process_target(&TargetInstance::new(x, timestamp))?;
        if let Some(o) = out.as_mut() {
            *o = ObalTargetResult {
                has_prediction: r.prediction.is_some(),
                prediction: r.prediction.unwrap_or(0),
                stale: r.stale,
                drift: r.drift,
                reinitialized: r.reinitialized,
            };
        }
        Ok(())
    })
}

/// Writes the live ensemble's class distribution for `features` into
/// `proba` (`n_classes` doubles) without updating the engine.
///
/// # Safety
/// `features` must point to `dim` doubles and `proba` to `n_classes` doubles.
#[no_mangle]
pub unsafe extern "C" fn obal_engine_predict_proba(
    engine: *const ObalEngine,
    features: *const f64,
    dim: usize,
    proba: *mut f64,
    n_classes: usize,
) -> ObalStatus {
    guard(|| {
        let e = engine_ref(engine)?;
        let x = slice_in(features, dim, "features")?;
        if n_classes != e.n_classes() {
            return Err(ObalError::DimensionMismatch {
                expected: e.n_classes(),
                actual: n_classes,
            }
            .into());
        }
        let p = e.ensemble_predict(x)?;
        slice_out(proba, n_classes, "proba")?.copy_from_slice(&p);
        Ok(())
    })
}

/// Copies the engine's counters into `out`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn obal_engine_counters(engine: *const ObalEngine, out: *mut ObalCounters) -> ObalStatus {
    guard(|| {
        let e = engine_ref(engine)?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let c = e.counters();
        *o = ObalCounters {
            source_drifts: c.source_drifts,
            target_drifts: c.target_drifts,
            reinits: c.reinits,
            pool_evictions: c.pool_evictions,
            classifiers_created: c.classifiers_created,
            max_pool_size: c.max_pool_size,
        };
        Ok(())
    })
}

/// Serializes the engine to a JSON checkpoint. Release `*out` with
/// `obal_string_free`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn obal_engine_checkpoint(engine: *const ObalEngine, out: *mut *mut c_char) -> ObalStatus {
    guard(|| {
        let e = engine_ref(engine)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = e.to_checkpoint()?;
        let c = CString::new(json).map_err(|e| Failure(ObalStatus::Serialization, e.to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// Restores an engine from a checkpoint written by `obal_engine_checkpoint`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn obal_engine_from_checkpoint(json: *const c_char, out: *mut *mut ObalEngine) -> ObalStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Engine::from_checkpoint(str_in(json, "json")?)?;
        *out = Box::into_raw(Box::new(ObalEngine { inner }));
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn obal_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Computes the `d × d` alignment matrix mapping data with covariance
/// `source_cov` onto `target_cov`. All matrices are row-major.
///
/// # Safety
/// Each pointer must address `d * d` doubles.
#[no_mangle]
pub unsafe extern "C" fn obal_coral_transform(
    source_cov: *const f64,
    target_cov: *const f64,
    d: usize,
    out: *mut f64,
) -> ObalStatus {
    guard(|| {
        let n = d
            .checked_mul(d)
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure(ObalStatus::InvalidArgument, format!("invalid dimension {d}")))?;
        let cs = CovMatrix::from_row_slice(d, slice_in(source_cov, n, "source_cov")?)?;
        let ct = CovMatrix::from_row_slice(d, slice_in(target_cov, n, "target_cov")?)?;
        let a = coral_transform(&cs, &ct)?;
        let dst = slice_out(out, n, "out")?;
        for r in 0..d {
            for c in 0..d {
                dst[r * d + c] = a.matrix()[(r, c)];
            }
        }
        Ok(())
    })
}

/// Percentage of `predictions` equal to `labels`, in `[0, 100]`.
///
/// # Safety
/// Both arrays must hold `n` elements; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn obal_prequential_accuracy(
    predictions: *const usize,
    labels: *const usize,
    n: usize,
    out: *mut f64,
) -> ObalStatus {
    guard(|| {
        let p = slice_in(predictions, n, "predictions")?;
        let y = slice_in(labels, n, "labels")?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = obal::eval::prequential_accuracy(p, y)?.overall;
        Ok(())
    })
}
