//! C ABI over the avlr estimator.
//!
//! The surface follows the usual handle-and-status convention: models are
//! opaque `AvlrModel` pointers created by `avlr_train` or
//! `avlr_model_from_json` and released with `avlr_model_free`; every
//! fallible call returns an `AvlrStatus`, and the message for the most
//! recent failure on the current thread is available through
//! `avlr_last_error_message`.
//!
//! Data layout: covariate matrices are row-major `n * d` doubles, masks are
//! row-major `n * d` bytes (nonzero = observed; the value under a zero mask
//! byte is ignored), labels are `n` bytes of 0/1. Strings returned by the
//! library are NUL-terminated UTF-8 owned by the caller and must be freed
//! with `avlr_string_free`.
//!
//! `cargo build` regenerates `include/avlr.h` via cbindgen.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use avlr::predictor::{predict_dataset, PredictConfig};
use avlr::trainer::{fit, FittedModel, TrainConfig};
use avlr::{Dataset, Error};

// ---------------------------------------------------------------------------
// Status codes and error channel
// ---------------------------------------------------------------------------

/// Result of a fallible library call. Numeric values match the CLI's exit
/// codes where a counterpart exists.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvlrStatus {
    /// The call succeeded.
    Ok = 0,
    /// Rejected configuration: bad sizes, non-finite or out-of-range knobs.
    ConfigError = 2,
    /// Rejected input data, including malformed model JSON.
    DataError = 3,
    /// A numeric failure inside training or prediction.
    NumericError = 4,
    /// A required pointer argument was NULL.
    NullArgument = 6,
    /// An internal invariant failed; the library state is still sound.
    InternalError = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn status_of(err: &Error) -> AvlrStatus {
    match err {
        Error::Config(_) | Error::Dim(_) => AvlrStatus::ConfigError,
        Error::Numeric(_) => AvlrStatus::NumericError,
        _ => AvlrStatus::DataError,
    }
}

fn fail(err: &Error) -> AvlrStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Runs a closure, translating panics into `InternalError` so no unwind
/// crosses the C boundary.
fn guarded<F: FnOnce() -> AvlrStatus>(f: F) -> AvlrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            AvlrStatus::InternalError
        }
    }
}

/// The message for the most recent failure on this thread, or NULL if no
/// call has failed yet. The caller owns the string: release it with
/// `avlr_string_free`.
#[no_mangle]
pub extern "C" fn avlr_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Static name for a status code; do not free the result.
#[no_mangle]
pub extern "C" fn avlr_status_name(status: AvlrStatus) -> *const c_char {
    let name: &'static CStr = match status {
        AvlrStatus::Ok => c"ok",
        AvlrStatus::ConfigError => c"config error",
        AvlrStatus::DataError => c"data error",
        AvlrStatus::NumericError => c"numeric error",
        AvlrStatus::NullArgument => c"null argument",
        AvlrStatus::InternalError => c"internal error",
    };
    name.as_ptr()
}

// ---------------------------------------------------------------------------
// Handles and options
// ---------------------------------------------------------------------------

/// Opaque fitted-model handle.
pub struct AvlrModel {
    inner: FittedModel,
}

/// Training knobs. Obtain defaults from `avlr_train_options_default` and
/// override fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AvlrTrainOptions {
    /// Full passes over the training rows.
    pub epochs: usize,
    /// Rows per optimizer step.
    pub batch_size: usize,
    /// Adam learning rate.
    pub learning_rate: f64,
    /// Importance samples per row during training.
    pub k: usize,
    /// Encoder hidden width.
    pub hidden: usize,
    /// Model the missingness mechanism instead of ignoring it.
    pub mnar: bool,
    /// RNG seed; equal seeds give identical models.
    pub seed: u64,
}

#[no_mangle]
pub extern "C" fn avlr_train_options_default() -> AvlrTrainOptions {
    let tc = TrainConfig::default();
    AvlrTrainOptions {
        epochs: tc.epochs,
        batch_size: tc.batch_size,
        learning_rate: tc.learning_rate,
        k: tc.k,
        hidden: tc.hidden,
        mnar: tc.mnar,
        seed: tc.seed,
    }
}

// ---------------------------------------------------------------------------
// Input marshalling
// ---------------------------------------------------------------------------

/// Builds a Dataset from row-major C buffers. `y` may be NULL when labels
/// are not needed (prediction), in which case zeros are used.
///
/// # Safety
/// `x` and `mask` must point to `n * d` readable elements and, when not
/// NULL, `y` to `n` readable bytes.
unsafe fn dataset_from_raw(
    x: *const f64,
    mask: *const u8,
    y: *const u8,
    n: usize,
    d: usize,
) -> Result<Dataset, Error> {
    if n == 0 || d == 0 {
        return Err(Error::Config("n and d must be positive".into()));
    }
    let x = std::slice::from_raw_parts(x, n * d).to_vec();
    let mask: Vec<bool> = std::slice::from_raw_parts(mask, n * d)
        .iter()
        .map(|&m| m != 0)
        .collect();
    let y = if y.is_null() {
        vec![0u8; n]
    } else {
        std::slice::from_raw_parts(y, n).to_vec()
    };
    Dataset::new(n, d, x, mask, y)
}

// ---------------------------------------------------------------------------
// Lifecycle
// ---------------------------------------------------------------------------

/// Fits a model on `n` rows of `d` covariates and writes the new handle to
/// `out_model`. Pass NULL options to train with the defaults.
///
/// # Safety
/// `x` and `mask` must point to `n * d` readable elements, `y` to `n`
/// readable bytes, `out_model` to a writable pointer slot, and `options`,
/// when not NULL, to a valid `AvlrTrainOptions`.
#[no_mangle]
pub unsafe extern "C" fn avlr_train(
    x: *const f64,
    mask: *const u8,
    y: *const u8,
    n: usize,
    d: usize,
    options: *const AvlrTrainOptions,
    out_model: *mut *mut AvlrModel,
) -> AvlrStatus {
    if x.is_null() || mask.is_null() || y.is_null() || out_model.is_null() {
        set_error("avlr_train: NULL argument");
        return AvlrStatus::NullArgument;
    }
    guarded(|| {
        let opts = if options.is_null() {
            avlr_train_options_default()
        } else {
            *options
        };
        let config = TrainConfig {
            epochs: opts.epochs,
            batch_size: opts.batch_size,
            learning_rate: opts.learning_rate,
            k: opts.k,
            hidden: opts.hidden,
            mnar: opts.mnar,
            seed: opts.seed,
        };
        let data = match dataset_from_raw(x, mask, y, n, d) {
            Ok(data) => data,
            Err(e) => return fail(&e),
        };
        match fit(&data, &config) {
            Ok((model, _history)) => {
                *out_model = Box::into_raw(Box::new(AvlrModel { inner: model }));
                AvlrStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a model handle. NULL is a no-op.
///
/// # Safety
/// `model` must be NULL or a pointer produced by this library that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn avlr_model_free(model: *mut AvlrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Frees a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a string pointer produced by this library that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn avlr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of covariates the model was trained on, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn avlr_model_dim(model: *const AvlrModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).inner.d()
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Serializes the model to JSON and writes a caller-owned string to
/// `out_json` (free with `avlr_string_free`).
///
/// # Safety
/// `model` must be a live handle and `out_json` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn avlr_model_to_json(
    model: *const AvlrModel,
    out_json: *mut *mut c_char,
) -> AvlrStatus {
    if model.is_null() || out_json.is_null() {
        set_error("avlr_model_to_json: NULL argument");
        return AvlrStatus::NullArgument;
    }
    guarded(|| match (*model).inner.to_json() {
        Ok(json) => match CString::new(json) {
            Ok(c) => {
                *out_json = c.into_raw();
                AvlrStatus::Ok
            }
            Err(_) => {
                set_error("model JSON contained an interior NUL byte");
                AvlrStatus::InternalError
            }
        },
        Err(e) => fail(&e),
    })
}

/// Restores a model from `avlr_model_to_json` output and writes the new
/// handle to `out_model`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_model` a writable
/// pointer slot.
#[no_mangle]
pub unsafe extern "C" fn avlr_model_from_json(
    json: *const c_char,
    out_model: *mut *mut AvlrModel,
) -> AvlrStatus {
    if json.is_null() || out_model.is_null() {
        set_error("avlr_model_from_json: NULL argument");
        return AvlrStatus::NullArgument;
    }
    guarded(|| {
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("model JSON is not valid UTF-8");
                return AvlrStatus::DataError;
            }
        };
        match FittedModel::from_json(text) {
            Ok(inner) => {
                *out_model = Box::into_raw(Box::new(AvlrModel { inner }));
                AvlrStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

/// Predicts `P(y = 1)` for `n` rows and writes them to `out_probs`.
/// Incomplete rows are integrated with `s` importance draws per candidate
/// label; `seed` fixes the randomness.
///
/// # Safety
/// `model` must be a live handle; `x` and `mask` must point to `n * d`
/// readable elements; `out_probs` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn avlr_predict_proba(
    model: *const AvlrModel,
    x: *const f64,
    mask: *const u8,
    n: usize,
    d: usize,
    s: usize,
    seed: u64,
    out_probs: *mut f64,
) -> AvlrStatus {
    if model.is_null() || x.is_null() || mask.is_null() || out_probs.is_null() {
        set_error("avlr_predict_proba: NULL argument");
        return AvlrStatus::NullArgument;
    }
    guarded(|| {
        let data = match dataset_from_raw(x, mask, std::ptr::null(), n, d) {
            Ok(data) => data,
            Err(e) => return fail(&e),
        };
        let config = PredictConfig { s, seed };
        match predict_dataset(&(*model).inner, &data, &config) {
            Ok(probs) => {
                std::ptr::copy_nonoverlapping(probs.as_ptr(), out_probs, n);
                AvlrStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes the posterior-mean completion of `x` (row-major `n * d`) to
/// `out_x`: observed cells pass through, missing cells get their
/// variational posterior mean given the row's observed values and label.
///
/// # Safety
/// `model` must be a live handle; `x` and `mask` must point to `n * d`
/// readable elements; `y` to `n` readable bytes; `out_x` to `n * d`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn avlr_impute(
    model: *const AvlrModel,
    x: *const f64,
    mask: *const u8,
    y: *const u8,
    n: usize,
    d: usize,
    out_x: *mut f64,
) -> AvlrStatus {
    if model.is_null() || x.is_null() || mask.is_null() || y.is_null() || out_x.is_null() {
        set_error("avlr_impute: NULL argument");
        return AvlrStatus::NullArgument;
    }
    guarded(|| {
        let data = match dataset_from_raw(x, mask, y, n, d) {
            Ok(data) => data,
            Err(e) => return fail(&e),
        };
        match (*model).inner.impute_posterior_mean(&data) {
            Ok(filled) => {
                std::ptr::copy_nonoverlapping(filled.as_ptr(), out_x, n * d);
                AvlrStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
