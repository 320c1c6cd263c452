//! C ABI over `hpi-core`.
//!
//! Every fallible function returns an [`HpiStatus`] and writes its result
//! through an out-pointer. On failure, [`hpi_last_error`] describes what went
//! wrong on the calling thread. Models are opaque [`HpiModel`] handles owned
//! by the caller and released with [`hpi_model_free`].
//!
//! The generated header lives in `include/hpi.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hpi_core::alignment::{global_align_score, ScoringParams};
use hpi_core::eval::{auc_roc, ScoredLabels};
use hpi_core::features::{protein_features, TRIAD_DIM};
use hpi_core::pipeline::score_sequences;
use hpi_core::sampling::Label;
use hpi_core::seqio::sanitize_sequence;
use hpi_core::svm::{load_model, SvmModel};
use hpi_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidInput = 5,
    Internal = 6,
}

/// A trained model. Only ever handled through a pointer.
pub struct HpiModel {
    inner: SvmModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> HpiStatus {
    match err {
        Error::Io { .. } => HpiStatus::Io,
        Error::EmptyFasta
        | Error::DataBeforeHeader { .. }
        | Error::Parse { .. }
        | Error::ModelFormat(_)
        | Error::ModelVersion { .. } => HpiStatus::Parse,
        _ => HpiStatus::InvalidInput,
    }
}

struct Failure(HpiStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> HpiStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HpiStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HpiStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(HpiStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(HpiStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hpi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hpi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Load a model file and store a new handle in `*out_model`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_model` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hpi_model_load(path: *const c_char, out_model: *mut *mut HpiModel) -> HpiStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let model = load_model(Path::new(text(path, "path")?))?;
        *slot = Box::into_raw(Box::new(HpiModel { inner: model }));
        Ok(())
    })
}

/// Release a handle from [`hpi_model_load`]. NULL is ignored.
///
/// # Safety
/// `model` must come from [`hpi_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hpi_model_free(model: *mut HpiModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of features the model expects (686 for pair vectors).
///
/// # Safety
/// `model` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn hpi_model_dim(model: *const HpiModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim)
}

/// Decision value for a host and a virus protein sequence.
///
/// # Safety
/// Strings must be NUL-terminated; `model` a live handle; `out_score` valid.
#[no_mangle]
pub unsafe extern "C" fn hpi_model_predict_sequences(
    model: *const HpiModel,
    host_sequence: *const c_char,
    virus_sequence: *const c_char,
    out_score: *mut f64,
) -> HpiStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let score = score_sequences(
            &model.inner,
            text(host_sequence, "host_sequence")?,
            text(virus_sequence, "virus_sequence")?,
        )?;
        *out(out_score, "out_score")? = score;
        Ok(())
    })
}

/// Decision value for a precomputed feature vector of length `len`.
///
/// # Safety
/// `features` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn hpi_model_decision(
    model: *const HpiModel,
    features: *const f64,
    len: usize,
    out_score: *mut f64,
) -> HpiStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if features.is_null() {
            return Err(null("features"));
        }
        let x = std::slice::from_raw_parts(features, len);
        *out(out_score, "out_score")? = model.inner.decision_function(x)?;
        Ok(())
    })
}

/// Write the 343 normalized triad frequencies of `sequence` into `out`,
/// which must hold `out_len >= 343` doubles.
///
/// # Safety
/// `sequence` must be NUL-terminated; `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hpi_featurize(sequence: *const c_char, out: *mut f64, out_len: usize) -> HpiStatus {
    guard(|| {
        let (clean, _) = sanitize_sequence(text(sequence, "sequence")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len < TRIAD_DIM {
            return Err(Error::Dimension {
                expected: TRIAD_DIM,
                actual: out_len,
            }
            .into());
        }
        let v = protein_features(&clean)?;
        std::slice::from_raw_parts_mut(out, TRIAD_DIM).copy_from_slice(v.as_slice());
        Ok(())
    })
}

/// Global alignment score under BLOSUM62 with a linear gap penalty.
///
/// # Safety
/// Strings must be NUL-terminated; `out_score` valid.
#[no_mangle]
pub unsafe extern "C" fn hpi_align_score(
    a: *const c_char,
    b: *const c_char,
    gap_penalty: i32,
    out_score: *mut i64,
) -> HpiStatus {
    guard(|| {
        let params = ScoringParams {
            gap_penalty,
            ..ScoringParams::default()
        };
        params.validate()?;
        *out(out_score, "out_score")? = global_align_score(text(a, "a")?, text(b, "b")?, &params)?;
        Ok(())
    })
}

/// Area under the ROC curve. `labels[i]` is positive when nonzero.
///
/// # Safety
/// `scores` and `labels` must each point to `n` readable elements.
#[no_mangle]
pub unsafe extern "C" fn hpi_auc_roc(scores: *const f64, labels: *const i8, n: usize, out_auc: *mut f64) -> HpiStatus {
    guard(|| {
        if scores.is_null() || labels.is_null() {
            return Err(null("scores or labels"));
        }
        let s = std::slice::from_raw_parts(scores, n);
        let l: Vec<Label> = std::slice::from_raw_parts(labels, n)
            .iter()
            .map(|&y| if y != 0 { Label::Positive } else { Label::Negative })
            .collect();
        *out(out_auc, "out_auc")? = auc_roc(&ScoredLabels::new(s, &l)?)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_are_recorded_per_thread() {
        let mut score = 0i64;
        let status = unsafe { hpi_align_score(ptr::null(), c"A".as_ptr(), 8, &mut score) };
        assert_eq!(status, HpiStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(hpi_last_error()) }.to_str().unwrap();
        assert!(msg.contains("null"));
        std::thread::spawn(|| assert!(hpi_last_error().is_null()))
            .join()
            .unwrap();
    }

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(hpi_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
