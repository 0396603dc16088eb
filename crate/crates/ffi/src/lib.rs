//! C ABI over `fraudlab`.
//!
//! Datasets and models cross the boundary as opaque pointers that must be
//! released with their matching `*_free` function. Every call returns an
//! [`FlStatus`]; on failure [`fl_last_error`] describes what went wrong on the
//! calling thread. Strings handed out by the library are freed with
//! [`fl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use fraudlab::dataset::{self, SyntheticSpec};
use fraudlab::metrics;
use fraudlab::models::{self, Hyperparams, ModelKind, TrainedModel};
use fraudlab::pipeline::{self, PipelineConfig};
use fraudlab::{Dataset, Error, ErrorKind};

/// Result code of every entry point. The non-zero error values match the
/// CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    Config = 2,
    Data = 3,
    Training = 4,
    Io = 5,
    NullPointer = 10,
    InvalidArgument = 11,
    Panic = 12,
}

impl From<&Error> for FlStatus {
    fn from(e: &Error) -> Self {
        match e.kind() {
            ErrorKind::Config => FlStatus::Config,
            ErrorKind::Data => FlStatus::Data,
            ErrorKind::Training => FlStatus::Training,
            ErrorKind::Io => FlStatus::Io,
        }
    }
}

/// Model family selector for [`fl_model_train`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlModelKind {
    Logreg = 0,
    Knn = 1,
    Tree = 2,
    Svm = 3,
}

impl From<FlModelKind> for ModelKind {
    fn from(k: FlModelKind) -> Self {
        match k {
            FlModelKind::Logreg => ModelKind::Logreg,
            FlModelKind::Knn => ModelKind::Knn,
            FlModelKind::Tree => ModelKind::Tree,
            FlModelKind::Svm => ModelKind::Svm,
        }
    }
}

/// Opaque labelled feature table.
pub struct FlDataset(Dataset);

/// Opaque trained classifier.
pub struct FlModel(TrainedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Failure(FlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(FlStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FlStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(FlStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FlStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            FlStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("output contains an interior NUL byte"))
}

/// Message for the most recent failed call on this thread, or null if the
/// last call succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a CSV with a 0/1 label column.
///
/// # Safety
/// `path` and `label_column` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fl_dataset_load_csv(
    path: *const c_char,
    label_column: *const c_char,
    out: *mut *mut FlDataset,
) -> FlStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let label = read_str(label_column, "label_column")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let data = dataset::load_csv(path, label)?;
        write_out(out, Box::into_raw(Box::new(FlDataset(data))), "out")
    })
}

/// Generates a synthetic two-Gaussian dataset.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_dataset_generate(
    n_total: usize,
    positive_fraction: f64,
    n_features: usize,
    class_mean_separation: f64,
    noise_stddev: f64,
    seed: u64,
    out: *mut *mut FlDataset,
) -> FlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = SyntheticSpec {
            n_total,
            positive_fraction,
            d: n_features,
            class_mean_separation,
            noise_stddev,
        };
        let data = dataset::generate_synthetic(&spec, seed)?;
        write_out(out, Box::into_raw(Box::new(FlDataset(data))), "out")
    })
}

/// Releases a dataset. Null is ignored.
///
/// # Safety
/// `data` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn fl_dataset_free(data: *mut FlDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// # Safety
/// `data` must be a live dataset and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_dataset_rows(data: *const FlDataset, out: *mut usize) -> FlStatus {
    guard(|| write_out(out, deref(data, "data")?.0.n_rows(), "out"))
}

/// # Safety
/// `data` must be a live dataset and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_dataset_cols(data: *const FlDataset, out: *mut usize) -> FlStatus {
    guard(|| write_out(out, deref(data, "data")?.0.n_features(), "out"))
}

/// Counts of label 0 and label 1.
///
/// # Safety
/// `data` must be a live dataset; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_dataset_class_counts(
    data: *const FlDataset,
    negatives: *mut usize,
    positives: *mut usize,
) -> FlStatus {
    guard(|| {
        let (neg, pos) = deref(data, "data")?.0.class_counts();
        if positives.is_null() {
            return Err(null("positives"));
        }
        write_out(negatives, neg, "negatives")?;
        write_out(positives, pos, "positives")
    })
}

/// Copies the 0/1 labels into `labels`, which must hold exactly the row
/// count.
///
/// # Safety
/// `data` must be live and `labels` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fl_dataset_labels(
    data: *const FlDataset,
    labels: *mut u8,
    len: usize,
) -> FlStatus {
    guard(|| {
        let data = deref(data, "data")?;
        if labels.is_null() {
            return Err(null("labels"));
        }
        if len != data.0.n_rows() {
            return Err(invalid(format!(
                "labels buffer holds {len} values but the dataset has {} rows",
                data.0.n_rows()
            )));
        }
        std::slice::from_raw_parts_mut(labels, len).copy_from_slice(data.0.labels());
        Ok(())
    })
}

/// Trains one model with default hyperparameters.
///
/// # Safety
/// `data` must be a live dataset and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_model_train(
    kind: FlModelKind,
    data: *const FlDataset,
    seed: u64,
    out: *mut *mut FlModel,
) -> FlStatus {
    guard(|| {
        let data = deref(data, "data")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let model = models::train(kind.into(), &data.0, &Hyperparams::default(), seed)?;
        write_out(out, Box::into_raw(Box::new(FlModel(model))), "out")
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn fl_model_free(model: *mut FlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Scores every row of `data` into `scores`, which must hold `len` values
/// and `len` must equal the row count.
///
/// # Safety
/// `model` and `data` must be live; `scores` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn fl_model_score(
    model: *const FlModel,
    data: *const FlDataset,
    scores: *mut f64,
    len: usize,
) -> FlStatus {
    guard(|| {
        let model = deref(model, "model")?;
        let data = deref(data, "data")?;
        if scores.is_null() {
            return Err(null("scores"));
        }
        if len != data.0.n_rows() {
            return Err(invalid(format!(
                "scores buffer holds {len} values but the dataset has {} rows",
                data.0.n_rows()
            )));
        }
        let all = model.0.score_all(&data.0)?;
        std::slice::from_raw_parts_mut(scores, len).copy_from_slice(&all);
        Ok(())
    })
}

/// Serializes a model to JSON. Free the result with [`fl_string_free`].
///
/// # Safety
/// `model` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_model_to_json(
    model: *const FlModel,
    out: *mut *mut c_char,
) -> FlStatus {
    guard(|| {
        let model = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = model.0.to_json()?;
        write_out(out, into_c_string(text)?, "out")
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_model_from_json(
    json: *const c_char,
    out: *mut *mut FlModel,
) -> FlStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let model = TrainedModel::from_json(text)?;
        write_out(out, Box::into_raw(Box::new(FlModel(model))), "out")
    })
}

/// ROC AUC of `scores` against 0/1 `labels`, both of length `len`.
///
/// # Safety
/// `labels` and `scores` must each point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn fl_auc(
    labels: *const u8,
    scores: *const f64,
    len: usize,
    out: *mut f64,
) -> FlStatus {
    guard(|| {
        if labels.is_null() {
            return Err(null("labels"));
        }
        if scores.is_null() {
            return Err(null("scores"));
        }
        let labels = std::slice::from_raw_parts(labels, len);
        let scores = std::slice::from_raw_parts(scores, len);
        let curve = metrics::roc_curve(labels, scores)?;
        write_out(out, curve.auc, "out")
    })
}

/// Runs the full pipeline from a TOML config file. When `output_dir` is not
/// null it replaces the config's output directory. On success `report_json`
/// receives the model reports as JSON; free it with [`fl_string_free`].
///
/// # Safety
/// `config_path` must be a NUL-terminated string, `output_dir` null or
/// NUL-terminated, and `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_run_pipeline(
    config_path: *const c_char,
    output_dir: *const c_char,
    report_json: *mut *mut c_char,
) -> FlStatus {
    guard(|| {
        let path = read_str(config_path, "config_path")?;
        if report_json.is_null() {
            return Err(null("report_json"));
        }
        let mut config = PipelineConfig::load(path)?;
        if !output_dir.is_null() {
            config.output_dir = PathBuf::from(read_str(output_dir, "output_dir")?);
        }
        let outcome = pipeline::run_pipeline(&config)?;
        let text = metrics::render_report(
            &outcome.reports,
            metrics::ReportFormat::Json,
            config.table_decimals(),
        )?;
        write_out(report_json, into_c_string(text)?, "report_json")
    })
}
