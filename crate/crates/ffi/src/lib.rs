//! C ABI for the kgem toolkit.
//!
//! Handles are opaque pointers owned by this library; every constructor has
//! a matching `_free`. Functions return a status code; on failure the
//! thread-local message from [`kgem_last_error`] describes what went wrong.
//! The generated header lives in `include/kgem.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use kgem::cli::RunConfig;
use kgem::data::{load_dataset, Dataset, Triple, TripleFormat, Vocabulary};
use kgem::error::{Error, ErrorCategory};
use kgem::eval::evaluate;
use kgem::scoring::{score, EmbeddingState};

/// Status codes returned by every fallible function.
pub const KGEM_OK: i32 = 0;
pub const KGEM_ERR_NULL_ARGUMENT: i32 = 1;
pub const KGEM_ERR_INVALID_UTF8: i32 = 2;
pub const KGEM_ERR_CONFIG: i32 = 3;
pub const KGEM_ERR_DATA: i32 = 4;
pub const KGEM_ERR_NUMERIC: i32 = 5;
pub const KGEM_ERR_PANIC: i32 = 6;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

fn error_status(err: &Error) -> i32 {
    match err.category() {
        ErrorCategory::Config => KGEM_ERR_CONFIG,
        ErrorCategory::Data => KGEM_ERR_DATA,
        ErrorCategory::Numeric => KGEM_ERR_NUMERIC,
    }
}

/// Message for the most recent failure on this thread. Valid until the next
/// failing call; never null.
#[no_mangle]
pub extern "C" fn kgem_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guard(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            KGEM_ERR_PANIC
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, i32> {
    if ptr.is_null() {
        set_error(&format!("{name} must not be null"));
        return Err(KGEM_ERR_NULL_ARGUMENT);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{name} is not valid UTF-8"));
        KGEM_ERR_INVALID_UTF8
    })
}

unsafe fn optional_path(ptr: *const c_char, name: &str) -> Result<Option<PathBuf>, i32> {
    if ptr.is_null() {
        return Ok(None);
    }
    required_str(ptr, name).map(|s| Some(PathBuf::from(s)))
}

/// An immutable dataset: vocabularies, splits, and the filter set.
pub struct KgemDataset {
    inner: Dataset,
}

/// A trained (or loaded) model: embeddings plus the vocabulary and the
/// resolved configuration it was trained with.
pub struct KgemModel {
    state: EmbeddingState,
    vocab: Vocabulary,
    config: kgem::TrainConfig,
}

/// Link-prediction metrics for a whole test split.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KgemMetrics {
    pub mean_rank_raw: f64,
    pub mean_rank_filtered: f64,
    pub hits_at_k_raw: f64,
    pub hits_at_k_filtered: f64,
}

/// Load a dataset from triple TSV files (`head<TAB>relation<TAB>tail`).
/// `valid` and `test` may be null.
///
/// # Safety
/// Strings must be null or valid NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kgem_dataset_load(
    train: *const c_char,
    valid: *const c_char,
    test: *const c_char,
    out: *mut *mut KgemDataset,
) -> i32 {
    guard(|| {
        if out.is_null() {
            set_error("out must not be null");
            return KGEM_ERR_NULL_ARGUMENT;
        }
        let train = match required_str(train, "train") {
            Ok(s) => PathBuf::from(s),
            Err(code) => return code,
        };
        let valid = match optional_path(valid, "valid") {
            Ok(p) => p,
            Err(code) => return code,
        };
        let test = match optional_path(test, "test") {
            Ok(p) => p,
            Err(code) => return code,
        };
        match load_dataset(&train, valid.as_deref(), test.as_deref(), TripleFormat::HeadRelTail) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(KgemDataset { inner: ds }));
                KGEM_OK
            }
            Err(err) => {
                set_error(&err.to_string());
                error_status(&err)
            }
        }
    })
}

/// Generate a synthetic dataset; `generator` is one of
/// `chain|clustered|random-er`.
///
/// # Safety
/// `generator` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kgem_dataset_generate(
    generator: *const c_char,
    entities: u64,
    relations: u64,
    density: f64,
    seed: u64,
    out: *mut *mut KgemDataset,
) -> i32 {
    guard(|| {
        if out.is_null() {
            set_error("out must not be null");
            return KGEM_ERR_NULL_ARGUMENT;
        }
        let kind = match required_str(generator, "generator") {
            Ok(s) => match kgem::GeneratorKind::parse(s) {
                Ok(k) => k,
                Err(err) => {
                    set_error(&err.to_string());
                    return error_status(&err);
                }
            },
            Err(code) => return code,
        };
        let spec = kgem::SyntheticSpec {
            kind,
            entities: entities as usize,
            relations: relations as usize,
            density,
            seed,
        };
        match kgem::generate(&spec) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(KgemDataset { inner: ds }));
                KGEM_OK
            }
            Err(err) => {
                set_error(&err.to_string());
                error_status(&err)
            }
        }
    })
}

unsafe fn dataset_count(ds: *const KgemDataset, f: fn(&Dataset) -> usize) -> u64 {
    if ds.is_null() {
        return 0;
    }
    f(&(*ds).inner) as u64
}

/// Number of distinct entities across all splits; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn kgem_dataset_num_entities(ds: *const KgemDataset) -> u64 {
    dataset_count(ds, Dataset::num_entities)
}

/// Number of distinct relations across all splits; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn kgem_dataset_num_relations(ds: *const KgemDataset) -> u64 {
    dataset_count(ds, Dataset::num_relations)
}

/// Training triple count; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn kgem_dataset_num_train(ds: *const KgemDataset) -> u64 {
    dataset_count(ds, |d| d.train.len())
}

/// Validation triple count; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn kgem_dataset_num_valid(ds: *const KgemDataset) -> u64 {
    dataset_count(ds, |d| d.valid.len())
}

/// Test triple count; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn kgem_dataset_num_test(ds: *const KgemDataset) -> u64 {
    dataset_count(ds, |d| d.test.len())
}

/// # Safety
/// `ds` must be null or a handle returned by a dataset constructor, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn kgem_dataset_free(ds: *mut KgemDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Train a model. `config_text` is flat `key = value` text (the same format
/// the CLI accepts); it must at least choose a `loss`.
///
/// # Safety
/// `ds` must be a live dataset handle; `config_text` null or a valid string;
/// `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgem_train(
    ds: *const KgemDataset,
    config_text: *const c_char,
    out: *mut *mut KgemModel,
) -> i32 {
    guard(|| {
        if ds.is_null() || out.is_null() {
            set_error("ds and out must not be null");
            return KGEM_ERR_NULL_ARGUMENT;
        }
        let mut run = RunConfig::default();
        if !config_text.is_null() {
            let text = match required_str(config_text, "config_text") {
                Ok(s) => s,
                Err(code) => return code,
            };
            if let Err(err) = run.merge_file(text) {
                set_error(&err.to_string());
                return error_status(&err);
            }
        }
        let config = match run.train_config() {
            Ok(c) => c,
            Err(err) => {
                set_error(&err.to_string());
                return error_status(&err);
            }
        };
        let dataset = &(*ds).inner;
        match kgem::train(dataset, &config) {
            Ok((state, _log)) => {
                *out = Box::into_raw(Box::new(KgemModel {
                    state,
                    vocab: dataset.vocab.clone(),
                    config,
                }));
                KGEM_OK
            }
            Err(err) => {
                set_error(&err.to_string());
                error_status(&err)
            }
        }
    })
}

/// # Safety
/// `model` must be a live model handle; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn kgem_model_save(model: *const KgemModel, path: *const c_char) -> i32 {
    guard(|| {
        if model.is_null() {
            set_error("model must not be null");
            return KGEM_ERR_NULL_ARGUMENT;
        }
        let path = match required_str(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(code) => return code,
        };
        let m = &*model;
        match kgem::checkpoint::save(&m.state, &m.vocab, &m.config, &path) {
            Ok(()) => KGEM_OK,
            Err(err) => {
                set_error(&err.to_string());
                error_status(&err)
            }
        }
    })
}

/// # Safety
/// `path` must be a valid string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgem_model_load(path: *const c_char, out: *mut *mut KgemModel) -> i32 {
    guard(|| {
        if out.is_null() {
            set_error("out must not be null");
            return KGEM_ERR_NULL_ARGUMENT;
        }
        let path = match required_str(path, "path") {
            Ok(s) => PathBuf::from(s),
            Err(code) => return code,
        };
        match kgem::checkpoint::load(&path) {
            Ok((state, vocab, config)) => {
                *out = Box::into_raw(Box::new(KgemModel { state, vocab, config }));
                KGEM_OK
            }
            Err(err) => {
                set_error(&err.to_string());
                error_status(&err)
            }
        }
    })
}

/// Score one labeled triple with the model's norm; lower is better.
///
/// # Safety
/// `model` must be a live model handle; label strings valid; `out_score`
/// valid.
#[no_mangle]
pub unsafe extern "C" fn kgem_model_score(
    model: *const KgemModel,
    head: *const c_char,
    relation: *const c_char,
    tail: *const c_char,
    out_score: *mut f64,
) -> i32 {
    guard(|| {
        if model.is_null() || out_score.is_null() {
            set_error("model and out_score must not be null");
            return KGEM_ERR_NULL_ARGUMENT;
        }
        let m = &*model;
        let resolve = |ptr: *const c_char, name: &str, is_relation: bool| -> Result<usize, i32> {
            let label = required_str(ptr, name)?;
            let id = if is_relation {
                m.vocab.relation_id(label)
            } else {
                m.vocab.entity_id(label)
            };
            id.ok_or_else(|| {
                set_error(&format!("{name} {label:?} is not in the vocabulary"));
                KGEM_ERR_DATA
            })
        };
        let triple = match (
            resolve(head, "head", false),
            resolve(relation, "relation", true),
            resolve(tail, "tail", false),
        ) {
            (Ok(h), Ok(r), Ok(t)) => Triple::new(h, r, t),
            (Err(c), _, _) | (_, Err(c), _) | (_, _, Err(c)) => return c,
        };
        *out_score = score(&m.state, triple, m.config.norm);
        KGEM_OK
    })
}

/// Slack scalar of the model (the learned margin half-width is `|slack|`).
///
/// # Safety
/// `model` must be a live model handle; `out_slack` valid.
#[no_mangle]
pub unsafe extern "C" fn kgem_model_slack(model: *const KgemModel, out_slack: *mut f64) -> i32 {
    guard(|| {
        if model.is_null() || out_slack.is_null() {
            set_error("model and out_slack must not be null");
            return KGEM_ERR_NULL_ARGUMENT;
        }
        *out_slack = (*model).state.slack;
        KGEM_OK
    })
}

/// Evaluate the model on the dataset's test split: raw and filtered Mean
/// Rank and Hits@k.
///
/// # Safety
/// `model` and `ds` must be live handles; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgem_evaluate(
    model: *const KgemModel,
    ds: *const KgemDataset,
    k: u32,
    out: *mut KgemMetrics,
) -> i32 {
    guard(|| {
        if model.is_null() || ds.is_null() || out.is_null() {
            set_error("model, ds, and out must not be null");
            return KGEM_ERR_NULL_ARGUMENT;
        }
        let m = &*model;
        let dataset = match (*ds).inner.reindexed(&m.vocab) {
            Ok(d) => d,
            Err(err) => {
                set_error(&err.to_string());
                return error_status(&err);
            }
        };
        if dataset.test.is_empty() {
            set_error("dataset has no test split");
            return KGEM_ERR_DATA;
        }
        let report = evaluate(&m.state, &dataset.test, &dataset, m.config.norm, k as usize);
        *out = KgemMetrics {
            mean_rank_raw: report.mean_rank_raw,
            mean_rank_filtered: report.mean_rank_filtered,
            hits_at_k_raw: report.hits_at_k_raw,
            hits_at_k_filtered: report.hits_at_k_filtered,
        };
        KGEM_OK
    })
}

/// # Safety
/// `model` must be null or a handle returned by a model constructor, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn kgem_model_free(model: *mut KgemModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
