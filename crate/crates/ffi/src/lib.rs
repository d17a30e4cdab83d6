//! C ABI over the tweetkg pipeline.
//!
//! Objects cross the boundary as opaque handles created by `tkg_*_new` /
//! `tkg_*_load` / `tkg_run_all` style constructors and released with the
//! matching `*_free`. Every fallible call returns a [`TkgStatus`]; on failure
//! `tkg_last_error()` describes the error for the calling thread. Strings
//! returned as `char *` are owned by the caller and must be released with
//! `tkg_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use tweetkg::corpus_io::levenshtein_similarity;
use tweetkg::entity_refine::{Annotator, SpotlightClient};
use tweetkg::kg_emit::{validate_graph, ValidationReport};
use tweetkg::metrics::{cohen_kappa, fleiss_kappa, AnnotationMatrix};
use tweetkg::pipeline::{run_all, PipelineConfig, RunReport};
use tweetkg::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TkgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidInput = 5,
    /// Emitted graph failed validation or an IRI could not be minted.
    Invariant = 6,
    Linking = 7,
    /// Statistic undefined for the input (e.g. every rating identical).
    Undefined = 8,
    Panic = 9,
}

/// Pipeline configuration handle.
pub struct TkgConfig {
    inner: PipelineConfig,
}

/// Summary of a full pipeline run.
pub struct TkgRunReport {
    inner: RunReport,
}

/// Result of validating a Turtle graph.
pub struct TkgValidation {
    inner: ValidationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> TkgStatus {
    match e {
        Error::Io { .. } => TkgStatus::Io,
        Error::Parse { .. } => TkgStatus::Parse,
        Error::Invariant(_) | Error::Iri { .. } => TkgStatus::Invariant,
        Error::Linking(_) => TkgStatus::Linking,
        Error::Undefined(_) => TkgStatus::Undefined,
        Error::DuplicatePostId(_) | Error::InvalidTree { .. } | Error::OffsetMismatch { .. } | Error::InvalidInput(_) => {
            TkgStatus::InvalidInput
        }
    }
}

struct Failure(TkgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TkgStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TkgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {msg}"));
            TkgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TkgStatus::NullArgument, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TkgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn tkg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next `tkg_*` call on the same thread.
#[no_mangle]
pub extern "C" fn tkg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from a `tkg_*` function returning `char *` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tkg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default configuration (no input paths set).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tkg_config_new(out: *mut *mut TkgConfig) -> TkgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TkgConfig { inner: PipelineConfig::default() });
        Ok(())
    })
}

/// Loads a TOML configuration; relative paths resolve against its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tkg_config_load(path: *const c_char, out: *mut *mut TkgConfig) -> TkgStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = PipelineConfig::load(path.as_ref())?;
        put(out, TkgConfig { inner: cfg });
        Ok(())
    })
}

unsafe fn config_mut<'a>(cfg: *mut TkgConfig) -> Result<&'a mut PipelineConfig, Failure> {
    cfg.as_mut().map(|c| &mut c.inner).ok_or_else(|| null("config"))
}

/// # Safety
/// `cfg` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tkg_config_set_out_dir(cfg: *mut TkgConfig, dir: *const c_char) -> TkgStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        c.out_dir = PathBuf::from(read_str(dir, "dir")?);
        Ok(())
    })
}

/// Sets one input file. `which` is one of "posts", "first_pass",
/// "second_pass", "coref", "vectors", "patterns".
///
/// # Safety
/// `cfg` must be a live handle; `which` and `path` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn tkg_config_set_input(cfg: *mut TkgConfig, which: *const c_char, path: *const c_char) -> TkgStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        let which = read_str(which, "which")?;
        let path = Some(PathBuf::from(read_str(path, "path")?));
        let slot = match which {
            "posts" => &mut c.input.posts,
            "first_pass" => &mut c.input.first_pass,
            "second_pass" => &mut c.input.second_pass,
            "coref" => &mut c.input.coref,
            "vectors" => &mut c.input.vectors,
            "patterns" => &mut c.extract.patterns,
            other => return Err(Failure(TkgStatus::InvalidInput, format!("unknown input `{other}`"))),
        };
        *slot = path;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tkg_config_set_seed(cfg: *mut TkgConfig, seed: u64) -> TkgStatus {
    guard(|| {
        config_mut(cfg)?.seed = seed;
        Ok(())
    })
}

/// Turns entity linking on or off.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tkg_config_set_linking(cfg: *mut TkgConfig, enabled: bool) -> TkgStatus {
    guard(|| {
        config_mut(cfg)?.linking.enabled = enabled;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tkg_config_free(cfg: *mut TkgConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs normalize, extract and refine/emit, writing every artifact into the
/// configured output directory.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tkg_run_all(cfg: *const TkgConfig, out: *mut *mut TkgRunReport) -> TkgStatus {
    guard(|| {
        let cfg = &cfg.as_ref().ok_or_else(|| null("config"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let client = match (&cfg.linking.endpoint, cfg.linking.enabled) {
            (Some(url), true) => Some(SpotlightClient::new(url)),
            _ => None,
        };
        let report = run_all(cfg, client.as_ref().map(|c| c as &dyn Annotator))?;
        put(out, TkgRunReport { inner: report });
        Ok(())
    })
}

/// Number of statements in the emitted graph; 0 for NULL.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tkg_run_report_statements(r: *const TkgRunReport) -> usize {
    r.as_ref().map_or(0, |r| r.inner.refine_emit.statements)
}

/// Full report as JSON; free with `tkg_string_free`. NULL on a NULL handle.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tkg_run_report_json(r: *const TkgRunReport) -> *mut c_char {
    match r.as_ref() {
        Some(r) => to_c_string(serde_json::to_string(&r.inner).unwrap_or_default()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `r` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tkg_run_report_free(r: *mut TkgRunReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Parses a Turtle file and checks statement reification. Violations are
/// reported through the handle, not the status.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tkg_validate_file(path: *const c_char, out: *mut *mut TkgValidation) -> TkgStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TkgValidation { inner: validate_graph(path.as_ref())? });
        Ok(())
    })
}

/// # Safety
/// `v` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tkg_validation_statements(v: *const TkgValidation) -> usize {
    v.as_ref().map_or(0, |v| v.inner.statements)
}

/// # Safety
/// `v` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tkg_validation_violations(v: *const TkgValidation) -> usize {
    v.as_ref().map_or(0, |v| v.inner.violations.len())
}

/// # Safety
/// `v` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tkg_validation_same_as_links(v: *const TkgValidation) -> usize {
    v.as_ref().map_or(0, |v| v.inner.same_as_links)
}

/// # Safety
/// `v` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tkg_validation_json(v: *const TkgValidation) -> *mut c_char {
    match v.as_ref() {
        Some(v) => to_c_string(v.inner.to_json()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `v` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tkg_validation_free(v: *mut TkgValidation) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Normalized Levenshtein similarity in [0, 1].
///
/// # Safety
/// `a`, `b` must be NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tkg_levenshtein_similarity(a: *const c_char, b: *const c_char, out: *mut f64) -> TkgStatus {
    guard(|| {
        let (a, b) = (read_str(a, "a")?, read_str(b, "b")?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = levenshtein_similarity(a, b);
        Ok(())
    })
}

/// Fleiss' kappa over a row-major `items × categories` count matrix.
///
/// # Safety
/// `counts` must point to `items * categories` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn tkg_fleiss_kappa(counts: *const usize, items: usize, categories: usize, out: *mut f64) -> TkgStatus {
    guard(|| {
        if counts.is_null() {
            return Err(null("counts"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let flat = std::slice::from_raw_parts(counts, items * categories);
        let rows = flat.chunks(categories.max(1)).map(<[usize]>::to_vec).collect();
        *out = fleiss_kappa(&AnnotationMatrix::new(rows)?)?;
        Ok(())
    })
}

/// Cohen's kappa of two raters' integer labels over `n` items.
///
/// # Safety
/// `a` and `b` must point to `n` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn tkg_cohen_kappa(a: *const i32, b: *const i32, n: usize, out: *mut f64) -> TkgStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(null("labels"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (a, b) = (std::slice::from_raw_parts(a, n), std::slice::from_raw_parts(b, n));
        *out = cohen_kappa(a, b)?;
        Ok(())
    })
}
