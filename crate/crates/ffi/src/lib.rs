//! C ABI over `bidfm`.
//!
//! Objects are opaque handles created by `bidfm_*_new`/`bidfm_*_read` style
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`BidfmStatus`]; the message of the last failure on the calling
//! thread is available from [`bidfm_last_error_message`]. Labels crossing the
//! boundary are 1-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bidfm::detect::{detect, Algorithm, DetectOptions, DetectionResult};
use bidfm::interface::{read_matrix, write_matrix};
use bidfm::metrics::{ari, hamming_error, nmi};
use bidfm::model::{ModelConfig, ModelParams};
use bidfm::sampling::{sample_adjacency, DistributionSpec};
use bidfm::{Error, Matrix, Membership};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BidfmStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    Invalid = 3,
    Domain = 4,
    Infeasible = 5,
    Precondition = 6,
    Unsupported = 7,
    Parse = 8,
    Config = 9,
    Io = 10,
    Convergence = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// Detection algorithms, numbered as accepted by [`bidfm_detect`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BidfmAlgorithm {
    Bisc = 0,
    Nbisc = 1,
    Disim = 2,
    Dscore = 3,
    Rdscore = 4,
}

/// Agreement of one estimated partition with the truth.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BidfmMetrics {
    pub error_rate: f64,
    pub nmi: f64,
    pub ari: f64,
}

pub struct BidfmMatrix(Matrix);

pub struct BidfmModel {
    params: ModelParams,
    distribution: Option<DistributionSpec>,
}

pub struct BidfmDetection(DetectionResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> BidfmStatus {
    match e {
        Error::Dimension(_) => BidfmStatus::Dimension,
        Error::Convergence { .. } => BidfmStatus::Convergence,
        Error::Validation(_) => BidfmStatus::Invalid,
        Error::Domain { .. } => BidfmStatus::Domain,
        Error::Infeasible(_) => BidfmStatus::Infeasible,
        Error::Precondition(_) => BidfmStatus::Precondition,
        Error::Unsupported(_) => BidfmStatus::Unsupported,
        Error::Parse { .. } => BidfmStatus::Parse,
        Error::Config(_) => BidfmStatus::Config,
        Error::Io(_) => BidfmStatus::Io,
    }
}

fn fail(status: BidfmStatus, msg: impl Into<String>) -> BidfmStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), BidfmStatus>) -> BidfmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BidfmStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(BidfmStatus::Panic, "internal panic"),
    }
}

trait IntoStatus<T> {
    fn status(self) -> Result<T, BidfmStatus>;
}

impl<T> IntoStatus<T> for bidfm::Result<T> {
    fn status(self) -> Result<T, BidfmStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), BidfmStatus> {
    if p.is_null() {
        Err(fail(BidfmStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, BidfmStatus> {
    non_null(s, what)?;
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(BidfmStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, len: usize) -> Result<(), BidfmStatus> {
    non_null(buf, "buffer")?;
    if len < src.len() {
        return Err(fail(
            BidfmStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

unsafe fn labels_in(labels: *const u32, n: usize, what: &str) -> Result<Membership, BidfmStatus> {
    non_null(labels, what)?;
    let v: Vec<usize> = std::slice::from_raw_parts(labels, n).iter().map(|&l| l as usize).collect();
    Membership::from_one_based(&v, None).status()
}

fn labels_out(m: &Membership) -> Vec<u32> {
    m.one_based().into_iter().map(|l| l as u32).collect()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bidfm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bidfm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bidfm_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut BidfmMatrix,
) -> BidfmStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        let len = rows.checked_mul(cols).ok_or_else(|| fail(BidfmStatus::Dimension, "size overflow"))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let m = Matrix::from_vec(rows, cols, values).status()?;
        store(out, BidfmMatrix(m));
        Ok(())
    })
}

/// Reads a dense matrix text file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bidfm_matrix_read(path: *const c_char, out: *mut *mut BidfmMatrix) -> BidfmStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        non_null(out, "out")?;
        let m = read_matrix(Path::new(path)).status()?;
        store(out, BidfmMatrix(m));
        Ok(())
    })
}

/// # Safety
/// `m` must be a live matrix handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bidfm_matrix_write(m: *const BidfmMatrix, path: *const c_char) -> BidfmStatus {
    guard(|| {
        non_null(m, "matrix")?;
        let path = c_str(path, "path")?;
        write_matrix(Path::new(path), &(*m).0).status()
    })
}

/// # Safety
/// `m` must be a live matrix handle or null.
#[no_mangle]
pub unsafe extern "C" fn bidfm_matrix_rows(m: *const BidfmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// # Safety
/// `m` must be a live matrix handle or null.
#[no_mangle]
pub unsafe extern "C" fn bidfm_matrix_cols(m: *const BidfmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Copies the values, row-major, into `buf` of capacity `len`.
///
/// # Safety
/// `m` must be a live matrix handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bidfm_matrix_copy(m: *const BidfmMatrix, buf: *mut f64, len: usize) -> BidfmStatus {
    guard(|| {
        non_null(m, "matrix")?;
        copy_out((*m).0.as_slice(), buf, len)
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bidfm_matrix_free(m: *mut BidfmMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Builds a model from a TOML configuration.
///
/// # Safety
/// `toml` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bidfm_model_from_toml(toml: *const c_char, out: *mut *mut BidfmModel) -> BidfmStatus {
    guard(|| {
        let text = c_str(toml, "toml")?;
        non_null(out, "out")?;
        let cfg = ModelConfig::from_toml(text).status()?;
        let params = cfg.build().status()?;
        store(
            out,
            BidfmModel {
                params,
                distribution: cfg.distribution,
            },
        );
        Ok(())
    })
}

/// # Safety
/// `model` must be a live model handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bidfm_model_expected_adjacency(
    model: *const BidfmModel,
    out: *mut *mut BidfmMatrix,
) -> BidfmStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        let omega = (*model).params.expected_adjacency().status()?;
        store(out, BidfmMatrix(omega));
        Ok(())
    })
}

/// Samples an adjacency matrix from the model's configured distribution.
///
/// # Safety
/// `model` must be a live model handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bidfm_model_sample(
    model: *const BidfmModel,
    seed: u64,
    out: *mut *mut BidfmMatrix,
) -> BidfmStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        let model = &*model;
        let dist = model
            .distribution
            .ok_or_else(|| fail(BidfmStatus::Config, "the model has no distribution"))?;
        let omega = model.params.expected_adjacency().status()?;
        let a = sample_adjacency(&omega, &dist, seed).status()?;
        store(out, BidfmMatrix(a));
        Ok(())
    })
}

/// Copies the true row labels (1-based) into `buf`.
///
/// # Safety
/// `model` must be a live model handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn bidfm_model_row_labels(model: *const BidfmModel, buf: *mut u32, len: usize) -> BidfmStatus {
    guard(|| {
        non_null(model, "model")?;
        copy_out(&labels_out((*model).params.row()), buf, len)
    })
}

/// Copies the true column labels (1-based) into `buf`.
///
/// # Safety
/// `model` must be a live model handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn bidfm_model_col_labels(model: *const BidfmModel, buf: *mut u32, len: usize) -> BidfmStatus {
    guard(|| {
        non_null(model, "model")?;
        copy_out(&labels_out((*model).params.col()), buf, len)
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bidfm_model_free(model: *mut BidfmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Clusters rows into `k_r` and columns into `k_c` groups. `algorithm` is a
/// [`BidfmAlgorithm`] value.
///
/// # Safety
/// `a` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bidfm_detect(
    a: *const BidfmMatrix,
    algorithm: u32,
    k_r: usize,
    k_c: usize,
    seed: u64,
    out: *mut *mut BidfmDetection,
) -> BidfmStatus {
    guard(|| {
        non_null(a, "matrix")?;
        non_null(out, "out")?;
        let alg = *Algorithm::ALL
            .get(algorithm as usize)
            .ok_or_else(|| fail(BidfmStatus::Invalid, format!("unknown algorithm {algorithm}")))?;
        let result = detect(alg, &(*a).0, k_r, k_c, &DetectOptions::with_seed(seed)).status()?;
        store(out, BidfmDetection(result));
        Ok(())
    })
}

/// # Safety
/// `d` must be a live detection handle or null.
#[no_mangle]
pub unsafe extern "C" fn bidfm_detection_rows(d: *const BidfmDetection) -> usize {
    d.as_ref().map_or(0, |d| d.0.row_labels.len())
}

/// # Safety
/// `d` must be a live detection handle or null.
#[no_mangle]
pub unsafe extern "C" fn bidfm_detection_cols(d: *const BidfmDetection) -> usize {
    d.as_ref().map_or(0, |d| d.0.col_labels.len())
}

/// # Safety
/// `d` must be a live detection handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn bidfm_detection_row_labels(d: *const BidfmDetection, buf: *mut u32, len: usize) -> BidfmStatus {
    guard(|| {
        non_null(d, "detection")?;
        copy_out(&labels_out(&(*d).0.row_labels), buf, len)
    })
}

/// # Safety
/// `d` must be a live detection handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn bidfm_detection_col_labels(d: *const BidfmDetection, buf: *mut u32, len: usize) -> BidfmStatus {
    guard(|| {
        non_null(d, "detection")?;
        copy_out(&labels_out(&(*d).0.col_labels), buf, len)
    })
}

/// # Safety
/// `d` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bidfm_detection_free(d: *mut BidfmDetection) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Error rate, NMI and ARI of `estimated` against `truth`, both 1-based of length `n`.
///
/// # Safety
/// Both label arrays must hold `n` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bidfm_metrics(
    estimated: *const u32,
    truth: *const u32,
    n: usize,
    out: *mut BidfmMetrics,
) -> BidfmStatus {
    guard(|| {
        non_null(out, "out")?;
        let est = labels_in(estimated, n, "estimated")?;
        let tru = labels_in(truth, n, "truth")?;
        *out = BidfmMetrics {
            error_rate: hamming_error(&est, &tru).status()?,
            nmi: nmi(&est, &tru).status()?,
            ari: ari(&est, &tru).status()?,
        };
        Ok(())
    })
}
