// SPDX-License-Identifier: MIT OR Apache-2.0

//! C ABI over `energy-cpd`.
//!
//! Conventions:
//!
//! * Every fallible function returns an [`EcpStatus`]; on failure a message
//!   is available from [`ecp_last_error`] on the same thread.
//! * Objects are opaque handles created by `ecp_*_new` / the detection calls
//!   and released with the matching `ecp_*_free`. Free functions accept NULL.
//! * Observations are passed row-major: `len * dim` doubles.
//! * Change points are 1-based and name the last observation of the cluster
//!   to their left.
//! * Array accessors copy at most `capacity` elements into `out` and return
//!   the full element count, so a first call with `capacity == 0` sizes the
//!   buffer.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use energy_cpd::agglo::{e_agglo, InitialClustering, MergeTrace};
use energy_cpd::divisive::{
    e_divisive, DivisiveConfig, DivisiveResult, DEFAULT_MIN_SIZE, DEFAULT_PERMUTATIONS, DEFAULT_SIGNIFICANCE,
};
use energy_cpd::energy::{empirical_divergence, Alpha, TimeSeries};
use energy_cpd::eval::{adjusted_rand, rand_index, Partition};
use energy_cpd::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcpStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument was outside its domain.
    InvalidArgument = 2,
    /// A sample had fewer than two observations.
    InsufficientSample = 3,
    /// The library panicked; the handle arguments are left untouched.
    Internal = 4,
}

/// Opaque multivariate time series.
pub struct EcpSeries(TimeSeries);

/// Opaque outcome of a divisive run.
pub struct EcpDivisiveResult(DivisiveResult);

/// Opaque outcome of an agglomerative run.
pub struct EcpMergeTrace(MergeTrace);

/// Parameters of the divisive procedure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcpDivisiveConfig {
    /// Distance exponent in (0, 2).
    pub alpha: f64,
    /// Smallest admissible cluster size (>= 2).
    pub min_size: usize,
    /// Permutation replicates per significance test.
    pub permutations: usize,
    /// A split is accepted when its p-value is below this level.
    pub significance: f64,
    /// Upper bound on the number of change points; 0 means unbounded.
    pub max_change_points: usize,
    pub seed: u64,
}

/// One tested split of a divisive run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcpStep {
    pub order: usize,
    /// 1-based index of the cluster that was split.
    pub cluster: usize,
    pub tau: usize,
    pub kappa: usize,
    pub qhat: f64,
    pub exceedances: usize,
    pub pvalue: f64,
    pub significant: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> EcpStatus {
    match err {
        Error::InsufficientSample { .. } => EcpStatus::InsufficientSample,
        _ => EcpStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EcpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EcpStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} must not be NULL"));
            EcpStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("internal error: {msg}"));
            EcpStatus::Internal
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass pointers obtained from this library or to valid
    // caller-owned values, as documented on each entry point.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

/// Borrows `len` elements; a zero-length array may be NULL.
fn array<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: the caller guarantees `p` points to `len` initialized values.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and, per the contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

/// Copies up to `capacity` items into `out`; returns the total count.
fn copy_into<T: Copy>(src: &[T], out: *mut T, capacity: usize) -> usize {
    if !out.is_null() {
        let n = src.len().min(capacity);
        // SAFETY: `out` has room for `capacity >= n` elements.
        unsafe { ptr::copy_nonoverlapping(src.as_ptr(), out, n) };
    }
    src.len()
}

fn rows(data: &[f64], dim: usize) -> Vec<&[f64]> {
    data.chunks_exact(dim).collect()
}

fn partition(boundaries: *const usize, count: usize, len: usize) -> Result<Partition, Failure> {
    Ok(Partition::new(array(boundaries, count, "change point array")?.to_vec(), len)?)
}

/// Message describing the last failure on the calling thread, or NULL if
/// none occurred. Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ecp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ecp_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Copies `len * dim` row-major observations into a new series handle.
///
/// # Safety
/// `data` must point to `len * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecp_series_new(
    data: *const f64,
    len: usize,
    dim: usize,
    out: *mut *mut EcpSeries,
) -> EcpStatus {
    guard(|| {
        let n = len
            .checked_mul(dim)
            .ok_or_else(|| Error::InvalidInput("len * dim overflows".into()))?;
        let values = array(data, n, "data")?.to_vec();
        let series = TimeSeries::new(values, len, dim)?;
        write_out(out, Box::into_raw(Box::new(EcpSeries(series))), "out")
    })
}

/// # Safety
/// `series` must be NULL or a handle from [`ecp_series_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ecp_series_free(series: *mut EcpSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// `series` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ecp_series_len(series: *const EcpSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `series` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ecp_series_dim(series: *const EcpSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.dim())
}

/// Library defaults: α = 1, min_size 30, 499 permutations, level 0.05.
#[no_mangle]
pub extern "C" fn ecp_divisive_config_default() -> EcpDivisiveConfig {
    EcpDivisiveConfig {
        alpha: 1.0,
        min_size: DEFAULT_MIN_SIZE,
        permutations: DEFAULT_PERMUTATIONS,
        significance: DEFAULT_SIGNIFICANCE,
        max_change_points: 0,
        seed: 0,
    }
}

impl EcpDivisiveConfig {
    fn to_config(self) -> Result<DivisiveConfig, Error> {
        let cfg = DivisiveConfig {
            alpha: Alpha::new(self.alpha)?,
            min_size: self.min_size,
            permutations: self.permutations,
            significance: self.significance,
            max_change_points: (self.max_change_points > 0).then_some(self.max_change_points),
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs E-Divisive. `config` may be NULL for the defaults.
///
/// # Safety
/// `series` must be a live handle; `config` NULL or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecp_e_divisive(
    series: *const EcpSeries,
    config: *const EcpDivisiveConfig,
    out: *mut *mut EcpDivisiveResult,
) -> EcpStatus {
    guard(|| {
        let series = non_null(series, "series")?;
        let cfg = config.as_ref().copied().unwrap_or_else(|| ecp_divisive_config_default()).to_config()?;
        let result = e_divisive(&series.0, &cfg)?;
        write_out(out, Box::into_raw(Box::new(EcpDivisiveResult(result))), "out")
    })
}

/// # Safety
/// `result` must be NULL or a handle from [`ecp_e_divisive`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ecp_divisive_result_free(result: *mut EcpDivisiveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Accepted change points in increasing order.
///
/// # Safety
/// `result` must be a live handle; `out` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn ecp_divisive_change_points(
    result: *const EcpDivisiveResult,
    out: *mut usize,
    capacity: usize,
) -> usize {
    result
        .as_ref()
        .map_or(0, |r| copy_into(r.0.change_points(), out, capacity))
}

/// Number of tested splits, including a final rejected one.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ecp_divisive_num_steps(result: *const EcpDivisiveResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.estimates.len())
}

/// The `index`-th (0-based) tested split.
///
/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecp_divisive_step(
    result: *const EcpDivisiveResult,
    index: usize,
    out: *mut EcpStep,
) -> EcpStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        let s = r.0.estimates.get(index).ok_or_else(|| {
            Error::InvalidInput(format!("step {index} out of range ({} steps)", r.0.estimates.len()))
        })?;
        let step = EcpStep {
            order: s.order,
            cluster: s.cluster,
            tau: s.tau_hat,
            kappa: s.kappa_hat,
            qhat: s.qhat,
            exceedances: s.exceedances,
            pvalue: s.pvalue,
            significant: s.significant,
        };
        write_out(out, step, "out")
    })
}

/// Runs E-Agglomerative from the initial clustering given by its
/// boundaries (at least two clusters, each of size >= 2).
///
/// # Safety
/// `series` must be a live handle; `boundaries` must hold `count` elements;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecp_e_agglo(
    series: *const EcpSeries,
    boundaries: *const usize,
    count: usize,
    alpha: f64,
    out: *mut *mut EcpMergeTrace,
) -> EcpStatus {
    guard(|| {
        let series = non_null(series, "series")?;
        let init = InitialClustering::new(partition(boundaries, count, series.0.len())?)?;
        let trace = e_agglo(&series.0, &init, Alpha::new(alpha)?)?;
        write_out(out, Box::into_raw(Box::new(EcpMergeTrace(trace))), "out")
    })
}

/// Agglomerative run from equal-width initial clusters.
///
/// # Safety
/// `series` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecp_e_agglo_equal_width(
    series: *const EcpSeries,
    width: usize,
    alpha: f64,
    out: *mut *mut EcpMergeTrace,
) -> EcpStatus {
    guard(|| {
        let series = non_null(series, "series")?;
        let init = InitialClustering::equal_width(series.0.len(), width)?;
        let trace = e_agglo(&series.0, &init, Alpha::new(alpha)?)?;
        write_out(out, Box::into_raw(Box::new(EcpMergeTrace(trace))), "out")
    })
}

/// # Safety
/// `trace` must be NULL or a handle from an agglomerative run not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ecp_merge_trace_free(trace: *mut EcpMergeTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Goodness of fit after each merge; entry `i` belongs to `n - i` clusters,
/// where `n` is the initial cluster count.
///
/// # Safety
/// `trace` must be a live handle; `out` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn ecp_merge_trace_gof(trace: *const EcpMergeTrace, out: *mut f64, capacity: usize) -> usize {
    trace.as_ref().map_or(0, |t| copy_into(&t.0.gof, out, capacity))
}

/// Number of clusters of the best-fitting partition.
///
/// # Safety
/// `trace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ecp_merge_trace_best_k(trace: *const EcpMergeTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.best_k)
}

/// Change points of the best-fitting partition.
///
/// # Safety
/// `trace` must be a live handle; `out` must hold `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn ecp_merge_trace_change_points(
    trace: *const EcpMergeTrace,
    out: *mut usize,
    capacity: usize,
) -> usize {
    trace
        .as_ref()
        .map_or(0, |t| copy_into(t.0.best_partition.boundaries(), out, capacity))
}

/// Ê between samples `x` (`n` rows) and `y` (`m` rows) of dimension `dim`.
///
/// # Safety
/// `x` and `y` must hold `n * dim` and `m * dim` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecp_empirical_divergence(
    x: *const f64,
    n: usize,
    y: *const f64,
    m: usize,
    dim: usize,
    alpha: f64,
    out: *mut f64,
) -> EcpStatus {
    guard(|| {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()).into());
        }
        let overflow = || Error::InvalidInput("sample size * dim overflows".into());
        let xs = array(x, n.checked_mul(dim).ok_or_else(overflow)?, "x")?;
        let ys = array(y, m.checked_mul(dim).ok_or_else(overflow)?, "y")?;
        let e = empirical_divergence(&rows(xs, dim), &rows(ys, dim), Alpha::new(alpha)?)?;
        write_out(out, e, "out")
    })
}

/// Rand index between two segmentations of a series of length `len`.
///
/// # Safety
/// `truth` and `estimate` must hold the given counts; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecp_rand_index(
    truth: *const usize,
    truth_count: usize,
    estimate: *const usize,
    estimate_count: usize,
    len: usize,
    out: *mut f64,
) -> EcpStatus {
    guard(|| {
        let u = partition(truth, truth_count, len)?;
        let v = partition(estimate, estimate_count, len)?;
        write_out(out, rand_index(&u, &v)?, "out")
    })
}

/// Adjusted Rand index between two segmentations of a series of length
/// `len`.
///
/// # Safety
/// `truth` and `estimate` must hold the given counts; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ecp_adjusted_rand(
    truth: *const usize,
    truth_count: usize,
    estimate: *const usize,
    estimate_count: usize,
    len: usize,
    out: *mut f64,
) -> EcpStatus {
    guard(|| {
        let u = partition(truth, truth_count, len)?;
        let v = partition(estimate, estimate_count, len)?;
        write_out(out, adjusted_rand(&u, &v)?, "out")
    })
}
