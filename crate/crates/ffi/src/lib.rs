//! C ABI over the screening library.
//!
//! Datasets and reports are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns an [`RsStatus`];
//! on failure [`rs_last_error_message`] describes the error on the calling
//! thread. Panics are caught at the boundary and reported as `RS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robscreen::{screen, Dataset, Method, ScreenError, ScreenOptions, ScreeningReport, ThresholdMode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    SingularDesign = 3,
    OutOfSupport = 4,
    Degenerate = 5,
    Internal = 6,
    Panic = 7,
}

/// Screening methods accepted by [`rs_screen`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsMethod {
    Rc = 0,
    RpcL2 = 1,
    RpcL1 = 2,
    Pearson = 3,
    Kendall = 4,
}

fn method_from_code(code: u32) -> Option<Method> {
    Some(match code {
        0 => Method::Rc,
        1 => Method::RpcL2,
        2 => Method::RpcL1,
        3 => Method::Pearson,
        4 => Method::Kendall,
        _ => return None,
    })
}

/// Opaque dataset handle.
pub struct RsDataset(Dataset);

/// Opaque screening report handle.
pub struct RsReport(ScreeningReport);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsBootstrapResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    /// 1 when the independence hypothesis is rejected.
    pub reject: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &ScreenError) -> RsStatus {
    match e {
        ScreenError::InvalidInput(_) | ScreenError::Data(_) => RsStatus::InvalidInput,
        ScreenError::SingularDesign { .. } => RsStatus::SingularDesign,
        ScreenError::OutOfSupport { .. } => RsStatus::OutOfSupport,
        ScreenError::DegenerateEvaluation(_) => RsStatus::Degenerate,
        _ => RsStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Screen(ScreenError),
}

impl From<ScreenError> for Failure {
    fn from(e: ScreenError) -> Self {
        Failure::Screen(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            RsStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            RsStatus::NullPointer
        }
        Ok(Err(Failure::Screen(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(&format!("panic: {msg}"));
            RsStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        if len == 0 {
            return Ok(&[]);
        }
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `n` responses, an `n x p` column-major covariate block and an
/// optional exposure (`z` may be null) into a new dataset handle.
///
/// # Safety
/// `y` and `z` (if non-null) must point to `n` values, `x` to `n * p` values
/// and `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_new(
    y: *const f64,
    x: *const f64,
    n: usize,
    p: usize,
    z: *const f64,
    out: *mut *mut RsDataset,
) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let total = n.checked_mul(p).ok_or_else(|| ScreenError::InvalidInput("n * p overflows".into()))?;
        let y = slice(y, n, "y")?.to_vec();
        let x = slice(x, total, "x")?;
        let covariates = if n == 0 { vec![Vec::new(); p] } else { x.chunks(n).map(<[f64]>::to_vec).collect() };
        let exposure = if z.is_null() { None } else { Some(slice(z, n, "z")?.to_vec()) };
        let ds = Dataset::new(y, covariates, exposure)?;
        ds.validate()?;
        *out = Box::into_raw(Box::new(RsDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle from [`rs_dataset_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_free(ds: *mut RsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Screens the dataset with `method` (an [`RsMethod`] value), keeping the
/// top `top_d` covariates; `top_d = 0` selects the default `floor(n / ln n)`.
///
/// # Safety
/// `ds` must be a live dataset handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_screen(ds: *const RsDataset, method: u32, top_d: usize, out: *mut *mut RsReport) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let ds = &ds.as_ref().ok_or(Failure::Null("dataset"))?.0;
        let method =
            method_from_code(method).ok_or_else(|| ScreenError::InvalidInput(format!("unknown method code {method}")))?;
        let mode = if top_d == 0 { ThresholdMode::default_for(ds.n()) } else { ThresholdMode::TopD(top_d) };
        let report = screen(method, ds, mode, &ScreenOptions::default())?;
        *out = Box::into_raw(Box::new(RsReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`rs_screen`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_report_free(report: *mut RsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of covariates in the report; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn rs_report_p(report: *const RsReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.p)
}

/// Number of selected covariates; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn rs_report_selected_len(report: *const RsReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.selected.len())
}

unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, len: usize) -> Result<(), Failure> {
    if dst.is_null() {
        return Err(Failure::Null("out"));
    }
    if len < src.len() {
        return Err(ScreenError::InvalidInput(format!("buffer holds {len} values, {} needed", src.len())).into());
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

/// Copies the `p` utilities (column order) into `out`, which holds `len` values.
///
/// # Safety
/// `report` must be a live report handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn rs_report_utilities(report: *const RsReport, out: *mut f64, len: usize) -> RsStatus {
    guard(|| copy_out(&report.as_ref().ok_or(Failure::Null("report"))?.0.utilities, out, len))
}

/// Copies the 0-based column indices by descending utility.
///
/// # Safety
/// `report` must be a live report handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn rs_report_ranking(report: *const RsReport, out: *mut usize, len: usize) -> RsStatus {
    guard(|| copy_out(&report.as_ref().ok_or(Failure::Null("report"))?.0.ranking, out, len))
}

/// Copies the 0-based selected column indices, in ranking order.
///
/// # Safety
/// `report` must be a live report handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn rs_report_selected(report: *const RsReport, out: *mut usize, len: usize) -> RsStatus {
    guard(|| copy_out(&report.as_ref().ok_or(Failure::Null("report"))?.0.selected, out, len))
}

/// Robust correlation utility of one covariate column.
///
/// # Safety
/// `y` and `x` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_rc_utility(y: *const f64, x: *const f64, n: usize, out: *mut f64) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = robscreen::rc_utility(slice(y, n, "y")?, slice(x, n, "x")?)?;
        Ok(())
    })
}

/// Wild bootstrap independence test with `replicates` resamples.
///
/// # Safety
/// `y` and `x` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_wild_bootstrap_test(
    y: *const f64,
    x: *const f64,
    n: usize,
    replicates: usize,
    alpha: f64,
    seed: u64,
    out: *mut RsBootstrapResult,
) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let r = robscreen::wild_bootstrap_test(slice(y, n, "y")?, slice(x, n, "x")?, replicates, alpha, seed)?;
        *out = RsBootstrapResult {
            statistic: r.statistic,
            critical_value: r.critical_value,
            p_value: r.p_value,
            reject: i32::from(r.reject),
        };
        Ok(())
    })
}
