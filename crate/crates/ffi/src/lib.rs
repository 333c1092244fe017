//! C ABI over the core library: opaque handles for filter systems and
//! measure tables, status codes for every fallible call, and UTF-8 strings
//! that the caller must release with [`cm_string_free`].
//!
//! The header `include/cuntz_measures.h` is regenerated by the build script;
//! link against the produced `cdylib` or `staticlib`.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use cuntz_measures::cuntz::Word;
use cuntz_measures::filterbank;
use cuntz_measures::measures::{self, Engine};
use cuntz_measures::{Error, FilterSystem, LaurentPoly, MeasureTable};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ValidationFailed = 4,
    CapExceeded = 5,
    Utf8Error = 6,
}

/// Which measure engine to run.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CmEngine {
    Operator = 0,
    Spectral = 1,
}

/// Opaque filter-system handle.
pub struct CmFilterSystem(FilterSystem);

/// Opaque measure-table handle.
pub struct CmMeasureTable(MeasureTable);

/// Validation outcome in plain-old-data form.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CmValidationReport {
    pub max_isometry_defect: f64,
    pub max_completeness_defect: f64,
    pub passed: bool,
}

fn status_of(err: &Error) -> CmStatus {
    match err {
        Error::Json(_) => CmStatus::ParseError,
        Error::LevelCapExceeded { .. } | Error::IntervalLevelCap(_) => CmStatus::CapExceeded,
        _ => CmStatus::InvalidArgument,
    }
}

fn boxed(fs: FilterSystem) -> *mut CmFilterSystem {
    Box::into_raw(Box::new(CmFilterSystem(fs)))
}

unsafe fn filter_ref<'a>(fs: *const CmFilterSystem) -> Option<&'a FilterSystem> {
    unsafe { fs.as_ref().map(|f| &f.0) }
}

fn export_string(s: String, out: *mut *mut c_char) -> CmStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            CmStatus::Ok
        }
        Err(_) => CmStatus::Utf8Error,
    }
}

/// Version of the underlying library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must have been returned by a `cm_*` call and not freed already.
#[no_mangle]
pub unsafe extern "C" fn cm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// The dyadic Haar system.
#[no_mangle]
pub extern "C" fn cm_filter_haar() -> *mut CmFilterSystem {
    boxed(filterbank::haar())
}

/// The 3-band Cantor-measure system.
#[no_mangle]
pub extern "C" fn cm_filter_cantor3() -> *mut CmFilterSystem {
    boxed(filterbank::cantor3())
}

/// The 4-tap orthogonal low-pass system with two vanishing moments.
#[no_mangle]
pub extern "C" fn cm_filter_daubechies4() -> *mut CmFilterSystem {
    boxed(filterbank::daubechies4())
}

/// The permutative shift system with `n` subbands; NULL when `n < 2`.
#[no_mangle]
pub extern "C" fn cm_filter_permutative(n: usize) -> *mut CmFilterSystem {
    match filterbank::permutative_shift(n) {
        Ok(fs) => boxed(fs),
        Err(_) => ptr::null_mut(),
    }
}

/// Parses the filter-spec JSON `{"N": n, "filters": [[[deg,re,im],...],...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_filter_from_json(
    json: *const c_char,
    out: *mut *mut CmFilterSystem,
) -> CmStatus {
    if json.is_null() || out.is_null() {
        return CmStatus::NullArgument;
    }
    let text = match unsafe { CStr::from_ptr(json) }.to_str() {
        Ok(t) => t,
        Err(_) => return CmStatus::Utf8Error,
    };
    match serde_json::from_str::<FilterSystem>(text) {
        Ok(fs) => {
            unsafe { *out = boxed(fs) };
            CmStatus::Ok
        }
        Err(_) => CmStatus::ParseError,
    }
}

/// Serializes a filter system to the filter-spec JSON.
///
/// # Safety
/// `fs` must be a live handle; `out` receives a string owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn cm_filter_to_json(
    fs: *const CmFilterSystem,
    out: *mut *mut c_char,
) -> CmStatus {
    let Some(fs) = (unsafe { filter_ref(fs) }) else {
        return CmStatus::NullArgument;
    };
    if out.is_null() {
        return CmStatus::NullArgument;
    }
    match serde_json::to_string(fs) {
        Ok(json) => export_string(json, out),
        Err(_) => CmStatus::ParseError,
    }
}

/// Number of subbands, or 0 for a NULL handle.
///
/// # Safety
/// `fs` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_filter_bands(fs: *const CmFilterSystem) -> usize {
    unsafe { filter_ref(fs) }.map_or(0, |f| f.n())
}

/// Runs the unitarity validation; fills `report` and returns
/// `ValidationFailed` when the defects exceed `tol`.
///
/// # Safety
/// `fs` must be a live handle and `report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_filter_validate(
    fs: *const CmFilterSystem,
    tol: f64,
    report: *mut CmValidationReport,
) -> CmStatus {
    let Some(fs) = (unsafe { filter_ref(fs) }) else {
        return CmStatus::NullArgument;
    };
    if report.is_null() {
        return CmStatus::NullArgument;
    }
    match fs.validate(tol) {
        Ok(r) => {
            unsafe {
                *report = CmValidationReport {
                    max_isometry_defect: r.max_isometry_defect,
                    max_completeness_defect: r.max_completeness_defect,
                    passed: r.passed,
                };
            }
            if r.passed {
                CmStatus::Ok
            } else {
                CmStatus::ValidationFailed
            }
        }
        Err(e) => status_of(&e),
    }
}

/// Releases a filter-system handle. NULL is ignored.
///
/// # Safety
/// `fs` must have been returned by a `cm_filter_*` constructor and not freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn cm_filter_free(fs: *mut CmFilterSystem) {
    if !fs.is_null() {
        drop(unsafe { Box::from_raw(fs) });
    }
}

/// Tabulates the measure induced by the Fourier basis vector `e_p` on all
/// level-`level` cells with the chosen engine.
///
/// # Safety
/// `fs` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_measure_table_basis(
    fs: *const CmFilterSystem,
    p: i64,
    level: u32,
    engine: CmEngine,
    out: *mut *mut CmMeasureTable,
) -> CmStatus {
    let Some(fs) = (unsafe { filter_ref(fs) }) else {
        return CmStatus::NullArgument;
    };
    if out.is_null() {
        return CmStatus::NullArgument;
    }
    let engine = match engine {
        CmEngine::Operator => Engine::Operator,
        CmEngine::Spectral => Engine::Spectral,
    };
    match measures::measure_table(fs, &LaurentPoly::basis(p), level, engine) {
        Ok(table) => {
            unsafe { *out = Box::into_raw(Box::new(CmMeasureTable(table))) };
            CmStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Number of cells (`N^level`), or 0 for a NULL handle.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_measure_table_len(table: *const CmMeasureTable) -> usize {
    unsafe { table.as_ref() }.map_or(0, |t| t.0.values().len())
}

/// Copies all cell values (interval order) into `buf`, which must hold
/// exactly `cm_measure_table_len` entries.
///
/// # Safety
/// `table` must be a live handle; `buf` must point to `len` writable f64s.
#[no_mangle]
pub unsafe extern "C" fn cm_measure_table_copy_values(
    table: *const CmMeasureTable,
    buf: *mut f64,
    len: usize,
) -> CmStatus {
    let Some(table) = (unsafe { table.as_ref() }) else {
        return CmStatus::NullArgument;
    };
    if buf.is_null() {
        return CmStatus::NullArgument;
    }
    let values = table.0.values();
    if values.len() != len {
        return CmStatus::InvalidArgument;
    }
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), buf, len) };
    CmStatus::Ok
}

/// Total mass of the table.
///
/// # Safety
/// `table` must be NULL (returns NaN) or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_measure_table_total(table: *const CmMeasureTable) -> f64 {
    unsafe { table.as_ref() }.map_or(f64::NAN, |t| t.0.total())
}

/// Renders the table as CSV (`digits,left,value` rows).
///
/// # Safety
/// `table` must be a live handle; `out` receives a string owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn cm_measure_table_to_csv(
    table: *const CmMeasureTable,
    out: *mut *mut c_char,
) -> CmStatus {
    let Some(table) = (unsafe { table.as_ref() }) else {
        return CmStatus::NullArgument;
    };
    if out.is_null() {
        return CmStatus::NullArgument;
    }
    let mut buf = Vec::new();
    if table.0.write_csv(&mut buf).is_err() {
        return CmStatus::InvalidArgument;
    }
    match String::from_utf8(buf) {
        Ok(text) => export_string(text, out),
        Err(_) => CmStatus::Utf8Error,
    }
}

/// Releases a measure-table handle. NULL is ignored.
///
/// # Safety
/// `table` must have been returned by `cm_measure_table_basis` and not freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn cm_measure_table_free(table: *mut CmMeasureTable) {
    if !table.is_null() {
        drop(unsafe { Box::from_raw(table) });
    }
}

/// One measure value `mu_{e_p}(J_k(a))` for the digit word `a` given as a
/// byte array, computed by the spectral (basis) engine.
///
/// # Safety
/// `fs` must be a live handle; `digits` must point to `len` readable bytes;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_mu_basis(
    fs: *const CmFilterSystem,
    p: i64,
    digits: *const u8,
    len: usize,
    out: *mut f64,
) -> CmStatus {
    let Some(fs) = (unsafe { filter_ref(fs) }) else {
        return CmStatus::NullArgument;
    };
    if out.is_null() || (digits.is_null() && len > 0) {
        return CmStatus::NullArgument;
    }
    let slice = if len == 0 {
        &[][..]
    } else {
        unsafe { std::slice::from_raw_parts(digits, len) }
    };
    let word = match Word::new(fs.n(), slice.to_vec()) {
        Ok(w) => w,
        Err(e) => return status_of(&e),
    };
    match measures::mu_basis(fs, p, &word) {
        Ok(v) => {
            unsafe { *out = v };
            CmStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
