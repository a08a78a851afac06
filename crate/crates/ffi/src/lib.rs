//! C ABI for the laastream simulator.
//!
//! Handles are opaque pointers owned by the caller and released through the
//! matching `_free` function. Every fallible call returns an [`LsStatus`]
//! and writes results through out-pointers; `ls_last_error_message` exposes
//! the detail of the most recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use laastream::config::{apply_override, parse_config, parse_config_str};
use laastream::engine::{run_scenario, ScenarioConfig};
use laastream::metrics::MetricsRecord;
use laastream::wifi::{packet_duration_slots, solve_dcf_fixed_point, WifiParams};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidConfig = 4,
    SolverError = 5,
    IoError = 6,
    OutOfRange = 7,
    InternalError = 8,
}

/// Opaque scenario handle.
pub struct LsScenario {
    config: ScenarioConfig,
}

/// Opaque run-result handle.
pub struct LsMetrics {
    record: MetricsRecord,
}

/// One (UE, QSI) observation row.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsQsiRow {
    pub ue: u32,
    pub qsi: u32,
    pub selected_quality_bps: f64,
    pub delivered_on_time: u8,
    pub freeze_occurred: u8,
    pub freeze_duration_s: f64,
    pub avg_rate_bps: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let owned = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &laastream::Error) -> LsStatus {
    use laastream::Error as E;
    match err {
        E::Domain(_) => LsStatus::InvalidConfig,
        E::Config { .. } => LsStatus::InvalidConfig,
        E::DcfNoConvergence { .. } | E::SolverNoConvergence { .. } | E::DegenerateInput(_) => {
            LsStatus::SolverError
        }
        E::AtQsi { source, .. } => status_of(source),
        E::Io(_) => LsStatus::IoError,
    }
}

fn fail(err: &laastream::Error) -> LsStatus {
    let status = status_of(err);
    set_error(err.to_string());
    status
}

unsafe fn cstr_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, LsStatus> {
    if ptr.is_null() {
        set_error(format!("{name} is null"));
        return Err(LsStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        LsStatus::InvalidUtf8
    })
}

/// Most recent error message on this thread, or null when the last call
/// succeeded. The pointer stays valid until the next failing call.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// New scenario with default parameters. Never fails.
#[no_mangle]
pub extern "C" fn ls_scenario_new_default() -> *mut LsScenario {
    clear_error();
    Box::into_raw(Box::new(LsScenario {
        config: ScenarioConfig::default(),
    }))
}

/// Parses a scenario file into a new handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to pointer storage.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_from_file(
    path: *const c_char,
    out: *mut *mut LsScenario,
) -> LsStatus {
    clear_error();
    if out.is_null() {
        set_error("out is null".into());
        return LsStatus::NullPointer;
    }
    let path = match unsafe { cstr_arg(path, "path") } {
        Ok(p) => p,
        Err(status) => return status,
    };
    match parse_config(Path::new(path)) {
        Ok(config) => {
            unsafe { *out = Box::into_raw(Box::new(LsScenario { config })) };
            LsStatus::Ok
        }
        Err(e) => {
            let status = fail(&e);
            if status == LsStatus::InvalidConfig {
                LsStatus::ParseError
            } else {
                status
            }
        }
    }
}

/// Parses scenario text into a new handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_from_string(
    text: *const c_char,
    out: *mut *mut LsScenario,
) -> LsStatus {
    clear_error();
    if out.is_null() {
        set_error("out is null".into());
        return LsStatus::NullPointer;
    }
    let text = match unsafe { cstr_arg(text, "text") } {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_config_str(text) {
        Ok(config) => {
            unsafe { *out = Box::into_raw(Box::new(LsScenario { config })) };
            LsStatus::Ok
        }
        Err(e) => {
            fail(&e);
            LsStatus::ParseError
        }
    }
}

/// Sets one configuration key (same keys as scenario files).
///
/// # Safety
/// `scenario` must be a live handle from this library; `key` and `value`
/// must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_set(
    scenario: *mut LsScenario,
    key: *const c_char,
    value: *const c_char,
) -> LsStatus {
    clear_error();
    let Some(scenario) = (unsafe { scenario.as_mut() }) else {
        set_error("scenario is null".into());
        return LsStatus::NullPointer;
    };
    let key = match unsafe { cstr_arg(key, "key") } {
        Ok(k) => k,
        Err(status) => return status,
    };
    let value = match unsafe { cstr_arg(value, "value") } {
        Ok(v) => v,
        Err(status) => return status,
    };
    match apply_override(&mut scenario.config, key, value) {
        Ok(()) => LsStatus::Ok,
        Err(e) => fail(&e),
    }
}

/// Releases a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario` must be a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_free(scenario: *mut LsScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Runs a scenario to completion and returns a metrics handle.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid pointer storage.
#[no_mangle]
pub unsafe extern "C" fn ls_run_scenario(
    scenario: *const LsScenario,
    out: *mut *mut LsMetrics,
) -> LsStatus {
    clear_error();
    if out.is_null() {
        set_error("out is null".into());
        return LsStatus::NullPointer;
    }
    let Some(scenario) = (unsafe { scenario.as_ref() }) else {
        set_error("scenario is null".into());
        return LsStatus::NullPointer;
    };
    let result = catch_unwind(AssertUnwindSafe(|| run_scenario(&scenario.config)));
    match result {
        Ok(Ok(record)) => {
            unsafe { *out = Box::into_raw(Box::new(LsMetrics { record })) };
            LsStatus::Ok
        }
        Ok(Err(e)) => fail(&e),
        Err(_) => {
            set_error("internal panic during run".into());
            LsStatus::InternalError
        }
    }
}

/// Releases a metrics handle. Null is ignored.
///
/// # Safety
/// `metrics` must be a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_free(metrics: *mut LsMetrics) {
    if !metrics.is_null() {
        drop(unsafe { Box::from_raw(metrics) });
    }
}

unsafe fn read_metric(
    metrics: *const LsMetrics,
    out: *mut f64,
    read: impl Fn(&MetricsRecord) -> f64,
) -> LsStatus {
    clear_error();
    let Some(metrics) = (unsafe { metrics.as_ref() }) else {
        set_error("metrics is null".into());
        return LsStatus::NullPointer;
    };
    if out.is_null() {
        set_error("out is null".into());
        return LsStatus::NullPointer;
    }
    unsafe { *out = read(&metrics.record) };
    LsStatus::Ok
}

/// Grand mean of per-(UE, QSI) average rates, bits/s.
///
/// # Safety
/// `metrics` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_mean_rate_bps(
    metrics: *const LsMetrics,
    out: *mut f64,
) -> LsStatus {
    unsafe { read_metric(metrics, out, |r| r.mean_rate_bps) }
}

/// Grand mean of selected encoding rates, bits/s.
///
/// # Safety
/// `metrics` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_mean_quality_bps(
    metrics: *const LsMetrics,
    out: *mut f64,
) -> LsStatus {
    unsafe { read_metric(metrics, out, |r| r.mean_quality_bps) }
}

/// Freeze events over freeze opportunities.
///
/// # Safety
/// `metrics` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_freeze_probability(
    metrics: *const LsMetrics,
    out: *mut f64,
) -> LsStatus {
    unsafe { read_metric(metrics, out, |r| r.freeze_probability) }
}

/// Mean freeze duration in seconds (zero when no freeze occurred).
///
/// # Safety
/// `metrics` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_mean_freeze_duration_s(
    metrics: *const LsMetrics,
    out: *mut f64,
) -> LsStatus {
    unsafe { read_metric(metrics, out, |r| r.mean_freeze_duration_s) }
}

/// Total bits offered on the unlicensed carrier.
///
/// # Safety
/// `metrics` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_unlicensed_bits_total(
    metrics: *const LsMetrics,
    out: *mut f64,
) -> LsStatus {
    unsafe { read_metric(metrics, out, |r| r.unlicensed_bits_total) }
}

/// Mean solver iterations per QSI. Fails with `OutOfRange` for policies
/// that do not run the solver.
///
/// # Safety
/// `metrics` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_mean_admm_iterations(
    metrics: *const LsMetrics,
    out: *mut f64,
) -> LsStatus {
    clear_error();
    let Some(metrics) = (unsafe { metrics.as_ref() }) else {
        set_error("metrics is null".into());
        return LsStatus::NullPointer;
    };
    if out.is_null() {
        set_error("out is null".into());
        return LsStatus::NullPointer;
    }
    match metrics.record.mean_admm_iterations {
        Some(v) => {
            unsafe { *out = v };
            LsStatus::Ok
        }
        None => {
            set_error("run used a policy without the allocation solver".into());
            LsStatus::OutOfRange
        }
    }
}

/// Number of (UE, QSI) rows in the record.
///
/// # Safety
/// `metrics` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_row_count(metrics: *const LsMetrics) -> usize {
    unsafe { metrics.as_ref() }.map_or(0, |m| m.record.rows.len())
}

/// Copies row `index` into `out`.
///
/// # Safety
/// `metrics` must be a live handle; `out` must point to an `LsQsiRow`.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_row(
    metrics: *const LsMetrics,
    index: usize,
    out: *mut LsQsiRow,
) -> LsStatus {
    clear_error();
    let Some(metrics) = (unsafe { metrics.as_ref() }) else {
        set_error("metrics is null".into());
        return LsStatus::NullPointer;
    };
    if out.is_null() {
        set_error("out is null".into());
        return LsStatus::NullPointer;
    }
    let Some(row) = metrics.record.rows.get(index) else {
        set_error(format!(
            "row {index} out of range ({} rows)",
            metrics.record.rows.len()
        ));
        return LsStatus::OutOfRange;
    };
    unsafe {
        *out = LsQsiRow {
            ue: row.ue as u32,
            qsi: row.qsi as u32,
            selected_quality_bps: row.selected_quality_bps,
            delivered_on_time: u8::from(row.delivered_on_time),
            freeze_occurred: u8::from(row.freeze_occurred),
            freeze_duration_s: row.freeze_duration_s,
            avg_rate_bps: row.avg_rate_bps,
        };
    }
    LsStatus::Ok
}

/// Number of quality-CDF points (one per ladder level).
///
/// # Safety
/// `metrics` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_quality_cdf_len(metrics: *const LsMetrics) -> usize {
    unsafe { metrics.as_ref() }.map_or(0, |m| m.record.quality_cdf.len())
}

/// Reads quality-CDF point `index` as (encoding rate bits/s, fraction).
///
/// # Safety
/// `metrics` must be a live handle; `out_level_bps` and `out_cdf` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn ls_metrics_quality_cdf_point(
    metrics: *const LsMetrics,
    index: usize,
    out_level_bps: *mut f64,
    out_cdf: *mut f64,
) -> LsStatus {
    clear_error();
    let Some(metrics) = (unsafe { metrics.as_ref() }) else {
        set_error("metrics is null".into());
        return LsStatus::NullPointer;
    };
    if out_level_bps.is_null() || out_cdf.is_null() {
        set_error("out is null".into());
        return LsStatus::NullPointer;
    }
    let Some(&(level, cdf)) = metrics.record.quality_cdf.get(index) else {
        set_error(format!("cdf point {index} out of range"));
        return LsStatus::OutOfRange;
    };
    unsafe {
        *out_level_bps = level;
        *out_cdf = cdf;
    }
    LsStatus::Ok
}

/// Analytic idle probability of the unlicensed band for a saturated DCF
/// contention setup.
///
/// # Safety
/// `out_p_off` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_dcf_p_off(
    stations: u32,
    min_window: u32,
    max_doublings: u32,
    mean_pkt_slots: f64,
    out_p_off: *mut f64,
) -> LsStatus {
    clear_error();
    if out_p_off.is_null() {
        set_error("out_p_off is null".into());
        return LsStatus::NullPointer;
    }
    let params = match WifiParams::new(stations, min_window, max_doublings, mean_pkt_slots) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    match solve_dcf_fixed_point(&params) {
        Ok(occupancy) => {
            unsafe { *out_p_off = occupancy.p_off };
            LsStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// WiFi packet transmission duration in whole slots.
///
/// # Safety
/// `out_slots` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_packet_duration_slots(
    pkt_bytes: f64,
    phy_rate_bps: f64,
    slot_seconds: f64,
    out_slots: *mut u32,
) -> LsStatus {
    clear_error();
    if out_slots.is_null() {
        set_error("out_slots is null".into());
        return LsStatus::NullPointer;
    }
    match packet_duration_slots(pkt_bytes, phy_rate_bps, slot_seconds) {
        Ok(slots) => {
            unsafe { *out_slots = slots };
            LsStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
