//! Exercises the C ABI from Rust: handle lifecycle, error codes, and the
//! metric getters against a small deterministic run.

use std::ffi::{CStr, CString};
use std::ptr;

use laastream_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let ptr = ls_last_error_message();
    assert!(!ptr.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(ptr) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn scenario_lifecycle_and_run() {
    unsafe {
        let scenario = ls_scenario_new_default();
        assert!(!scenario.is_null());
        for (key, value) in [
            ("num_ues", "2"),
            ("num_qsis", "3"),
            ("channel.m_l", "4"),
            ("channel.m_u", "4"),
            ("seed", "7"),
        ] {
            assert_eq!(
                ls_scenario_set(scenario, c(key).as_ptr(), c(value).as_ptr()),
                LsStatus::Ok
            );
        }

        let mut metrics: *mut LsMetrics = ptr::null_mut();
        assert_eq!(ls_run_scenario(scenario, &mut metrics), LsStatus::Ok);
        assert!(!metrics.is_null());

        assert_eq!(ls_metrics_row_count(metrics), 2 * 3);
        let mut rate = 0.0;
        assert_eq!(ls_metrics_mean_rate_bps(metrics, &mut rate), LsStatus::Ok);
        assert!(rate > 0.0);
        let mut iters = 0.0;
        assert_eq!(
            ls_metrics_mean_admm_iterations(metrics, &mut iters),
            LsStatus::Ok
        );
        assert!(iters >= 1.0);

        let mut row = LsQsiRow {
            ue: 0,
            qsi: 0,
            selected_quality_bps: 0.0,
            delivered_on_time: 0,
            freeze_occurred: 0,
            freeze_duration_s: 0.0,
            avg_rate_bps: 0.0,
        };
        assert_eq!(ls_metrics_row(metrics, 0, &mut row), LsStatus::Ok);
        assert_eq!(row.qsi, 1);
        assert!(row.selected_quality_bps >= 1.0e6);
        assert_eq!(ls_metrics_row(metrics, 99, &mut row), LsStatus::OutOfRange);

        let n = ls_metrics_quality_cdf_len(metrics);
        assert_eq!(n, 6);
        let (mut level, mut cdf) = (0.0, 0.0);
        assert_eq!(
            ls_metrics_quality_cdf_point(metrics, n - 1, &mut level, &mut cdf),
            LsStatus::Ok
        );
        assert_eq!(level, 35.0e6);
        assert_eq!(cdf, 1.0);

        ls_metrics_free(metrics);
        ls_scenario_free(scenario);
    }
}

#[test]
fn runs_are_deterministic_across_handles() {
    unsafe {
        let run_once = || {
            let scenario = ls_scenario_new_default();
            for (key, value) in [
                ("num_ues", "2"),
                ("num_qsis", "2"),
                ("channel.m_l", "4"),
                ("channel.m_u", "4"),
            ] {
                assert_eq!(
                    ls_scenario_set(scenario, c(key).as_ptr(), c(value).as_ptr()),
                    LsStatus::Ok
                );
            }
            let mut metrics: *mut LsMetrics = ptr::null_mut();
            assert_eq!(ls_run_scenario(scenario, &mut metrics), LsStatus::Ok);
            let mut rate = 0.0;
            assert_eq!(ls_metrics_mean_rate_bps(metrics, &mut rate), LsStatus::Ok);
            ls_metrics_free(metrics);
            ls_scenario_free(scenario);
            rate
        };
        assert_eq!(run_once(), run_once());
    }
}

#[test]
fn error_paths_report_codes_and_messages() {
    unsafe {
        // Null handles.
        assert_eq!(
            ls_scenario_set(ptr::null_mut(), c("num_ues").as_ptr(), c("1").as_ptr()),
            LsStatus::NullPointer
        );
        let mut out: *mut LsMetrics = ptr::null_mut();
        assert_eq!(
            ls_run_scenario(ptr::null(), &mut out),
            LsStatus::NullPointer
        );

        // Unknown key and invalid values surface as config errors with text.
        let scenario = ls_scenario_new_default();
        assert_eq!(
            ls_scenario_set(scenario, c("nonsense.key").as_ptr(), c("1").as_ptr()),
            LsStatus::InvalidConfig
        );
        assert!(last_error().contains("nonsense.key"));
        assert_eq!(
            ls_scenario_set(scenario, c("occupancy.mu").as_ptr(), c("weasel").as_ptr()),
            LsStatus::InvalidConfig
        );

        // Range violations are caught when the run starts.
        assert_eq!(
            ls_scenario_set(scenario, c("num_ues").as_ptr(), c("0").as_ptr()),
            LsStatus::Ok
        );
        let mut metrics: *mut LsMetrics = ptr::null_mut();
        assert_eq!(
            ls_run_scenario(scenario, &mut metrics),
            LsStatus::InvalidConfig
        );
        assert!(last_error().contains("num_ues"));
        ls_scenario_free(scenario);

        // Text parsing.
        let mut parsed: *mut LsScenario = ptr::null_mut();
        assert_eq!(
            ls_scenario_from_string(c("num_ues = 3\n").as_ptr(), &mut parsed),
            LsStatus::Ok
        );
        ls_scenario_free(parsed);
        assert_eq!(
            ls_scenario_from_string(c("what even is this").as_ptr(), &mut parsed),
            LsStatus::ParseError
        );
        assert_eq!(
            ls_scenario_from_file(c("/definitely/missing.cfg").as_ptr(), &mut parsed),
            LsStatus::ParseError
        );
    }
}

#[test]
fn wifi_helpers_match_published_values() {
    unsafe {
        let mut p_off = 0.0;
        assert_eq!(ls_dcf_p_off(1, 16, 6, 19.0, &mut p_off), LsStatus::Ok);
        assert!((p_off - 7.5 / 26.5).abs() < 1e-9);
        assert_eq!(
            ls_dcf_p_off(0, 16, 6, 19.0, &mut p_off),
            LsStatus::InvalidConfig
        );

        let mut slots = 0u32;
        assert_eq!(
            ls_packet_duration_slots(1500.0, 7.2e6, 9e-6, &mut slots),
            LsStatus::Ok
        );
        assert_eq!(slots, 186);

        let version = ls_version();
        assert!(!version.is_null());
    }
}
