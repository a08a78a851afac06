#ifndef LAASTREAM_H
#define LAASTREAM_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_UTF8 = 2,
  LS_STATUS_PARSE_ERROR = 3,
  LS_STATUS_INVALID_CONFIG = 4,
  LS_STATUS_SOLVER_ERROR = 5,
  LS_STATUS_IO_ERROR = 6,
  LS_STATUS_OUT_OF_RANGE = 7,
  LS_STATUS_INTERNAL_ERROR = 8,
} LsStatus;

// Opaque run-result handle.
typedef struct LsMetrics LsMetrics;

// Opaque scenario handle.
typedef struct LsScenario LsScenario;

// One (UE, QSI) observation row.
typedef struct LsQsiRow {
  uint32_t ue;
  uint32_t qsi;
  double selected_quality_bps;
  uint8_t delivered_on_time;
  uint8_t freeze_occurred;
  double freeze_duration_s;
  double avg_rate_bps;
} LsQsiRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Most recent error message on this thread, or null when the last call
// succeeded. The pointer stays valid until the next failing call.
const char *ls_last_error_message(void);

// Library version as a static string.
const char *ls_version(void);

// New scenario with default parameters. Never fails.
struct LsScenario *ls_scenario_new_default(void);

// Parses a scenario file into a new handle.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must be a valid
// pointer to pointer storage.
enum LsStatus ls_scenario_from_file(const char *path, struct LsScenario **out);

// Parses scenario text into a new handle.
//
// # Safety
// `text` must be a valid NUL-terminated string; `out` must be valid.
enum LsStatus ls_scenario_from_string(const char *text, struct LsScenario **out);

// Sets one configuration key (same keys as scenario files).
//
// # Safety
// `scenario` must be a live handle from this library; `key` and `value`
// must be valid NUL-terminated strings.
enum LsStatus ls_scenario_set(struct LsScenario *scenario, const char *key, const char *value);

// Releases a scenario handle. Null is ignored.
//
// # Safety
// `scenario` must be a handle from this library that has not been freed.
void ls_scenario_free(struct LsScenario *scenario);

// Runs a scenario to completion and returns a metrics handle.
//
// # Safety
// `scenario` must be a live handle; `out` must be valid pointer storage.
enum LsStatus ls_run_scenario(const struct LsScenario *scenario, struct LsMetrics **out);

// Releases a metrics handle. Null is ignored.
//
// # Safety
// `metrics` must be a handle from this library that has not been freed.
void ls_metrics_free(struct LsMetrics *metrics);

// Grand mean of per-(UE, QSI) average rates, bits/s.
//
// # Safety
// `metrics` must be a live handle; `out` must be valid.
enum LsStatus ls_metrics_mean_rate_bps(const struct LsMetrics *metrics, double *out);

// Grand mean of selected encoding rates, bits/s.
//
// # Safety
// `metrics` must be a live handle; `out` must be valid.
enum LsStatus ls_metrics_mean_quality_bps(const struct LsMetrics *metrics, double *out);

// Freeze events over freeze opportunities.
//
// # Safety
// `metrics` must be a live handle; `out` must be valid.
enum LsStatus ls_metrics_freeze_probability(const struct LsMetrics *metrics, double *out);

// Mean freeze duration in seconds (zero when no freeze occurred).
//
// # Safety
// `metrics` must be a live handle; `out` must be valid.
enum LsStatus ls_metrics_mean_freeze_duration_s(const struct LsMetrics *metrics, double *out);

// Total bits offered on the unlicensed carrier.
//
// # Safety
// `metrics` must be a live handle; `out` must be valid.
enum LsStatus ls_metrics_unlicensed_bits_total(const struct LsMetrics *metrics, double *out);

// Mean solver iterations per QSI. Fails with `OutOfRange` for policies
// that do not run the solver.
//
// # Safety
// `metrics` must be a live handle; `out` must be valid.
enum LsStatus ls_metrics_mean_admm_iterations(const struct LsMetrics *metrics, double *out);

// Number of (UE, QSI) rows in the record.
//
// # Safety
// `metrics` must be a live handle.
size_t ls_metrics_row_count(const struct LsMetrics *metrics);

// Copies row `index` into `out`.
//
// # Safety
// `metrics` must be a live handle; `out` must point to an `LsQsiRow`.
enum LsStatus ls_metrics_row(const struct LsMetrics *metrics, size_t index, struct LsQsiRow *out);

// Number of quality-CDF points (one per ladder level).
//
// # Safety
// `metrics` must be a live handle.
size_t ls_metrics_quality_cdf_len(const struct LsMetrics *metrics);

// Reads quality-CDF point `index` as (encoding rate bits/s, fraction).
//
// # Safety
// `metrics` must be a live handle; `out_level_bps` and `out_cdf` must be
// valid.
enum LsStatus ls_metrics_quality_cdf_point(const struct LsMetrics *metrics,
                                           size_t index,
                                           double *out_level_bps,
                                           double *out_cdf);

// Analytic idle probability of the unlicensed band for a saturated DCF
// contention setup.
//
// # Safety
// `out_p_off` must be valid.
enum LsStatus ls_dcf_p_off(uint32_t stations,
                           uint32_t min_window,
                           uint32_t max_doublings,
                           double mean_pkt_slots,
                           double *out_p_off);

// WiFi packet transmission duration in whole slots.
//
// # Safety
// `out_slots` must be valid.
enum LsStatus ls_packet_duration_slots(double pkt_bytes,
                                       double phy_rate_bps,
                                       double slot_seconds,
                                       uint32_t *out_slots);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAASTREAM_H */
