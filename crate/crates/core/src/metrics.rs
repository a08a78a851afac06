//! Per-run observables and cross-seed aggregation.

use crate::error::{Error, Result};
use crate::quality::VideoProfile;

/// One (UE, QSI) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct QsiMetric {
    pub ue: usize,
    /// 1-based QSI index.
    pub qsi: usize,
    /// Encoding rate selected for this QSI, bits/s.
    pub selected_quality_bps: f64,
    /// Whether the segment was fully delivered by the last SI.
    pub delivered_on_time: bool,
    /// Whether playback froze at the start of this QSI.
    pub freeze_occurred: bool,
    /// Freeze length in seconds; zero when no freeze occurred.
    pub freeze_duration_s: f64,
    /// Mean scheduled rate over the QSI's SIs, bits/s.
    pub avg_rate_bps: f64,
}

/// Everything one `run_scenario` call produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub rows: Vec<QsiMetric>,
    /// (encoding rate, fraction of selections at or below it), one entry per
    /// ladder level; the last entry is always 1.
    pub quality_cdf: Vec<(f64, f64)>,
    /// Freeze events over freeze opportunities (QSIs after the first).
    pub freeze_probability: f64,
    /// Mean duration over freeze events; zero when none occurred.
    pub mean_freeze_duration_s: f64,
    /// Grand mean of per-(UE, QSI) average rates, bits/s.
    pub mean_rate_bps: f64,
    /// Grand mean of selected encoding rates, bits/s.
    pub mean_quality_bps: f64,
    /// Mean solver iterations per QSI; present only for the solver-driven
    /// policy.
    pub mean_admm_iterations: Option<f64>,
    /// Total bits offered on the unlicensed carrier over the run.
    pub unlicensed_bits_total: f64,
}

impl MetricsRecord {
    pub fn from_rows(
        rows: Vec<QsiMetric>,
        profile: &VideoProfile,
        mean_admm_iterations: Option<f64>,
        unlicensed_bits_total: f64,
    ) -> Self {
        let n = rows.len() as f64;
        let mean_rate_bps = rows.iter().map(|r| r.avg_rate_bps).sum::<f64>() / n.max(1.0);
        let mean_quality_bps =
            rows.iter().map(|r| r.selected_quality_bps).sum::<f64>() / n.max(1.0);

        let opportunities = rows.iter().filter(|r| r.qsi >= 2).count();
        let freezes: Vec<&QsiMetric> = rows.iter().filter(|r| r.freeze_occurred).collect();
        let freeze_probability = if opportunities == 0 {
            0.0
        } else {
            freezes.len() as f64 / opportunities as f64
        };
        let mean_freeze_duration_s = if freezes.is_empty() {
            0.0
        } else {
            freezes.iter().map(|r| r.freeze_duration_s).sum::<f64>() / freezes.len() as f64
        };

        let quality_cdf = profile
            .encoding_rates_bps
            .iter()
            .map(|&level| {
                let at_or_below = rows
                    .iter()
                    .filter(|r| r.selected_quality_bps <= level)
                    .count();
                (level, at_or_below as f64 / n.max(1.0))
            })
            .collect();

        Self {
            rows,
            quality_cdf,
            freeze_probability,
            mean_freeze_duration_s,
            mean_rate_bps,
            mean_quality_bps,
            mean_admm_iterations,
            unlicensed_bits_total,
        }
    }
}

/// Mean and standard error of one metric across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateStat {
    pub mean: f64,
    pub stderr: f64,
}

fn stat(values: &[f64]) -> AggregateStat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    AggregateStat { mean, stderr }
}

/// Cross-seed summary of run-level metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAggregate {
    pub runs: usize,
    pub mean_rate_bps: AggregateStat,
    pub mean_quality_bps: AggregateStat,
    pub freeze_probability: AggregateStat,
    pub mean_freeze_duration_s: AggregateStat,
    pub mean_admm_iterations: Option<AggregateStat>,
}

/// Mean and standard error per metric across seed runs.
pub fn aggregate_metrics(records: &[MetricsRecord]) -> Result<RunAggregate> {
    if records.is_empty() {
        return Err(Error::domain("aggregate_metrics needs at least one record"));
    }
    let collect = |f: fn(&MetricsRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    let iteration_samples: Vec<f64> = records
        .iter()
        .filter_map(|r| r.mean_admm_iterations)
        .collect();
    Ok(RunAggregate {
        runs: records.len(),
        mean_rate_bps: stat(&collect(|r| r.mean_rate_bps)),
        mean_quality_bps: stat(&collect(|r| r.mean_quality_bps)),
        freeze_probability: stat(&collect(|r| r.freeze_probability)),
        mean_freeze_duration_s: stat(&collect(|r| r.mean_freeze_duration_s)),
        mean_admm_iterations: if iteration_samples.len() == records.len() {
            Some(stat(&iteration_samples))
        } else {
            None
        },
    })
}
