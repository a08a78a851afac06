//! Sweep execution and CSV export.
//!
//! A manifest expands into a grid of (policy, sweep point) cells times a
//! seed list. Each cell writes one detail CSV (one row per seed) plus a
//! config echo; a run-wide summary CSV holds one aggregated row per cell.
//! Files are written to a temp name and renamed, so interrupted runs leave
//! only complete files behind. Floats in CSVs carry 9 significant digits.
//!
//! `SIM_THREADS` caps how many runs execute concurrently.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::config::{apply_override, emit_config};
use crate::engine::{run_scenario, Policy, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{aggregate_metrics, MetricsRecord};

/// One sweep axis: a config key and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

/// Everything the CLI hands to the runner.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub base: ScenarioConfig,
    pub seeds: Vec<u64>,
    pub policies: Vec<Policy>,
    pub sweeps: Vec<SweepAxis>,
    pub out_dir: PathBuf,
    pub emit_figs: bool,
}

/// One cell of the expanded grid.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub policy: Policy,
    /// (key, value) pairs in manifest order.
    pub overrides: Vec<(String, String)>,
}

impl SweepPoint {
    /// Stable file stem, e.g. `bcasp_num_ues-10_occupancy.mu-0.5`.
    pub fn stem(&self) -> String {
        let mut stem = self.policy.name().to_string();
        for (key, value) in &self.overrides {
            stem.push('_');
            stem.push_str(&format!("{key}-{value}"));
        }
        stem.replace('/', "-")
    }
}

/// Expands the manifest grid: policies x cartesian product of sweep axes.
pub fn expand_grid(manifest: &RunManifest) -> Vec<SweepPoint> {
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in &manifest.sweeps {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for base in &points {
            for value in &axis.values {
                let mut row = base.clone();
                row.push((axis.key.clone(), value.clone()));
                next.push(row);
            }
        }
        points = next;
    }
    let mut grid = Vec::with_capacity(points.len() * manifest.policies.len());
    for policy in &manifest.policies {
        for overrides in &points {
            grid.push(SweepPoint {
                policy: *policy,
                overrides: overrides.clone(),
            });
        }
    }
    grid
}

/// Builds the concrete config for (point, seed).
pub fn config_for(base: &ScenarioConfig, point: &SweepPoint, seed: u64) -> Result<ScenarioConfig> {
    let mut config = base.clone();
    config.policy = point.policy;
    for (key, value) in &point.overrides {
        apply_override(&mut config, key, value)?;
    }
    config.seed = seed;
    config.validate()?;
    Ok(config)
}

fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        "0.0".to_string()
    } else {
        format!("{v:.8e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// Column set of detail CSVs, fixed across releases.
pub const DETAIL_HEADER: &str = "policy,seed,num_ues,occupancy_mu,occupancy_sigma2,mean_rate_bps,\
mean_quality_bps,freeze_probability,mean_freeze_duration_s,mean_admm_iterations,unlicensed_bits_total";

/// Column set of the summary CSV, fixed across releases.
pub const SUMMARY_HEADER: &str =
    "policy,num_ues,occupancy_mu,occupancy_sigma2,seeds,mean_rate_bps,\
stderr_rate_bps,mean_quality_bps,stderr_quality_bps,freeze_probability,stderr_freeze_probability,\
mean_freeze_duration_s,stderr_freeze_duration_s,mean_admm_iterations";

fn detail_row(config: &ScenarioConfig, record: &MetricsRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        config.policy.name(),
        config.seed,
        config.num_ues,
        fmt_float(config.occupancy_mu),
        fmt_float(config.occupancy_sigma2),
        fmt_float(record.mean_rate_bps),
        fmt_float(record.mean_quality_bps),
        fmt_float(record.freeze_probability),
        fmt_float(record.mean_freeze_duration_s),
        fmt_opt(record.mean_admm_iterations),
        fmt_float(record.unlicensed_bits_total),
    )
}

/// Writes `content` atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| Error::domain("output path has no parent"))?;
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn thread_cap() -> usize {
    std::env::var("SIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Per-cell result retained for summary and figure emission.
pub struct CellOutcome {
    pub point: SweepPoint,
    pub config: ScenarioConfig,
    pub records: Vec<MetricsRecord>,
}

/// Executes the manifest. Returns the process exit code: 0 when everything
/// ran, 1 when any run failed (completed outputs are preserved).
pub fn run(manifest: &RunManifest) -> Result<i32> {
    let grid = expand_grid(manifest);
    if grid.is_empty() || manifest.seeds.is_empty() {
        return Err(Error::domain("manifest expands to zero runs"));
    }
    fs::create_dir_all(&manifest.out_dir)?;

    // Job list: every (cell, seed) pair, executed by a bounded worker pool.
    struct Job {
        cell: usize,
        seed: u64,
    }
    let jobs: Vec<Job> = grid
        .iter()
        .enumerate()
        .flat_map(|(cell, _)| manifest.seeds.iter().map(move |&seed| Job { cell, seed }))
        .collect();
    let queue = Mutex::new(jobs.into_iter());
    let results: Mutex<BTreeMap<(usize, u64), Result<MetricsRecord>>> = Mutex::new(BTreeMap::new());

    let workers = thread_cap().min(grid.len() * manifest.seeds.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = { queue.lock().expect("queue lock").next() };
                let Some(job) = job else { break };
                let outcome = config_for(&manifest.base, &grid[job.cell], job.seed)
                    .and_then(|c| run_scenario(&c));
                results
                    .lock()
                    .expect("results lock")
                    .insert((job.cell, job.seed), outcome);
            });
        }
    });
    let mut results = results.into_inner().expect("results lock");

    let mut failures = 0usize;
    let mut summary_lines = vec![SUMMARY_HEADER.to_string()];
    let mut outcomes = Vec::new();

    for (cell, point) in grid.iter().enumerate() {
        let mut detail_lines = vec![DETAIL_HEADER.to_string()];
        let mut records = Vec::new();
        let mut cell_config: Option<ScenarioConfig> = None;
        for &seed in &manifest.seeds {
            match results.remove(&(cell, seed)) {
                Some(Ok(record)) => {
                    let config = config_for(&manifest.base, point, seed)?;
                    detail_lines.push(detail_row(&config, &record));
                    records.push(record);
                    cell_config.get_or_insert(config);
                }
                Some(Err(err)) => {
                    failures += 1;
                    eprintln!("run failed ({} seed {seed}): {err}", point.stem());
                }
                None => unreachable!("every job is executed"),
            }
        }
        if records.is_empty() {
            continue;
        }
        let config = cell_config.expect("at least one record implies a config");
        let stem = point.stem();
        write_atomic(
            &manifest.out_dir.join(format!("{stem}_detail.csv")),
            &(detail_lines.join("\n") + "\n"),
        )?;
        write_atomic(
            &manifest.out_dir.join(format!("{stem}_config.cfg")),
            &emit_config(&config),
        )?;

        let agg = aggregate_metrics(&records)?;
        summary_lines.push(format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            point.policy.name(),
            config.num_ues,
            fmt_float(config.occupancy_mu),
            fmt_float(config.occupancy_sigma2),
            agg.runs,
            fmt_float(agg.mean_rate_bps.mean),
            fmt_float(agg.mean_rate_bps.stderr),
            fmt_float(agg.mean_quality_bps.mean),
            fmt_float(agg.mean_quality_bps.stderr),
            fmt_float(agg.freeze_probability.mean),
            fmt_float(agg.freeze_probability.stderr),
            fmt_float(agg.mean_freeze_duration_s.mean),
            fmt_float(agg.mean_freeze_duration_s.stderr),
            fmt_opt(agg.mean_admm_iterations.map(|s| s.mean)),
        ));
        outcomes.push(CellOutcome {
            point: point.clone(),
            config,
            records,
        });
    }

    write_atomic(
        &manifest.out_dir.join("summary.csv"),
        &(summary_lines.join("\n") + "\n"),
    )?;

    if manifest.emit_figs {
        emit_fig_datasets_from(&outcomes, &manifest.out_dir)?;
    }

    Ok(if failures > 0 { 1 } else { 0 })
}

/// Figure-style datasets derived from in-memory outcomes.
pub fn emit_fig_datasets_from(outcomes: &[CellOutcome], out_dir: &Path) -> Result<()> {
    if outcomes.is_empty() {
        return Err(Error::domain("no results to derive figure datasets from"));
    }
    let figs = out_dir.join("figs");
    fs::create_dir_all(&figs)?;

    // fig6: mean solver iterations vs number of UEs (solver-driven cells).
    let mut fig6 = vec!["num_ues,mean_admm_iterations".to_string()];
    for o in outcomes.iter().filter(|o| o.point.policy == Policy::Bcasp) {
        let agg = aggregate_metrics(&o.records)?;
        if let Some(iters) = agg.mean_admm_iterations {
            fig6.push(format!("{},{}", o.config.num_ues, fmt_float(iters.mean)));
        }
    }
    if fig6.len() > 1 {
        write_atomic(&figs.join("fig6_admm_iters.csv"), &(fig6.join("\n") + "\n"))?;
    }

    // fig7: mean rate vs (K, mu).
    let mut fig7 = vec!["policy,num_ues,occupancy_mu,mean_rate_mbps".to_string()];
    for o in outcomes {
        let agg = aggregate_metrics(&o.records)?;
        fig7.push(format!(
            "{},{},{},{}",
            o.point.policy.name(),
            o.config.num_ues,
            fmt_float(o.config.occupancy_mu),
            fmt_float(agg.mean_rate_bps.mean / 1e6),
        ));
    }
    write_atomic(&figs.join("fig7_rate.csv"), &(fig7.join("\n") + "\n"))?;

    // fig8/9: quality CDF per cell, pooled across seeds.
    let mut fig89 = vec!["policy,num_ues,occupancy_mu,quality_kbps,cdf".to_string()];
    for o in outcomes {
        let levels = &o.config.video.encoding_rates_bps;
        let total: usize = o.records.iter().map(|r| r.rows.len()).sum();
        for &level in levels {
            let at_or_below: usize = o
                .records
                .iter()
                .map(|r| {
                    r.rows
                        .iter()
                        .filter(|row| row.selected_quality_bps <= level)
                        .count()
                })
                .sum();
            fig89.push(format!(
                "{},{},{},{},{}",
                o.point.policy.name(),
                o.config.num_ues,
                fmt_float(o.config.occupancy_mu),
                fmt_float(level / 1e3),
                fmt_float(at_or_below as f64 / total.max(1) as f64),
            ));
        }
    }
    write_atomic(
        &figs.join("fig8_9_quality_cdf.csv"),
        &(fig89.join("\n") + "\n"),
    )?;

    // fig10: freeze probability and duration vs sigma2 per policy.
    let mut fig10 = vec!["policy,occupancy_sigma2,freeze_prob,freeze_dur_s".to_string()];
    for o in outcomes {
        let agg = aggregate_metrics(&o.records)?;
        fig10.push(format!(
            "{},{},{},{}",
            o.point.policy.name(),
            fmt_float(o.config.occupancy_sigma2),
            fmt_float(agg.freeze_probability.mean),
            fmt_float(agg.mean_freeze_duration_s.mean),
        ));
    }
    write_atomic(&figs.join("fig10_freeze.csv"), &(fig10.join("\n") + "\n"))?;
    Ok(())
}

/// Rebuilds figure datasets from detail CSVs present in a results directory.
/// Missing or malformed files are listed and skipped; having nothing to emit
/// is an error.
pub fn emit_fig_datasets(results_dir: &Path) -> Result<()> {
    let mut outcomes = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(results_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with("_detail.csv"))
        })
        .collect();
    entries.sort();

    for detail_path in entries {
        let name = detail_path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        let cfg_path = results_dir.join(name.replace("_detail.csv", "_config.cfg"));
        let config = match crate::config::parse_config(&cfg_path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("skipping {name}: no readable config echo ({e})");
                continue;
            }
        };
        match rebuild_outcome(&detail_path, config) {
            Ok(o) => outcomes.push(o),
            Err(e) => eprintln!("skipping {name}: {e}"),
        }
    }
    emit_fig_datasets_from(&outcomes, results_dir)
}

/// Re-runs the recorded (config, seed) pairs of a detail CSV to recover full
/// records. Detail rows only keep run-level metrics; determinism makes the
/// rebuild exact.
fn rebuild_outcome(detail_path: &Path, config: ScenarioConfig) -> Result<CellOutcome> {
    let text = fs::read_to_string(detail_path)?;
    let mut records = Vec::new();
    for line in text.lines().skip(1) {
        let mut fields = line.split(',');
        let _policy = fields.next();
        let seed: u64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::domain("bad seed field in detail CSV"))?;
        let mut run_config = config.clone();
        run_config.seed = seed;
        records.push(run_scenario(&run_config)?);
    }
    if records.is_empty() {
        return Err(Error::domain("detail CSV has no rows"));
    }
    Ok(CellOutcome {
        point: SweepPoint {
            policy: config.policy,
            overrides: Vec::new(),
        },
        config,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expansion_is_cartesian() {
        let manifest = RunManifest {
            base: ScenarioConfig::default(),
            seeds: vec![1, 2],
            policies: vec![Policy::Bcasp, Policy::PfsLaa],
            sweeps: vec![
                SweepAxis {
                    key: "num_ues".into(),
                    values: vec!["2".into(), "4".into(), "6".into()],
                },
                SweepAxis {
                    key: "occupancy.mu".into(),
                    values: vec!["0.2".into(), "0.8".into()],
                },
            ],
            out_dir: PathBuf::from("unused"),
            emit_figs: false,
        };
        let grid = expand_grid(&manifest);
        assert_eq!(grid.len(), 2 * 3 * 2);
        assert_eq!(grid[0].stem(), "bcasp_num_ues-2_occupancy.mu-0.2");
    }

    #[test]
    fn config_for_applies_overrides_and_seed() {
        let point = SweepPoint {
            policy: Policy::PfsLaa,
            overrides: vec![
                ("num_ues".into(), "5".into()),
                ("occupancy.mu".into(), "0.25".into()),
            ],
        };
        let config = config_for(&ScenarioConfig::default(), &point, 77).unwrap();
        assert_eq!(config.num_ues, 5);
        assert_eq!(config.occupancy_mu, 0.25);
        assert_eq!(config.seed, 77);
        assert_eq!(config.policy, Policy::PfsLaa);
    }

    #[test]
    fn float_formatting_has_nine_significant_digits() {
        assert_eq!(fmt_float(1.0e6), "1.00000000e6");
        assert_eq!(fmt_float(0.0), "0.0");
    }
}
