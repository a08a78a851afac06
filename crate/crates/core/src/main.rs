//! Command-line front end: runs scenario sweeps and exports CSV datasets.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use laastream::config::parse_config;
use laastream::engine::{Policy, ScenarioConfig};
use laastream::runner::{emit_fig_datasets, run, RunManifest, SweepAxis};

/// Adaptive video streaming over LTE with Licensed Assisted Access:
/// seeded scenario runs, parameter sweeps, and figure-ready CSV exports.
#[derive(Debug, Parser)]
#[command(name = "laastream", version, about)]
struct Cli {
    /// Scenario file (key = value lines; omitted keys use defaults).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Seed count N (runs seeds 1..=N) or an explicit comma-separated list.
    #[arg(long, default_value = "1")]
    seeds: String,

    /// Output directory for CSV results.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Policies to run, comma separated: bcasp, pfs_licensed, pfs_laa, avis.
    /// Defaults to the policy named in the scenario file.
    #[arg(long)]
    policy: Option<String>,

    /// Sweep axis as key=v1,v2,... May be given multiple times; the grid is
    /// the cartesian product of all axes.
    #[arg(long = "sweep")]
    sweeps: Vec<String>,

    /// Also write figure datasets (fig6/fig7/fig8_9/fig10 CSVs). Without
    /// --config, rebuilds them from an existing results directory.
    #[arg(long)]
    emit_figs: bool,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("empty --seeds".into());
    }
    if let Some((_, _)) = spec.split_once(',') {
        let seeds: Result<Vec<u64>, _> = spec.split(',').map(|s| s.trim().parse::<u64>()).collect();
        return seeds.map_err(|e| format!("bad seed list `{spec}`: {e}"));
    }
    let n: u64 = spec
        .parse()
        .map_err(|e| format!("bad seed count `{spec}`: {e}"))?;
    if n == 0 {
        return Err("--seeds must name at least one seed".into());
    }
    Ok((1..=n).collect())
}

fn parse_policies(spec: Option<&str>, fallback: Policy) -> Result<Vec<Policy>, String> {
    match spec {
        None => Ok(vec![fallback]),
        Some(s) => s
            .split(',')
            .map(|part| Policy::parse(part).map_err(|e| e.to_string()))
            .collect(),
    }
}

fn parse_sweeps(specs: &[String]) -> Result<Vec<SweepAxis>, String> {
    specs
        .iter()
        .map(|spec| {
            let (key, values) = spec
                .split_once('=')
                .ok_or_else(|| format!("--sweep expects key=v1,v2,... got `{spec}`"))?;
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            if values.is_empty() || values.iter().any(String::is_empty) {
                return Err(format!("--sweep `{spec}` has empty values"));
            }
            Ok(SweepAxis {
                key: key.trim().to_string(),
                values,
            })
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let Some(config_path) = cli.config.as_ref() else {
        if cli.emit_figs {
            return match emit_fig_datasets(&cli.out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
        eprintln!("error: nothing to do; pass --config to run or --emit-figs to rebuild datasets");
        return ExitCode::from(2);
    };

    let base: ScenarioConfig = match parse_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let invalid = |msg: String| -> ExitCode {
        eprintln!("error: {msg}");
        ExitCode::from(2)
    };
    let seeds = match parse_seeds(&cli.seeds) {
        Ok(s) => s,
        Err(m) => return invalid(m),
    };
    let policies = match parse_policies(cli.policy.as_deref(), base.policy) {
        Ok(p) => p,
        Err(m) => return invalid(m),
    };
    let sweeps = match parse_sweeps(&cli.sweeps) {
        Ok(s) => s,
        Err(m) => return invalid(m),
    };

    let manifest = RunManifest {
        base,
        seeds,
        policies,
        sweeps,
        out_dir: cli.out,
        emit_figs: cli.emit_figs,
    };
    match run(&manifest) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
