//! Scenario files: flat key-value text with dotted section keys.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are errors.
//! Omitted channel keys fall back to the standard system setup; a warning
//! is logged when the WiFi contention block or `alpha` is defaulted so runs
//! stay reproducible from the file alone. `parse_config(emit_config(c))`
//! round-trips every valid config.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{OccupancyMode, Policy, ScenarioConfig, WifiConfig};
use crate::error::{Error, Result};
use crate::quality::VideoProfile;

/// Every key accepted in a scenario file, in emission order.
pub const CONFIG_KEYS: &[&str] = &[
    "num_ues",
    "num_qsis",
    "sis_per_qsi",
    "policy",
    "seed",
    "alpha",
    "occupancy.mode",
    "occupancy.mu",
    "occupancy.sigma2",
    "wifi.stations",
    "wifi.min_window",
    "wifi.max_doublings",
    "wifi.mean_pkt_slots",
    "channel.tx_power_dbm",
    "channel.noise_dbm",
    "channel.f_l_hz",
    "channel.f_u_hz",
    "channel.shadow_var",
    "channel.rb_bandwidth_hz",
    "channel.m_l",
    "channel.m_u",
    "channel.rayleigh_fading",
    "channel.fixed_distance_m",
    "video.encoding_rates_kbps",
    "admm.rho",
    "admm.tolerance",
    "admm.max_iterations",
];

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::config(key, format!("`{value}` is not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::config(key, format!("`{value}` is not a non-negative integer")))
}

fn parse_u32(key: &str, value: &str) -> Result<u32> {
    value
        .parse::<u32>()
        .map_err(|_| Error::config(key, format!("`{value}` is not a non-negative integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(Error::config(key, format!("`{other}` is not a boolean"))),
    }
}

/// Applies one `key = value` pair to a config. Also the hook the sweep
/// machinery uses to override swept keys.
pub fn apply_override(config: &mut ScenarioConfig, key: &str, value: &str) -> Result<()> {
    let value = value.trim();
    match key {
        "num_ues" => config.num_ues = parse_usize(key, value)?,
        "num_qsis" => config.num_qsis = parse_usize(key, value)?,
        "sis_per_qsi" => config.sis_per_qsi = parse_usize(key, value)?,
        "policy" => config.policy = Policy::parse(value)?,
        "seed" => {
            config.seed = value
                .parse::<u64>()
                .map_err(|_| Error::config(key, format!("`{value}` is not a seed")))?
        }
        "alpha" => config.alpha = parse_f64(key, value)?,
        "occupancy.mode" => {
            config.occupancy_mode = match value.to_ascii_lowercase().as_str() {
                "gaussian" => OccupancyMode::Gaussian,
                "dcf" => OccupancyMode::Dcf,
                other => return Err(Error::config(key, format!("`{other}` is not gaussian|dcf"))),
            }
        }
        "occupancy.mu" => config.occupancy_mu = parse_f64(key, value)?,
        "occupancy.sigma2" => config.occupancy_sigma2 = parse_f64(key, value)?,
        "wifi.stations" => config.wifi.stations = parse_u32(key, value)?,
        "wifi.min_window" => config.wifi.min_window = parse_u32(key, value)?,
        "wifi.max_doublings" => config.wifi.max_doublings = parse_u32(key, value)?,
        "wifi.mean_pkt_slots" => {
            config.wifi.mean_pkt_slots = if value.eq_ignore_ascii_case("random") {
                None
            } else {
                Some(parse_f64(key, value)?)
            }
        }
        "channel.tx_power_dbm" => config.channel.tx_power_dbm = parse_f64(key, value)?,
        "channel.noise_dbm" => config.channel.noise_dbm = parse_f64(key, value)?,
        "channel.f_l_hz" => config.channel.f_l_hz = parse_f64(key, value)?,
        "channel.f_u_hz" => config.channel.f_u_hz = parse_f64(key, value)?,
        "channel.shadow_var" => config.channel.shadow_var = parse_f64(key, value)?,
        "channel.rb_bandwidth_hz" => config.channel.rb_bandwidth_hz = parse_f64(key, value)?,
        "channel.m_l" => config.channel.m_l = parse_usize(key, value)?,
        "channel.m_u" => config.channel.m_u = parse_usize(key, value)?,
        "channel.rayleigh_fading" => config.channel.rayleigh_fading = parse_bool(key, value)?,
        "channel.fixed_distance_m" => {
            config.fixed_distance_m = if value.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(parse_f64(key, value)?)
            }
        }
        "video.encoding_rates_kbps" => {
            let rates: Result<Vec<f64>> = value
                .split(',')
                .map(|part| parse_f64(key, part.trim()).map(|kbps| kbps * 1e3))
                .collect();
            config.video =
                VideoProfile::new(rates?).map_err(|e| Error::config(key, e.to_string()))?;
        }
        "admm.rho" => config.admm.rho = parse_f64(key, value)?,
        "admm.tolerance" => config.admm.tolerance = parse_f64(key, value)?,
        "admm.max_iterations" => config.admm.max_iterations = parse_usize(key, value)?,
        other => return Err(Error::config(other, "unknown key")),
    }
    Ok(())
}

/// Parses scenario text into a validated config. Missing keys keep their
/// defaults; `alpha` and the WiFi block log a warning when defaulted.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                format!("line {}", line_no + 1),
                format!("expected `key = value`, got `{line}`"),
            ));
        };
        let key = key.trim();
        apply_override(&mut config, key, value)?;
        seen.insert(key.to_string());
    }
    if !seen.contains("alpha") {
        eprintln!(
            "warning: `alpha` not set; defaulting to {:.0} bit/s per buffered second",
            config.alpha
        );
    }
    if config.occupancy_mode == OccupancyMode::Dcf && !seen.iter().any(|k| k.starts_with("wifi.")) {
        let w = WifiConfig::default();
        eprintln!(
            "warning: DCF occupancy with default WiFi contention (n={}, W={}, i={})",
            w.stations, w.min_window, w.max_doublings
        );
    }
    config.validate()?;
    Ok(config)
}

/// Parses a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
    parse_config_str(&text)
}

fn fmt_value(v: f64) -> String {
    // Shortest round-trippable form, so parse(emit(c)) == c exactly.
    format!("{v}")
}

/// Serializes a config as scenario text; `parse_config_str` inverts it.
pub fn emit_config(config: &ScenarioConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "num_ues = {}", config.num_ues);
    let _ = writeln!(out, "num_qsis = {}", config.num_qsis);
    let _ = writeln!(out, "sis_per_qsi = {}", config.sis_per_qsi);
    let _ = writeln!(out, "policy = {}", config.policy.name());
    let _ = writeln!(out, "seed = {}", config.seed);
    let _ = writeln!(out, "alpha = {}", fmt_value(config.alpha));
    let mode = match config.occupancy_mode {
        OccupancyMode::Gaussian => "gaussian",
        OccupancyMode::Dcf => "dcf",
    };
    let _ = writeln!(out, "occupancy.mode = {mode}");
    let _ = writeln!(out, "occupancy.mu = {}", fmt_value(config.occupancy_mu));
    let _ = writeln!(
        out,
        "occupancy.sigma2 = {}",
        fmt_value(config.occupancy_sigma2)
    );
    let _ = writeln!(out, "wifi.stations = {}", config.wifi.stations);
    let _ = writeln!(out, "wifi.min_window = {}", config.wifi.min_window);
    let _ = writeln!(out, "wifi.max_doublings = {}", config.wifi.max_doublings);
    match config.wifi.mean_pkt_slots {
        Some(v) => {
            let _ = writeln!(out, "wifi.mean_pkt_slots = {}", fmt_value(v));
        }
        None => {
            let _ = writeln!(out, "wifi.mean_pkt_slots = random");
        }
    }
    let _ = writeln!(
        out,
        "channel.tx_power_dbm = {}",
        fmt_value(config.channel.tx_power_dbm)
    );
    let _ = writeln!(
        out,
        "channel.noise_dbm = {}",
        fmt_value(config.channel.noise_dbm)
    );
    let _ = writeln!(out, "channel.f_l_hz = {}", fmt_value(config.channel.f_l_hz));
    let _ = writeln!(out, "channel.f_u_hz = {}", fmt_value(config.channel.f_u_hz));
    let _ = writeln!(
        out,
        "channel.shadow_var = {}",
        fmt_value(config.channel.shadow_var)
    );
    let _ = writeln!(
        out,
        "channel.rb_bandwidth_hz = {}",
        fmt_value(config.channel.rb_bandwidth_hz)
    );
    let _ = writeln!(out, "channel.m_l = {}", config.channel.m_l);
    let _ = writeln!(out, "channel.m_u = {}", config.channel.m_u);
    let _ = writeln!(
        out,
        "channel.rayleigh_fading = {}",
        config.channel.rayleigh_fading
    );
    match config.fixed_distance_m {
        Some(d) => {
            let _ = writeln!(out, "channel.fixed_distance_m = {}", fmt_value(d));
        }
        None => {
            let _ = writeln!(out, "channel.fixed_distance_m = none");
        }
    }
    let rates: Vec<String> = config
        .video
        .encoding_rates_bps
        .iter()
        .map(|r| fmt_value(r / 1e3))
        .collect();
    let _ = writeln!(out, "video.encoding_rates_kbps = {}", rates.join(","));
    let _ = writeln!(out, "admm.rho = {}", fmt_value(config.admm.rho));
    let _ = writeln!(out, "admm.tolerance = {}", fmt_value(config.admm.tolerance));
    let _ = writeln!(out, "admm.max_iterations = {}", config.admm.max_iterations);
    out
}
