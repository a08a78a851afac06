//! Two-timescale simulation loop.
//!
//! Per QSI: sense the unlicensed idle probability, form QSI-average SNRs
//! from the previous QSI's per-SI draws, pick a segment quality per UE
//! (policy-dependent), and load the segment into the transmit queues. Per
//! SI: draw fading and unlicensed availability, schedule every RB, and
//! drain the queues. Buffers follow the three-leg update on the downloaded
//! duration; freezes are derived from delivery traces afterwards.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::admm::{solve_p1, AdmmSettings};
use crate::channel::{
    large_scale_snr, per_si_snr, qsi_average_snr, unit_mean_exp_gain, ChannelConfig, UePlacement,
};
use crate::error::{Error, Result};
use crate::metrics::{MetricsRecord, QsiMetric};
use crate::quality::{
    achievable_rate, segment_bits, select_quality, update_buffer, BufferState, UtilityInputs,
    VideoProfile,
};
use crate::rng::{derive_seed, stream, StreamDomain};
use crate::scheduler::{
    drain_queues, schedule_avis, schedule_bcasp, schedule_pfs, QueueBacklog, RateHistory,
    SiChannelView,
};
use crate::wifi::{
    qsi_mean_pkt_slots, sample_qsi_p_off, solve_dcf_fixed_point, OccupancyProcess, WifiParams,
};

/// Minimum UE distance from the eNodeB, meters.
pub const MIN_UE_DISTANCE_M: f64 = 10.0;

/// Half-width of the square deployment area, meters (2 km x 2 km cell).
pub const CELL_HALF_WIDTH_M: f64 = 1000.0;

/// Scheduling and quality-selection policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Solver-selected quality plus backlog-and-channel-aware scheduling.
    Bcasp,
    /// Proportional fairness restricted to the licensed carrier.
    PfsLicensed,
    /// Proportional fairness over both carriers.
    PfsLaa,
    /// AVIS-style baseline: buffer-blind allocator plus PFS enforcement.
    Avis,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Bcasp => "bcasp",
            Policy::PfsLicensed => "pfs_licensed",
            Policy::PfsLaa => "pfs_laa",
            Policy::Avis => "avis",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bcasp" => Ok(Policy::Bcasp),
            "pfs_licensed" => Ok(Policy::PfsLicensed),
            "pfs_laa" => Ok(Policy::PfsLaa),
            "avis" => Ok(Policy::Avis),
            other => Err(Error::config("policy", format!("unknown policy `{other}`"))),
        }
    }

    pub fn all() -> [Policy; 4] {
        [
            Policy::Bcasp,
            Policy::PfsLicensed,
            Policy::PfsLaa,
            Policy::Avis,
        ]
    }
}

/// How the per-QSI idle probability is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OccupancyMode {
    /// Gaussian draws around `mu` with variance `sigma2`.
    Gaussian,
    /// Analytic DCF solution for the configured WiFi contention, with the
    /// mean packet duration either fixed or drawn per QSI from the 802.11n
    /// duration set.
    Dcf,
}

/// WiFi contention setup used by the DCF occupancy mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WifiConfig {
    pub stations: u32,
    pub min_window: u32,
    pub max_doublings: u32,
    /// Fixed mean packet duration in slots; `None` draws from the duration
    /// set each QSI.
    pub mean_pkt_slots: Option<f64>,
}

impl Default for WifiConfig {
    fn default() -> Self {
        Self {
            stations: 5,
            min_window: 16,
            max_doublings: 6,
            mean_pkt_slots: None,
        }
    }
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_ues: usize,
    pub num_qsis: usize,
    /// SIs per QSI; 10 ms each, so 1000 SIs span one 10 s segment.
    pub sis_per_qsi: usize,
    pub policy: Policy,
    pub occupancy_mode: OccupancyMode,
    /// Mean of the per-QSI idle probability (Gaussian mode).
    pub occupancy_mu: f64,
    /// Variance of the per-QSI idle probability (Gaussian mode).
    pub occupancy_sigma2: f64,
    pub wifi: WifiConfig,
    pub channel: ChannelConfig,
    pub video: VideoProfile,
    /// Buffer bias weight in the allocation utility, bits/s per second.
    pub alpha: f64,
    /// Places every UE at this distance instead of uniformly in the cell.
    pub fixed_distance_m: Option<f64>,
    pub admm: AdmmSettings,
    /// Master seed; every random stream derives from it.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_ues: 10,
            num_qsis: 100,
            sis_per_qsi: 1000,
            policy: Policy::Bcasp,
            occupancy_mode: OccupancyMode::Gaussian,
            occupancy_mu: 0.5,
            occupancy_sigma2: 0.1,
            wifi: WifiConfig::default(),
            channel: ChannelConfig::default(),
            video: VideoProfile::standard(),
            alpha: 1e6,
            fixed_distance_m: None,
            admm: AdmmSettings::default(),
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_ues < 1 {
            return Err(Error::config("num_ues", "must be >= 1"));
        }
        if self.num_qsis < 1 {
            return Err(Error::config("num_qsis", "must be >= 1"));
        }
        let expected_sis = (self.video.segment_seconds * 100.0).round() as usize;
        if self.sis_per_qsi != expected_sis {
            return Err(Error::config(
                "sis_per_qsi",
                format!("must equal segment_seconds * 100 = {expected_sis} (10 ms SIs)"),
            ));
        }
        if !(0.0..=1.0).contains(&self.occupancy_mu) {
            return Err(Error::config("occupancy.mu", "must lie in [0, 1]"));
        }
        if self.occupancy_sigma2 < 0.0 {
            return Err(Error::config("occupancy.sigma2", "must be >= 0"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::config("alpha", "must be finite and >= 0"));
        }
        if let Some(d) = self.fixed_distance_m {
            if d < MIN_UE_DISTANCE_M {
                return Err(Error::config(
                    "channel.fixed_distance_m",
                    format!("must be >= {MIN_UE_DISTANCE_M}"),
                ));
            }
        }
        if self.occupancy_mode == OccupancyMode::Dcf {
            WifiParams::new(
                self.wifi.stations,
                self.wifi.min_window,
                self.wifi.max_doublings,
                self.wifi.mean_pkt_slots.unwrap_or(19.0),
            )
            .map_err(|e| Error::config("wifi", e.to_string()))?;
        }
        self.channel
            .validate()
            .map_err(|e| Error::config("channel", e.to_string()))?;
        Ok(())
    }
}

/// Delivery outcome of one (UE, QSI): whether the segment finished in time
/// and, if it finished, at which SI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeliveryOutcome {
    pub on_time: bool,
    /// SI index (1-based) at which the queue emptied, when it did.
    pub completion_si: Option<usize>,
}

/// Per-QSI freeze classification for one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreezeEvent {
    pub occurred: bool,
    pub duration_s: f64,
}

/// Derives freeze events from aligned per-QSI traces.
///
/// A freeze occurs in QSI T+1 when the segment downloaded during QSI T was
/// not complete by its end. Its duration runs from the QSI start until the
/// current download completes, at SI granularity, capped at the full QSI
/// when the download never completes.
pub fn compute_freeze(
    buffer_trace: &[f64],
    deliveries: &[DeliveryOutcome],
    sis_per_qsi: usize,
) -> Result<Vec<FreezeEvent>> {
    if buffer_trace.len() != deliveries.len() {
        return Err(Error::domain("freeze traces must be aligned per QSI"));
    }
    let mut events = Vec::with_capacity(deliveries.len());
    for (idx, outcome) in deliveries.iter().enumerate() {
        if idx == 0 {
            // Playback starts with a prefetched segment; QSI 1 cannot freeze.
            events.push(FreezeEvent {
                occurred: false,
                duration_s: 0.0,
            });
            continue;
        }
        let occurred = !deliveries[idx - 1].on_time;
        let duration_s = if !occurred {
            0.0
        } else {
            match outcome.completion_si {
                Some(si) => si as f64 / 100.0,
                None => sis_per_qsi as f64 / 100.0,
            }
        };
        events.push(FreezeEvent {
            occurred,
            duration_s,
        });
    }
    Ok(events)
}

/// AVIS-style allocator: a buffer-blind fair share from the UE's own SNRs
/// and the long-run idle probability.
pub fn avis_allocator(
    snr_l_db: &[f64],
    snr_u_db: &[f64],
    p_off_mean: f64,
    cfg: &ChannelConfig,
    profile: &VideoProfile,
) -> Vec<f64> {
    let k = snr_l_db.len() as f64;
    snr_l_db
        .iter()
        .zip(snr_u_db)
        .map(|(&sl, &su)| {
            let share = (cfg.m_l as f64 * crate::channel::rate_per_rb(sl, cfg.rb_bandwidth_hz)
                + p_off_mean
                    * cfg.m_u as f64
                    * crate::channel::rate_per_rb(su, cfg.rb_bandwidth_hz))
                / k;
            select_quality(share, profile)
        })
        .collect()
}

fn draw_placements(config: &ScenarioConfig) -> Vec<UePlacement> {
    let mut rng = stream(config.seed, StreamDomain::Placement, 0, 0);
    (0..config.num_ues)
        .map(|_| {
            if let Some(d) = config.fixed_distance_m {
                return UePlacement {
                    position: (d, 0.0),
                    distance: d,
                };
            }
            loop {
                let x = rng.random_range(-CELL_HALF_WIDTH_M..CELL_HALF_WIDTH_M);
                let y = rng.random_range(-CELL_HALF_WIDTH_M..CELL_HALF_WIDTH_M);
                let d = x.hypot(y);
                if d >= MIN_UE_DISTANCE_M {
                    return UePlacement {
                        position: (x, y),
                        distance: d,
                    };
                }
            }
        })
        .collect()
}

/// Long-run mean idle probability used by the AVIS allocator.
fn p_off_process_mean(config: &ScenarioConfig) -> Result<f64> {
    match config.occupancy_mode {
        OccupancyMode::Gaussian => Ok(config.occupancy_mu),
        OccupancyMode::Dcf => {
            let pkt = config.wifi.mean_pkt_slots.unwrap_or_else(|| {
                let set = crate::wifi::packet_duration_set();
                set.iter().map(|&s| f64::from(s)).sum::<f64>() / set.len() as f64
            });
            let params = WifiParams::new(
                config.wifi.stations,
                config.wifi.min_window,
                config.wifi.max_doublings,
                pkt,
            )?;
            Ok(solve_dcf_fixed_point(&params)?.p_off)
        }
    }
}

fn qsi_p_off(config: &ScenarioConfig, process: &OccupancyProcess, qsi: usize) -> Result<f64> {
    match config.occupancy_mode {
        OccupancyMode::Gaussian => Ok(sample_qsi_p_off(process, qsi)),
        OccupancyMode::Dcf => {
            let pkt = qsi_mean_pkt_slots(config.wifi.mean_pkt_slots, config.seed, qsi);
            let params = WifiParams::new(
                config.wifi.stations,
                config.wifi.min_window,
                config.wifi.max_doublings,
                pkt,
            )?;
            Ok(solve_dcf_fixed_point(&params)?.p_off)
        }
    }
}

/// Runs one scenario to completion. Deterministic for a fixed config.
pub fn run_scenario(config: &ScenarioConfig) -> Result<MetricsRecord> {
    config.validate()?;
    let k = config.num_ues;
    let sis = config.sis_per_qsi;
    let placements = draw_placements(config);
    let process = OccupancyProcess {
        mu: config.occupancy_mu,
        sigma2: config.occupancy_sigma2,
        seed: derive_seed(config.seed, StreamDomain::Occupancy, 0, 0),
    };
    let avis_p_off_mean = p_off_process_mean(config)?;

    let mut buffers = vec![BufferState::full(); k];
    let mut history = RateHistory::new(k);

    // Per-UE traces assembled into rows after the run.
    let mut quality_trace: Vec<Vec<f64>> = vec![Vec::with_capacity(config.num_qsis); k];
    let mut delivery_trace: Vec<Vec<DeliveryOutcome>> =
        vec![Vec::with_capacity(config.num_qsis); k];
    let mut buffer_trace: Vec<Vec<f64>> = vec![Vec::with_capacity(config.num_qsis); k];
    let mut rate_trace: Vec<Vec<f64>> = vec![Vec::with_capacity(config.num_qsis); k];

    // QSI-average SNRs of the previous QSI; bootstrapped below for QSI 1.
    let mut reported_snr_l = vec![0.0; k];
    let mut reported_snr_u = vec![0.0; k];
    // Drain-speed estimate of the previous QSI, used by the PFS baselines.
    let mut pfs_rate_estimate: Vec<Option<f64>> = vec![None; k];

    let mut admm_iterations_sum = 0.0;
    let mut unlicensed_bits_total = 0.0;

    for qsi in 1..=config.num_qsis {
        let p_off = qsi_p_off(config, &process, qsi)?.clamp(0.0, 1.0);

        // One shadowing draw per UE per QSI, shared by both carriers.
        let shadow = Normal::new(0.0, config.channel.shadow_var.sqrt())
            .map_err(|e| Error::domain(format!("shadowing draw: {e}")))?;
        let large_scale: Vec<_> = (0..k)
            .map(|ue| {
                let xs = shadow.sample(&mut stream(
                    config.seed,
                    StreamDomain::Shadowing,
                    ue as u64,
                    qsi as u64,
                ));
                large_scale_snr(&config.channel, &placements[ue], xs)
            })
            .collect::<Result<_>>()?;

        if qsi == 1 {
            // No prior per-SI draws; report the current large-scale SNR.
            for ue in 0..k {
                reported_snr_l[ue] = large_scale[ue].snr_l_db;
                reported_snr_u[ue] = large_scale[ue].snr_u_db;
            }
        }

        // Quality selection.
        let qualities: Vec<f64> = match config.policy {
            Policy::Bcasp => {
                let inputs = UtilityInputs {
                    snr_l_db: reported_snr_l.clone(),
                    snr_u_db: reported_snr_u.clone(),
                    buffer_seconds: buffers.iter().map(|b| b.seconds_buffered).collect(),
                    p_off,
                    alpha: config.alpha,
                    channel: config.channel,
                };
                let solution = solve_p1(&inputs, &config.admm).map_err(|e| e.at_qsi(qsi))?;
                admm_iterations_sum += solution.iterations as f64;
                (0..k)
                    .map(|ue| {
                        let rate = achievable_rate(solution.x_l[ue], solution.x_u[ue], &inputs, ue);
                        select_quality(rate, &config.video)
                    })
                    .collect()
            }
            Policy::PfsLicensed | Policy::PfsLaa => (0..k)
                .map(|ue| match pfs_rate_estimate[ue] {
                    Some(rate) => select_quality(rate, &config.video),
                    // Cold start: request the lowest ladder entry.
                    None => config.video.encoding_rates_bps[0],
                })
                .collect(),
            Policy::Avis => avis_allocator(
                &reported_snr_l,
                &reported_snr_u,
                avis_p_off_mean,
                &config.channel,
                &config.video,
            ),
        };

        // Queue initialization at SI 1 of the QSI.
        let segment_sizes: Vec<f64> = qualities
            .iter()
            .map(|&q| segment_bits(q, &config.video))
            .collect();
        let mut queues: Vec<QueueBacklog> = segment_sizes
            .iter()
            .map(|&s| QueueBacklog::new(s))
            .collect();
        let mut completion_si: Vec<Option<usize>> = vec![None; k];

        // Per-SI accumulators.
        let mut fading_l: Vec<_> = (0..k)
            .map(|ue| {
                stream(
                    config.seed,
                    StreamDomain::FadingLicensed,
                    ue as u64,
                    qsi as u64,
                )
            })
            .collect();
        let mut fading_u: Vec<_> = (0..k)
            .map(|ue| {
                stream(
                    config.seed,
                    StreamDomain::FadingUnlicensed,
                    ue as u64,
                    qsi as u64,
                )
            })
            .collect();
        let mut availability = stream(config.seed, StreamDomain::Availability, qsi as u64, 0);
        let mut snr_l_sis: Vec<Vec<f64>> = vec![Vec::with_capacity(sis); k];
        let mut snr_u_sis: Vec<Vec<f64>> = vec![Vec::with_capacity(sis); k];
        let mut rate_sum = vec![0.0; k];

        for si in 1..=sis {
            let mut snr_l_now = Vec::with_capacity(k);
            let mut snr_u_now = Vec::with_capacity(k);
            for ue in 0..k {
                let (sl, su) = if config.channel.rayleigh_fading {
                    (
                        per_si_snr(
                            large_scale[ue].snr_l_db,
                            unit_mean_exp_gain(&mut fading_l[ue]),
                        ),
                        per_si_snr(
                            large_scale[ue].snr_u_db,
                            unit_mean_exp_gain(&mut fading_u[ue]),
                        ),
                    )
                } else {
                    (large_scale[ue].snr_l_db, large_scale[ue].snr_u_db)
                };
                snr_l_sis[ue].push(sl);
                snr_u_sis[ue].push(su);
                snr_l_now.push(sl);
                snr_u_now.push(su);
            }

            let a_u = match config.policy {
                Policy::PfsLicensed => false,
                _ => availability.random::<f64>() < p_off,
            };
            let view = SiChannelView {
                snr_l_db: snr_l_now,
                snr_u_db: snr_u_now,
                unlicensed_available: a_u,
            };

            let decision = match config.policy {
                Policy::Bcasp => schedule_bcasp(&view, &queues, &config.channel),
                Policy::PfsLicensed | Policy::PfsLaa => {
                    schedule_pfs(&view, &history, &config.channel)
                }
                Policy::Avis => schedule_avis(&view, &queues, &history, &config.channel),
            };

            queues = drain_queues(&decision, &queues);
            for ue in 0..k {
                rate_sum[ue] += decision.per_ue_rate_bps[ue];
                unlicensed_bits_total += decision.per_ue_unlicensed_rate_bps[ue] / 100.0;
                if completion_si[ue].is_none() && queues[ue].is_empty() {
                    completion_si[ue] = Some(si);
                }
            }
            history.record(&decision);
        }

        // Post-QSI bookkeeping.
        for ue in 0..k {
            let delivered = segment_sizes[ue] - queues[ue].bits_remaining;
            let on_time = queues[ue].is_empty();
            let downloaded_duration = config.video.segment_seconds * delivered / segment_sizes[ue];

            buffer_trace[ue].push(buffers[ue].seconds_buffered);
            quality_trace[ue].push(qualities[ue]);
            delivery_trace[ue].push(DeliveryOutcome {
                on_time,
                completion_si: completion_si[ue],
            });
            rate_trace[ue].push(rate_sum[ue] / sis as f64);

            let mut next =
                update_buffer(&buffers[ue], downloaded_duration).map_err(|e| e.at_qsi(qsi))?;
            next.pending_segment_bits = queues[ue].bits_remaining;
            // A freeze was in progress this QSI if the previous segment
            // missed its deadline; it runs until this download completes.
            next.freeze_elapsed = if buffers[ue].freeze_active {
                completion_si[ue]
                    .map_or(config.video.segment_seconds, |si| si as f64 / 100.0)
            } else {
                0.0
            };
            // A miss now means playback stalls at the next QSI start.
            next.freeze_active = !on_time;
            buffers[ue] = next;

            // Download speed experienced this QSI: completed downloads use
            // the realized completion time, unfinished ones the full QSI.
            let download_seconds =
                completion_si[ue].map_or(config.video.segment_seconds, |si| si as f64 / 100.0);
            pfs_rate_estimate[ue] = Some(delivered / download_seconds);

            reported_snr_l[ue] = qsi_average_snr(&snr_l_sis[ue])?;
            reported_snr_u[ue] = qsi_average_snr(&snr_u_sis[ue])?;
        }
    }

    // Freeze classification and row assembly.
    let mut rows = Vec::with_capacity(k * config.num_qsis);
    let mut freeze_events: Vec<Vec<FreezeEvent>> = Vec::with_capacity(k);
    for ue in 0..k {
        freeze_events.push(compute_freeze(&buffer_trace[ue], &delivery_trace[ue], sis)?);
    }
    for qsi in 1..=config.num_qsis {
        for ue in 0..k {
            let idx = qsi - 1;
            let freeze = freeze_events[ue][idx];
            rows.push(QsiMetric {
                ue,
                qsi,
                selected_quality_bps: quality_trace[ue][idx],
                delivered_on_time: delivery_trace[ue][idx].on_time,
                freeze_occurred: freeze.occurred,
                freeze_duration_s: freeze.duration_s,
                avg_rate_bps: rate_trace[ue][idx],
            });
        }
    }

    let mean_admm_iterations = match config.policy {
        Policy::Bcasp => Some(admm_iterations_sum / config.num_qsis as f64),
        _ => None,
    };
    Ok(MetricsRecord::from_rows(
        rows,
        &config.video,
        mean_admm_iterations,
        unlicensed_bits_total,
    ))
}
