//! Per-SI resource-block scheduling policies.
//!
//! Wide-band feedback is assumed, so within one carrier every RB offers a
//! UE the same rate at a given SI. Two metrics are implemented: the
//! backlog-and-channel-aware policy (queue bits times instantaneous rate,
//! with the backlog updated inside the RB loop) and proportional fairness
//! (instantaneous rate over long-run average rate). The AVIS-style baseline
//! reuses the proportional-fair enforcer; its allocator lives in the engine.
//!
//! Ties always break toward the lowest UE index so runs are reproducible.

use crate::channel::{rate_per_rb, ChannelConfig};

/// Cold-start value for the proportional-fair average rate, bits/s.
pub const PFS_BOOTSTRAP_RATE_BPS: f64 = 1.0;

/// eNodeB transmit-queue backlog for one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueBacklog {
    /// Bits still to deliver, >= 0.
    pub bits_remaining: f64,
}

impl QueueBacklog {
    pub fn new(bits: f64) -> Self {
        Self {
            bits_remaining: bits.max(0.0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bits_remaining <= 0.0
    }
}

/// Channel state visible to the scheduler at one SI.
#[derive(Debug, Clone, PartialEq)]
pub struct SiChannelView {
    /// Per-UE licensed SNR at this SI, dB.
    pub snr_l_db: Vec<f64>,
    /// Per-UE unlicensed SNR at this SI, dB.
    pub snr_u_db: Vec<f64>,
    /// Whether the unlicensed carrier is available this SI.
    pub unlicensed_available: bool,
}

impl SiChannelView {
    pub fn num_ues(&self) -> usize {
        self.snr_l_db.len()
    }
}

/// Outcome of scheduling one SI.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDecision {
    /// RB index -> UE index; licensed RBs first, then unlicensed RBs when
    /// the carrier was available.
    pub assignment: Vec<usize>,
    /// Number of licensed RBs at the head of `assignment`.
    pub licensed_rbs: usize,
    /// Payload-bearing rate per UE this SI, bits/s.
    pub per_ue_rate_bps: Vec<f64>,
    /// Unlicensed component of `per_ue_rate_bps`, bits/s.
    pub per_ue_unlicensed_rate_bps: Vec<f64>,
    /// Bits offered to each UE this SI: rate / 100 for 10 ms SIs.
    pub per_ue_bits: Vec<f64>,
}

/// Running average throughput per UE over completed SIs.
#[derive(Debug, Clone, PartialEq)]
pub struct RateHistory {
    rate_sums_bps: Vec<f64>,
    completed_sis: u64,
}

impl RateHistory {
    pub fn new(num_ues: usize) -> Self {
        Self {
            rate_sums_bps: vec![0.0; num_ues],
            completed_sis: 0,
        }
    }

    /// Average rate of UE `k`; a small bootstrap value before any SI has
    /// completed, so the fairness metric is defined at t = 1.
    pub fn average_rate_bps(&self, k: usize) -> f64 {
        if self.completed_sis == 0 {
            PFS_BOOTSTRAP_RATE_BPS
        } else {
            (self.rate_sums_bps[k] / self.completed_sis as f64).max(PFS_BOOTSTRAP_RATE_BPS)
        }
    }

    /// Folds a completed SI into the averages.
    pub fn record(&mut self, decision: &ScheduleDecision) {
        for (sum, rate) in self.rate_sums_bps.iter_mut().zip(&decision.per_ue_rate_bps) {
            *sum += rate;
        }
        self.completed_sis += 1;
    }
}

fn per_ue_rates(view: &SiChannelView, cfg: &ChannelConfig) -> (Vec<f64>, Vec<f64>) {
    let licensed = view
        .snr_l_db
        .iter()
        .map(|&s| rate_per_rb(s, cfg.rb_bandwidth_hz))
        .collect();
    let unlicensed = view
        .snr_u_db
        .iter()
        .map(|&s| rate_per_rb(s, cfg.rb_bandwidth_hz))
        .collect();
    (licensed, unlicensed)
}

/// Backlog-and-channel-aware policy. Every RB goes to the UE maximizing
/// `Q_k * r_k`, and the winner's backlog is reduced by the delivered bits
/// before the next RB is considered. When every metric is zero, remaining
/// RBs are assigned round-robin and carry no payload.
pub fn schedule_bcasp(
    view: &SiChannelView,
    queues: &[QueueBacklog],
    cfg: &ChannelConfig,
) -> ScheduleDecision {
    let k = view.num_ues();
    assert_eq!(queues.len(), k, "one queue per UE");
    let (rate_l, rate_u) = per_ue_rates(view, cfg);

    let mut remaining: Vec<f64> = queues.iter().map(|q| q.bits_remaining).collect();
    let mut assignment = Vec::with_capacity(cfg.m_l + cfg.m_u);
    let mut per_ue_rate = vec![0.0; k];
    let mut per_ue_unlicensed = vec![0.0; k];
    let mut filler_cursor = 0usize;

    let run_carrier = |rates: &[f64],
                       rb_count: usize,
                       assignment: &mut Vec<usize>,
                       per_ue_rate: &mut [f64],
                       per_ue_u: Option<&mut Vec<f64>>,
                       remaining: &mut [f64],
                       filler_cursor: &mut usize| {
        let mut unlicensed_acc = per_ue_u;
        for _ in 0..rb_count {
            let mut best_ue = 0usize;
            let mut best_metric = 0.0f64;
            for ue in 0..k {
                let metric = remaining[ue] * rates[ue];
                if metric > best_metric {
                    best_metric = metric;
                    best_ue = ue;
                }
            }
            if best_metric > 0.0 {
                assignment.push(best_ue);
                per_ue_rate[best_ue] += rates[best_ue];
                if let Some(acc) = unlicensed_acc.as_deref_mut() {
                    acc[best_ue] += rates[best_ue];
                }
                remaining[best_ue] = (remaining[best_ue] - rates[best_ue] / 100.0).max(0.0);
            } else {
                // Zero-weight degenerate case: empty transmission.
                assignment.push(*filler_cursor % k);
                *filler_cursor += 1;
            }
        }
    };

    run_carrier(
        &rate_l,
        cfg.m_l,
        &mut assignment,
        &mut per_ue_rate,
        None,
        &mut remaining,
        &mut filler_cursor,
    );
    let licensed_rbs = assignment.len();
    if view.unlicensed_available {
        run_carrier(
            &rate_u,
            cfg.m_u,
            &mut assignment,
            &mut per_ue_rate,
            Some(&mut per_ue_unlicensed),
            &mut remaining,
            &mut filler_cursor,
        );
    }

    let per_ue_bits = per_ue_rate.iter().map(|r| r / 100.0).collect();
    ScheduleDecision {
        assignment,
        licensed_rbs,
        per_ue_rate_bps: per_ue_rate,
        per_ue_unlicensed_rate_bps: per_ue_unlicensed,
        per_ue_bits,
    }
}

/// Proportional-fair policy: every RB goes to the UE maximizing
/// `r_k / avg_rate_k`. Queues are not consulted.
pub fn schedule_pfs(
    view: &SiChannelView,
    history: &RateHistory,
    cfg: &ChannelConfig,
) -> ScheduleDecision {
    let k = view.num_ues();
    let (rate_l, rate_u) = per_ue_rates(view, cfg);

    let mut assignment = Vec::with_capacity(cfg.m_l + cfg.m_u);
    let mut per_ue_rate = vec![0.0; k];
    let mut per_ue_unlicensed = vec![0.0; k];

    let run_carrier = |rates: &[f64],
                       rb_count: usize,
                       assignment: &mut Vec<usize>,
                       per_ue_rate: &mut [f64],
                       per_ue_u: Option<&mut Vec<f64>>| {
        let mut unlicensed_acc = per_ue_u;
        for _ in 0..rb_count {
            let mut best_ue = 0usize;
            let mut best_metric = f64::NEG_INFINITY;
            for (ue, &rate) in rates.iter().enumerate() {
                let metric = rate / history.average_rate_bps(ue);
                if metric > best_metric {
                    best_metric = metric;
                    best_ue = ue;
                }
            }
            assignment.push(best_ue);
            per_ue_rate[best_ue] += rates[best_ue];
            if let Some(acc) = unlicensed_acc.as_deref_mut() {
                acc[best_ue] += rates[best_ue];
            }
        }
    };

    run_carrier(&rate_l, cfg.m_l, &mut assignment, &mut per_ue_rate, None);
    let licensed_rbs = assignment.len();
    if view.unlicensed_available {
        run_carrier(
            &rate_u,
            cfg.m_u,
            &mut assignment,
            &mut per_ue_rate,
            Some(&mut per_ue_unlicensed),
        );
    }

    let per_ue_bits = per_ue_rate.iter().map(|r| r / 100.0).collect();
    ScheduleDecision {
        assignment,
        licensed_rbs,
        per_ue_rate_bps: per_ue_rate,
        per_ue_unlicensed_rate_bps: per_ue_unlicensed,
        per_ue_bits,
    }
}

/// AVIS-style enforcer: identical to proportional fairness. Queues are
/// accepted for signature symmetry and ignored, as the allocator side never
/// feeds backlog into enforcement.
pub fn schedule_avis(
    view: &SiChannelView,
    _queues: &[QueueBacklog],
    history: &RateHistory,
    cfg: &ChannelConfig,
) -> ScheduleDecision {
    schedule_pfs(view, history, cfg)
}

/// Applies the delivered bits to the queues, flooring at zero.
pub fn drain_queues(decision: &ScheduleDecision, queues: &[QueueBacklog]) -> Vec<QueueBacklog> {
    queues
        .iter()
        .zip(&decision.per_ue_bits)
        .map(|(q, &bits)| QueueBacklog::new(q.bits_remaining - bits))
        .collect()
}
