//! WiFi activity model for the unlicensed band.
//!
//! The eNodeB treats the unlicensed carrier as idle with probability
//! `P_off`. This module computes `P_off` three ways:
//!
//! * from energy-detector sample counts (busy vs idle),
//! * analytically from the saturated DCF fixed point (per-slot transmit
//!   probability `gamma` and conditional collision probability `p`),
//! * as a per-QSI Gaussian process used by scenario runs.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::{stream, StreamDomain};

/// 802.11n PHY rates assumed available to WiFi stations, in bits/s.
pub const WIFI_PHY_RATES_BPS: [f64; 8] = [
    7.2e6, 14.4e6, 21.7e6, 28.9e6, 43.3e6, 57.8e6, 65.0e6, 72.2e6,
];

/// Fixed WiFi packet size in bytes.
pub const WIFI_PACKET_BYTES: f64 = 1500.0;

/// WiFi slot duration in seconds.
pub const WIFI_SLOT_SECONDS: f64 = 9e-6;

/// Residual target for the DCF fixed point.
pub const DCF_RESIDUAL_TOL: f64 = 1e-10;

/// Saturated-DCF contention parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WifiParams {
    /// Number of contending stations, n >= 1.
    pub stations: u32,
    /// Minimum backoff window in slots, >= 2.
    pub min_window: u32,
    /// Maximum number of backoff-window doublings, >= 0.
    pub max_doublings: u32,
    /// Mean packet transmission duration in WiFi slots, > 0 and finite.
    pub mean_pkt_slots: f64,
}

impl WifiParams {
    pub fn new(
        stations: u32,
        min_window: u32,
        max_doublings: u32,
        mean_pkt_slots: f64,
    ) -> Result<Self> {
        if stations < 1 {
            return Err(Error::domain("stations must be >= 1"));
        }
        if min_window < 2 {
            return Err(Error::domain("min_window must be >= 2"));
        }
        if !(mean_pkt_slots.is_finite() && mean_pkt_slots > 0.0) {
            return Err(Error::domain("mean_pkt_slots must be finite and > 0"));
        }
        Ok(Self {
            stations,
            min_window,
            max_doublings,
            mean_pkt_slots,
        })
    }
}

/// Solved DCF occupancy figures for one contention configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WifiOccupancy {
    /// Per-slot station transmit probability, in (0, 1).
    pub gamma: f64,
    /// Conditional collision probability, in [0, 1); rounds to 1 in the
    /// same extreme-contention corner that underflows `p_off`.
    pub p_coll: f64,
    /// Probability of at least one transmission in a slot, in (0, 1].
    pub p_tx: f64,
    /// Mean count of consecutive idle slots between transmissions, >= 0.
    pub mean_idle_slots: f64,
    /// Probability the band is idle at a random instant. Strictly inside
    /// (0, 1) mathematically; at extreme contention (dozens of stations on
    /// a minimal non-doubling window) `p_tx` rounds to 1 and this
    /// underflows to exactly 0.
    pub p_off: f64,
    /// Complement of `p_off`; the two always sum to one exactly.
    pub p_on: f64,
}

/// Gaussian per-QSI model of `P_off`, clamped away from the degenerate
/// endpoints except in the zero-variance case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyProcess {
    /// Mean of the per-QSI idle probability.
    pub mu: f64,
    /// Variance of the per-QSI idle probability.
    pub sigma2: f64,
    /// Stream seed; runs derive it from the scenario master seed.
    pub seed: u64,
}

/// Idle-probability estimate from energy-detector counts: `N2 / (N1 + N2)`.
pub fn estimate_p_off_from_samples(n_busy: u64, n_idle: u64) -> Result<f64> {
    let total = n_busy + n_idle;
    if total == 0 {
        return Err(Error::domain("sample estimate needs at least one sample"));
    }
    Ok(n_idle as f64 / total as f64)
}

/// Transmit probability as a function of the collision probability.
///
/// At `p = 1/2` the printed expression is 0/0; the continuous limit
/// `2 / (1 + W + i W / 2)` is used instead.
fn gamma_of_p(p: f64, min_window: u32, max_doublings: u32) -> f64 {
    let w = f64::from(min_window);
    let i = max_doublings;
    let one_minus_2p = 1.0 - 2.0 * p;
    if one_minus_2p.abs() < 1e-12 {
        return 2.0 / (1.0 + w + f64::from(i) * w / 2.0);
    }
    let num = 2.0 * one_minus_2p;
    let den = one_minus_2p * (w + 1.0) + p * w * (1.0 - (2.0 * p).powi(i as i32));
    num / den
}

/// Solves the coupled (gamma, p) equations of the saturated DCF model and
/// derives the occupancy figures.
///
/// The solve is a bisection on gamma over (0, 1) of the residual
/// `gamma - gamma(p(gamma))`, which changes sign over that bracket.
pub fn solve_dcf_fixed_point(params: &WifiParams) -> Result<WifiOccupancy> {
    let n = params.stations;
    let p_of_gamma = |g: f64| 1.0 - (1.0 - g).powi(n as i32 - 1);
    let residual = |g: f64| g - gamma_of_p(p_of_gamma(g), params.min_window, params.max_doublings);

    let mut lo = 1e-15;
    let mut hi = 1.0 - 1e-15;
    // residual(lo) < 0 since gamma(p(0)) = 2/(W+1) > 0; residual(hi) > 0.
    let max_iterations = 200;
    for _ in 0..max_iterations {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let p_coll = p_of_gamma(gamma);

    let gamma_residual = residual(gamma).abs();
    let p_residual = (p_coll - (1.0 - (1.0 - gamma).powi(n as i32 - 1))).abs();
    if gamma_residual > DCF_RESIDUAL_TOL || p_residual > DCF_RESIDUAL_TOL {
        return Err(Error::DcfNoConvergence {
            iterations: max_iterations,
            residual: gamma_residual.max(p_residual),
        });
    }

    let p_tx = 1.0 - (1.0 - gamma).powi(n as i32);
    let mean_idle_slots = 1.0 / p_tx - 1.0;
    let p_off = mean_idle_slots / (mean_idle_slots + params.mean_pkt_slots);
    Ok(WifiOccupancy {
        gamma,
        p_coll,
        p_tx,
        mean_idle_slots,
        p_off,
        p_on: 1.0 - p_off,
    })
}

/// WiFi packet transmission duration in whole slots.
///
/// The airtime `bytes * 8 / rate` is rounded to the nearest slot and one
/// extra slot of fixed overhead is added; this reproduces the duration set
/// {186, 94, 62, 47, 32, 24, 22, 19} for a 1500 B packet over the 802.11n
/// rate set at 9 us slots.
pub fn packet_duration_slots(pkt_bytes: f64, phy_rate_bps: f64, slot_seconds: f64) -> Result<u32> {
    if !(pkt_bytes > 0.0 && phy_rate_bps > 0.0 && slot_seconds > 0.0) {
        return Err(Error::domain("packet duration inputs must be positive"));
    }
    let slots = pkt_bytes * 8.0 / phy_rate_bps / slot_seconds;
    Ok(slots.round() as u32 + 1)
}

/// The duration set implied by [`WIFI_PHY_RATES_BPS`] for the fixed packet size.
pub fn packet_duration_set() -> Vec<u32> {
    WIFI_PHY_RATES_BPS
        .iter()
        .map(|&r| {
            packet_duration_slots(WIFI_PACKET_BYTES, r, WIFI_SLOT_SECONDS)
                .expect("constants are positive")
        })
        .collect()
}

/// Per-QSI idle probability draw, deterministic for a fixed (seed, index).
///
/// Draws are clamped to [0.01, 0.99] so the availability Bernoulli process
/// never degenerates; a zero-variance process returns `mu` unclamped (after
/// restricting to [0, 1]) so that always-busy and always-idle scenarios stay
/// expressible.
pub fn sample_qsi_p_off(process: &OccupancyProcess, qsi_index: usize) -> f64 {
    if process.sigma2 == 0.0 {
        return process.mu.clamp(0.0, 1.0);
    }
    let mut rng = stream(process.seed, StreamDomain::Occupancy, qsi_index as u64, 0);
    let normal = Normal::new(process.mu, process.sigma2.sqrt()).expect("sigma is finite");
    normal.sample(&mut rng).clamp(0.01, 0.99)
}

/// Mean packet duration for a QSI: a fixed value, or one drawn uniformly
/// from the 802.11n duration set.
pub fn qsi_mean_pkt_slots(fixed: Option<f64>, seed: u64, qsi_index: usize) -> f64 {
    match fixed {
        Some(v) => v,
        None => {
            let durations = packet_duration_set();
            let mut rng = stream(seed, StreamDomain::PacketDuration, qsi_index as u64, 0);
            let idx = rng.random_range(0..durations.len());
            f64::from(durations[idx])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sample_estimate_matches_ratios() {
        assert_eq!(estimate_p_off_from_samples(0, 100).unwrap(), 1.0);
        assert_eq!(estimate_p_off_from_samples(50, 50).unwrap(), 0.5);
        assert_eq!(estimate_p_off_from_samples(30, 70).unwrap(), 0.7);
    }

    #[test]
    fn sample_estimate_rejects_zero_samples() {
        assert!(estimate_p_off_from_samples(0, 0).is_err());
    }

    #[test]
    fn single_station_solution_is_closed_form() {
        // With n = 1 there is nobody to collide with, so p = 0 and
        // gamma = 2 / (W + 1).
        let params = WifiParams::new(1, 16, 6, 19.0).unwrap();
        let occ = solve_dcf_fixed_point(&params).unwrap();
        assert!((occ.gamma - 2.0 / 17.0).abs() < 1e-12);
        assert!(occ.p_coll.abs() < 1e-12);
        assert!((occ.mean_idle_slots - 7.5).abs() < 1e-9);
        assert!((occ.p_off - 7.5 / 26.5).abs() < 1e-9);
    }

    #[test]
    fn two_station_solution_matches_scalar_bisection_oracle() {
        // Frozen from an independent scalar bisection run with
        // W = 16, i = 6, E[P] = 19.
        let params = WifiParams::new(2, 16, 6, 19.0).unwrap();
        let occ = solve_dcf_fixed_point(&params).unwrap();
        assert!((occ.gamma - 0.104620632281969).abs() < 1e-9);
        assert!((occ.p_coll - 0.104620632281969).abs() < 1e-9);
        assert!((occ.p_off - 0.175453563870385).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_residuals_meet_tolerance() {
        for n in [1u32, 2, 3, 5, 10, 25, 50] {
            let params = WifiParams::new(n, 16, 6, 19.0).unwrap();
            let occ = solve_dcf_fixed_point(&params).unwrap();
            let g_back = super::gamma_of_p(occ.p_coll, 16, 6);
            assert!(
                (occ.gamma - g_back).abs() <= DCF_RESIDUAL_TOL,
                "gamma residual at n={n}"
            );
            let p_back = 1.0 - (1.0 - occ.gamma).powi(n as i32 - 1);
            assert!(
                (occ.p_coll - p_back).abs() <= DCF_RESIDUAL_TOL,
                "p residual at n={n}"
            );
            assert_eq!(occ.p_on + occ.p_off, 1.0);
            assert!((occ.p_tx - (1.0 - (1.0 - occ.gamma).powi(n as i32))).abs() < 1e-12);
            assert!((occ.mean_idle_slots - (1.0 / occ.p_tx - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn p_off_strictly_decreases_with_contention() {
        let mut last = f64::INFINITY;
        for n in 1..=50u32 {
            let params = WifiParams::new(n, 16, 6, 19.0).unwrap();
            let occ = solve_dcf_fixed_point(&params).unwrap();
            assert!(occ.p_off < last, "P_off not decreasing at n={n}");
            last = occ.p_off;
        }
    }

    #[test]
    fn packet_durations_match_published_slot_counts() {
        assert_eq!(packet_duration_slots(1500.0, 7.2e6, 9e-6).unwrap(), 186);
        assert_eq!(packet_duration_slots(1500.0, 72.2e6, 9e-6).unwrap(), 19);
        assert_eq!(packet_duration_slots(1500.0, 28.9e6, 9e-6).unwrap(), 47);
        assert_eq!(packet_duration_set(), vec![186, 94, 62, 47, 32, 24, 22, 19]);
    }

    #[test]
    fn packet_duration_rejects_nonpositive_inputs() {
        assert!(packet_duration_slots(0.0, 7.2e6, 9e-6).is_err());
        assert!(packet_duration_slots(1500.0, -1.0, 9e-6).is_err());
    }

    #[test]
    fn zero_variance_draw_returns_mean() {
        let process = OccupancyProcess {
            mu: 0.5,
            sigma2: 0.0,
            seed: 9,
        };
        for idx in [0usize, 3, 17] {
            assert_eq!(sample_qsi_p_off(&process, idx), 0.5);
        }
        let degenerate = OccupancyProcess {
            mu: 0.0,
            sigma2: 0.0,
            seed: 9,
        };
        assert_eq!(sample_qsi_p_off(&degenerate, 1), 0.0);
    }

    #[test]
    fn draws_are_seed_dependent_and_clamped() {
        let a = OccupancyProcess {
            mu: 0.5,
            sigma2: 0.1,
            seed: 1,
        };
        let b = OccupancyProcess {
            mu: 0.5,
            sigma2: 0.1,
            seed: 2,
        };
        let xa = sample_qsi_p_off(&a, 0);
        let xb = sample_qsi_p_off(&b, 0);
        assert_ne!(xa, xb);
        for idx in 0..500 {
            let x = sample_qsi_p_off(&a, idx);
            assert!((0.01..=0.99).contains(&x));
            // deterministic per (seed, index)
            assert_eq!(x, sample_qsi_p_off(&a, idx));
        }
    }

    #[test]
    fn draw_mean_approaches_mu() {
        let process = OccupancyProcess {
            mu: 0.5,
            sigma2: 0.01,
            seed: 4,
        };
        let n = 10_000;
        let mean: f64 = (0..n).map(|i| sample_qsi_p_off(&process, i)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    proptest! {
        #[test]
        fn sample_estimate_is_a_probability(n_busy in 0u64..1_000_000, n_idle in 0u64..1_000_000) {
            prop_assume!(n_busy + n_idle > 0);
            let p = estimate_p_off_from_samples(n_busy, n_idle).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn fixed_point_always_in_unit_interval(n in 1u32..40, w in 2u32..256, i in 0u32..8) {
            let params = WifiParams::new(n, w, i, 19.0).unwrap();
            let occ = solve_dcf_fixed_point(&params).unwrap();
            prop_assert!(occ.gamma > 0.0 && occ.gamma < 1.0);
            // At extreme contention (many stations, tiny fixed window) the
            // collision and busy probabilities round to 1 and p_off
            // underflows to 0; away from that corner all are interior.
            prop_assert!((0.0..=1.0).contains(&occ.p_coll));
            prop_assert!(occ.p_off >= 0.0 && occ.p_off < 1.0);
            if occ.p_tx < 1.0 {
                prop_assert!(occ.p_off > 0.0);
                prop_assert!(occ.p_coll < 1.0);
            }
            prop_assert_eq!(occ.p_on + occ.p_off, 1.0);
        }
    }
}
