//! Large-scale and per-SI channel model: free-space path loss, log-normal
//! shadowing, Rayleigh fading applied as a unit-mean exponential power gain,
//! and the Shannon-capacity rate map used everywhere in the simulator.
//!
//! All rate equations use log base 2; SNR averaging over a QSI is done on
//! the dB values.

use crate::error::{Error, Result};

/// Logarithm base of the rate equations (Shannon capacity convention).
pub const RATE_LOG_BASE: f64 = 2.0;

/// Channel and carrier configuration; defaults follow the standard system
/// simulation setup (20 MHz carriers, 2.1 / 5.8 GHz, 43 dBm, -80 dBm noise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    /// eNodeB transmit power in dBm.
    pub tx_power_dbm: f64,
    /// Noise floor in dBm.
    pub noise_dbm: f64,
    /// Licensed carrier center frequency in Hz.
    pub f_l_hz: f64,
    /// Unlicensed carrier center frequency in Hz.
    pub f_u_hz: f64,
    /// Log-normal shadowing variance in dB^2.
    pub shadow_var: f64,
    /// Resource-block bandwidth in Hz.
    pub rb_bandwidth_hz: f64,
    /// Resource blocks on the licensed carrier.
    pub m_l: usize,
    /// Resource blocks on the unlicensed carrier.
    pub m_u: usize,
    /// Apply per-SI Rayleigh fading on top of the large-scale SNR.
    pub rayleigh_fading: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 43.0,
            noise_dbm: -80.0,
            f_l_hz: 2.1e9,
            f_u_hz: 5.8e9,
            shadow_var: 3.0,
            rb_bandwidth_hz: 180e3,
            m_l: 100,
            m_u: 100,
            rayleigh_fading: true,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_l_hz > 0.0 && self.f_u_hz > 0.0) {
            return Err(Error::domain("carrier frequencies must be positive"));
        }
        if self.rb_bandwidth_hz <= 0.0 {
            return Err(Error::domain("rb_bandwidth_hz must be positive"));
        }
        if self.m_l < 1 || self.m_u < 1 {
            return Err(Error::domain("RB counts must be >= 1"));
        }
        if self.shadow_var < 0.0 {
            return Err(Error::domain("shadow_var must be >= 0"));
        }
        Ok(())
    }
}

/// UE position relative to the eNodeB at the cell center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePlacement {
    /// Coordinates in meters within the cell square.
    pub position: (f64, f64),
    /// Distance from the eNodeB in meters, > 0.
    pub distance: f64,
}

/// Per-carrier SNR pair in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPair {
    pub snr_l_db: f64,
    pub snr_u_db: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Free-space path loss in dB: `20 (log10 d + log10 f - 7.378)` with d in
/// meters and f in Hz.
pub fn fspl_db(distance_m: f64, freq_hz: f64) -> Result<f64> {
    if distance_m <= 0.0 || freq_hz <= 0.0 {
        return Err(Error::domain(
            "fspl_db requires positive distance and frequency",
        ));
    }
    Ok(20.0 * (distance_m.log10() + freq_hz.log10() - 7.378))
}

/// Large-scale SNR on both carriers: `P_tx - FSPL - X_s - N0`, with one
/// shadowing draw shared by the two carriers.
pub fn large_scale_snr(
    config: &ChannelConfig,
    placement: &UePlacement,
    shadow_draw_db: f64,
) -> Result<SnrPair> {
    let fspl_l = fspl_db(placement.distance, config.f_l_hz)?;
    let fspl_u = fspl_db(placement.distance, config.f_u_hz)?;
    Ok(SnrPair {
        snr_l_db: config.tx_power_dbm - fspl_l - shadow_draw_db - config.noise_dbm,
        snr_u_db: config.tx_power_dbm - fspl_u - shadow_draw_db - config.noise_dbm,
    })
}

/// Applies a fading power gain to an average SNR. Gains are expected to be
/// unit-mean exponential draws (Rayleigh amplitude).
pub fn per_si_snr(avg_snr_db: f64, fading_gain: f64) -> f64 {
    avg_snr_db + 10.0 * fading_gain.log10()
}

/// Shannon rate for one resource block: `W log2(1 + snr)`.
pub fn rate_per_rb(snr_db: f64, rb_bandwidth_hz: f64) -> f64 {
    rb_bandwidth_hz * (1.0 + db_to_linear(snr_db)).log2()
}

/// QSI-average SNR: arithmetic mean of the per-SI dB values.
pub fn qsi_average_snr(per_si_snrs_db: &[f64]) -> Result<f64> {
    if per_si_snrs_db.is_empty() {
        return Err(Error::domain("qsi_average_snr needs a non-empty sequence"));
    }
    Ok(per_si_snrs_db.iter().sum::<f64>() / per_si_snrs_db.len() as f64)
}

/// Unit-mean exponential power gain (Rayleigh amplitude fading).
pub fn unit_mean_exp_gain<R: rand::Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    // Frozen from an independent evaluation of the formula.
    const FSPL_1KM_2G1: f64 = 98.88438589467839;
    const FSPL_1KM_5G8: f64 = 107.70855987125873;

    #[test]
    fn fspl_matches_frozen_values() {
        assert!((fspl_db(1000.0, 2.1e9).unwrap() - FSPL_1KM_2G1).abs() < 1e-9);
        assert!((fspl_db(1000.0, 5.8e9).unwrap() - FSPL_1KM_5G8).abs() < 1e-9);
    }

    #[test]
    fn fspl_gains_20db_per_frequency_decade() {
        let base = fspl_db(1.0, 1e9).unwrap();
        let up = fspl_db(1.0, 1e10).unwrap();
        assert!((up - base - 20.0).abs() < 1e-12);
    }

    #[test]
    fn fspl_rejects_nonpositive_inputs() {
        assert!(fspl_db(0.0, 1e9).is_err());
        assert!(fspl_db(100.0, -2.0).is_err());
    }

    #[test]
    fn fspl_agrees_with_independent_evaluation_on_grid() {
        // Second route through natural logs, coded independently of fspl_db.
        let alt = |d: f64, f: f64| 20.0 / std::f64::consts::LN_10 * (d.ln() + f.ln()) - 147.56;
        for di in 0..10 {
            for fi in 0..10 {
                let d = 10.0 + 220.0 * di as f64;
                let f = 0.7e9 + 0.6e9 * fi as f64;
                let a = fspl_db(d, f).unwrap();
                let b = alt(d, f);
                assert!((a - b).abs() < 1e-9, "mismatch at d={d} f={f}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn large_scale_snr_matches_default_setup_arithmetic() {
        let config = ChannelConfig::default();
        let placement = UePlacement {
            position: (1000.0, 0.0),
            distance: 1000.0,
        };
        let snr = large_scale_snr(&config, &placement, 0.0).unwrap();
        assert!((snr.snr_l_db - (43.0 - FSPL_1KM_2G1 + 80.0)).abs() < 1e-9);
        assert!((snr.snr_u_db - (43.0 - FSPL_1KM_5G8 + 80.0)).abs() < 1e-9);
        // ~24.12 dB licensed, ~15.29 dB unlicensed
        assert!((snr.snr_l_db - 24.1156141053).abs() < 1e-6);
        assert!((snr.snr_u_db - 15.2914401287).abs() < 1e-6);
    }

    #[test]
    fn shadowing_shifts_both_carriers_equally() {
        let config = ChannelConfig::default();
        let placement = UePlacement {
            position: (500.0, 0.0),
            distance: 500.0,
        };
        let clear = large_scale_snr(&config, &placement, 0.0).unwrap();
        let shadowed = large_scale_snr(&config, &placement, 3.0).unwrap();
        assert!((clear.snr_l_db - shadowed.snr_l_db - 3.0).abs() < 1e-12);
        assert!((clear.snr_u_db - shadowed.snr_u_db - 3.0).abs() < 1e-12);
    }

    #[test]
    fn per_si_snr_identities() {
        assert_eq!(per_si_snr(20.0, 1.0), 20.0);
        assert!((per_si_snr(20.0, 0.1) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn unit_mean_fading_preserves_mean_linear_snr() {
        let mut rng = crate::rng::stream(11, crate::rng::StreamDomain::FadingLicensed, 0, 0);
        let avg_db = 20.0;
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let gain = unit_mean_exp_gain(&mut rng);
            acc += db_to_linear(per_si_snr(avg_db, gain));
        }
        let mean = acc / n as f64;
        let expected = db_to_linear(avg_db);
        assert!(
            (mean - expected).abs() / expected < 0.02,
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn rate_matches_frozen_value_and_limits() {
        // Frozen from an independent calculation of 180e3 * log2(1 + 10^2.412).
        let rate = rate_per_rb(24.12, 180e3);
        assert!((rate - 1_443_252.0098908236).abs() / 1.443e6 < 1e-9);
        assert_eq!(rate_per_rb(f64::NEG_INFINITY, 180e3), 0.0);
    }

    #[test]
    fn qsi_average_examples() {
        assert_eq!(qsi_average_snr(&[7.5; 40]).unwrap(), 7.5);
        assert_eq!(qsi_average_snr(&[10.0, 20.0]).unwrap(), 15.0);
        assert!(qsi_average_snr(&[]).is_err());
    }

    #[test]
    fn qsi_average_concentrates_around_mean() {
        let mut rng = crate::rng::stream(3, crate::rng::StreamDomain::Shadowing, 1, 0);
        let draws: Vec<f64> = (0..1000)
            .map(|_| 20.0 + 4.0 * (rng.random::<f64>() - 0.5))
            .collect();
        let avg = qsi_average_snr(&draws).unwrap();
        assert!((avg - 20.0).abs() < 0.5);
    }

    proptest! {
        #[test]
        fn rate_is_increasing_in_snr_and_linear_in_bandwidth(
            snr in -30.0..60.0f64, delta in 0.1..20.0f64, w in 1e3..1e6f64
        ) {
            prop_assert!(rate_per_rb(snr + delta, w) > rate_per_rb(snr, w));
            let doubled = rate_per_rb(snr, 2.0 * w);
            prop_assert!((doubled - 2.0 * rate_per_rb(snr, w)).abs() < 1e-6 * doubled.max(1.0));
        }

        #[test]
        fn licensed_snr_dominates_when_licensed_frequency_lower(
            d in 10.0..2000.0f64, xs in -6.0..6.0f64
        ) {
            let config = ChannelConfig::default();
            let placement = UePlacement { position: (d, 0.0), distance: d };
            let snr = large_scale_snr(&config, &placement, xs).unwrap();
            prop_assert!(snr.snr_l_db > snr.snr_u_db);
        }

        #[test]
        fn large_scale_snr_decreases_with_distance(d in 10.0..1999.0f64) {
            let config = ChannelConfig::default();
            let near = large_scale_snr(&config, &UePlacement { position: (d, 0.0), distance: d }, 0.0).unwrap();
            let far = large_scale_snr(&config, &UePlacement { position: (d + 1.0, 0.0), distance: d + 1.0 }, 0.0).unwrap();
            prop_assert!(far.snr_l_db < near.snr_l_db);
        }
    }
}
