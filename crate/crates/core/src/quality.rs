//! Playback-buffer dynamics and segment quality selection.
//!
//! The buffer update is applied verbatim as a three-leg rule on the video
//! duration downloaded during a QSI. Note that the model treats the
//! downloaded duration as `S/R`, a download time; a fully delivered segment
//! must therefore contribute exactly the segment duration, which the engine
//! guarantees by passing `segment_duration * delivered / segment_bits`.
//! Implementations must not "repair" this conflation.

use crate::channel::{db_to_linear, ChannelConfig};
use crate::error::{Error, Result};

/// Segment length in seconds of playback.
pub const SEGMENT_SECONDS: f64 = 10.0;

/// Per-UE playback buffer state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BufferState {
    /// Seconds of playable video buffered, B(T).
    pub seconds_buffered: f64,
    /// Bits of the current segment not yet delivered.
    pub pending_segment_bits: f64,
    /// Whether playback is currently frozen.
    pub freeze_active: bool,
    /// Duration of the freeze in progress, seconds.
    pub freeze_elapsed: f64,
}

impl BufferState {
    /// Fresh state with a full initial buffer (the first segment is
    /// downloaded before playback starts).
    pub fn full() -> Self {
        Self {
            seconds_buffered: SEGMENT_SECONDS,
            pending_segment_bits: 0.0,
            freeze_active: false,
            freeze_elapsed: 0.0,
        }
    }
}

/// Ordered encoding-rate ladder for one video file.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoProfile {
    /// Strictly increasing encoding rates in bits/s.
    pub encoding_rates_bps: Vec<f64>,
    /// Segment duration in seconds.
    pub segment_seconds: f64,
}

impl VideoProfile {
    pub fn new(encoding_rates_bps: Vec<f64>) -> Result<Self> {
        if encoding_rates_bps.is_empty() {
            return Err(Error::domain(
                "video profile needs at least one encoding rate",
            ));
        }
        if !encoding_rates_bps.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain("encoding rates must be strictly increasing"));
        }
        if encoding_rates_bps[0] <= 0.0 {
            return Err(Error::domain("encoding rates must be positive"));
        }
        Ok(Self {
            encoding_rates_bps,
            segment_seconds: SEGMENT_SECONDS,
        })
    }

    /// The published six-level ladder: 1000..35000 Kbps.
    pub fn standard() -> Self {
        Self::new(vec![1.0e6, 2.5e6, 5.0e6, 8.0e6, 10.0e6, 35.0e6]).expect("static ladder is valid")
    }
}

/// Inputs for one allocation round: per-UE averages plus shared scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityInputs {
    /// Per-UE QSI-average licensed SNR in dB.
    pub snr_l_db: Vec<f64>,
    /// Per-UE QSI-average unlicensed SNR in dB.
    pub snr_u_db: Vec<f64>,
    /// Per-UE buffered seconds B(T).
    pub buffer_seconds: Vec<f64>,
    /// Idle probability of the unlicensed carrier for this QSI.
    pub p_off: f64,
    /// Buffer bias weight, >= 0, in bits/s per buffered second.
    pub alpha: f64,
    /// Carrier configuration (RB counts and bandwidth).
    pub channel: ChannelConfig,
}

impl UtilityInputs {
    pub fn num_ues(&self) -> usize {
        self.snr_l_db.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.snr_l_db.len();
        if k == 0 {
            return Err(Error::domain("allocation needs at least one UE"));
        }
        if self.snr_u_db.len() != k || self.buffer_seconds.len() != k {
            return Err(Error::domain("per-UE input lengths differ"));
        }
        if !(0.0..=1.0).contains(&self.p_off) {
            return Err(Error::domain("p_off must lie in [0, 1]"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::domain("alpha must be finite and >= 0"));
        }
        Ok(())
    }

    /// Full-carrier licensed rate coefficient for UE `k`:
    /// `M_L W log2(1 + snr_l)`.
    pub fn licensed_coefficient(&self, k: usize) -> f64 {
        self.channel.m_l as f64
            * self.channel.rb_bandwidth_hz
            * (1.0 + db_to_linear(self.snr_l_db[k])).log2()
    }

    /// Full-carrier unlicensed rate coefficient for UE `k`, weighted by the
    /// idle probability: `P_off M_U W log2(1 + snr_u)`.
    pub fn unlicensed_coefficient(&self, k: usize) -> f64 {
        self.p_off
            * self.channel.m_u as f64
            * self.channel.rb_bandwidth_hz
            * (1.0 + db_to_linear(self.snr_u_db[k])).log2()
    }
}

/// Three-leg buffer update on the downloaded video duration for the QSI.
pub fn update_buffer(state: &BufferState, downloaded_duration_s: f64) -> Result<BufferState> {
    if downloaded_duration_s < 0.0 {
        return Err(Error::domain("downloaded duration must be >= 0"));
    }
    let b = state.seconds_buffered;
    let next = if b == SEGMENT_SECONDS {
        downloaded_duration_s
    } else if b + downloaded_duration_s < SEGMENT_SECONDS {
        b + downloaded_duration_s
    } else {
        b + downloaded_duration_s - SEGMENT_SECONDS
    };
    Ok(BufferState {
        seconds_buffered: next,
        ..*state
    })
}

/// Largest encoding rate not exceeding `rate`; floors at the lowest level so
/// a segment is always requested even when the rate is below the ladder.
pub fn select_quality(rate_bps: f64, profile: &VideoProfile) -> f64 {
    let mut chosen = profile.encoding_rates_bps[0];
    for &level in &profile.encoding_rates_bps {
        if level <= rate_bps {
            chosen = level;
        } else {
            break;
        }
    }
    chosen
}

/// Segment size in bits for an encoding rate.
pub fn segment_bits(encoding_rate_bps: f64, profile: &VideoProfile) -> f64 {
    encoding_rate_bps * profile.segment_seconds
}

/// Achievable download rate for UE `ue` under resource fractions
/// `(x_l, x_u)`:
/// `x_L M_L W log2(1+snr_l) + P_off x_U M_U W log2(1+snr_u)`.
pub fn achievable_rate(x_l: f64, x_u: f64, inputs: &UtilityInputs, ue: usize) -> f64 {
    x_l * inputs.licensed_coefficient(ue) + x_u * inputs.unlicensed_coefficient(ue)
}
