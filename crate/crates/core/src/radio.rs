//! Link-level math: distance, path loss, noise and NOMA spectral efficiency.
//!
//! Convention for a NOMA pair: the *near* user has the larger path gain and
//! the smaller power share. It decodes the far user's signal first, cancels
//! it, then decodes its own without intra-pair interference. The far user
//! decodes directly, seeing the near user's power as interference.

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;

/// Distances below this are clamped so the log-distance model stays finite.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// Per-channel noise power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma2_w: f64,
}

impl NoiseModel {
    pub fn new(n0_dbm_hz: f64, bandwidth_hz: f64) -> Self {
        Self {
            sigma2_w: noise_power_w(n0_dbm_hz, bandwidth_hz),
        }
    }
}

/// Path gain of one station-user link on one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGain {
    pub station_id: usize,
    pub user_id: usize,
    pub channel: usize,
    pub gain: f64,
}

/// Euclidean distance, clamped below at [`MIN_DISTANCE_M`].
pub fn distance_m(a: Point3, b: Point3) -> f64 {
    let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
    d.max(MIN_DISTANCE_M)
}

/// `28.1 + 37.6 log10(d) + log10(fc / 2.5)` with `d` in meters and `fc` in GHz.
pub fn path_loss_db(d_m: f64, fc_ghz: f64) -> f64 {
    28.1 + 37.6 * d_m.log10() + (fc_ghz / 2.5).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear path gain `10^(-PL/10)`.
pub fn path_gain(d_m: f64, fc_ghz: f64) -> f64 {
    db_to_linear(-path_loss_db(d_m, fc_ghz))
}

/// Noise power over `bandwidth_hz` for a density given in dBm/Hz.
pub fn noise_power_w(n0_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    db_to_linear(n0_dbm_hz - 30.0) * bandwidth_hz
}

fn log2_1p(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

/// Far user: decodes its own signal with the near user's share as
/// interference, both received through the far user's own gain.
pub fn se_far(p_far: f64, h_far: f64, p_near: f64, sigma2: f64) -> f64 {
    log2_1p(p_far * h_far / (p_near * h_far + sigma2))
}

/// Near user after SIC: interference-free.
pub fn se_near(p_near: f64, h_near: f64, sigma2: f64) -> f64 {
    log2_1p(p_near * h_near / sigma2)
}

/// Single user alone on its channel.
pub fn se_oma(p: f64, h: f64, sigma2: f64) -> f64 {
    log2_1p(p * h / sigma2)
}

/// SINR of the far user's signal at the near user minus its SINR at the far
/// user. A pair supports SIC when this is at least `p_tol`.
pub fn sic_margin(p_near: f64, h_near: f64, p_far: f64, h_far: f64, sigma2: f64) -> f64 {
    let at_near = p_far * h_near / (p_near * h_near + sigma2);
    let at_far = p_far * h_far / (p_near * h_far + sigma2);
    at_near - at_far
}
