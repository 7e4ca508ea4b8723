//! Scenario configuration, state container and seeded random streams.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::{Cluster, DbsStation};
use crate::geometry::Point3;
use crate::mobility::Vehicle;
use crate::{Error, Result};

/// Random stream type used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// Every tunable of a scenario.
///
/// Loaded from a flat JSON object whose keys are the field names. Keys with a
/// `#[serde(default)]` may be omitted; all others are required and unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Macro base station power budget, W.
    pub p_b_max: f64,
    /// Per-drone power budget, W.
    pub p_k_max: f64,
    pub num_vehicles: usize,
    /// Noise power spectral density, dBm/Hz.
    pub n0_dbm_hz: f64,
    /// Macro coverage radius, m.
    pub r_b: f64,
    /// Drone coverage radius, m.
    pub r_k: f64,
    pub fc_ghz: f64,
    pub num_channels: usize,
    #[serde(default = "defaults::channel_bandwidth_hz")]
    pub channel_bandwidth_hz: f64,
    /// DBSCAN neighborhood radius, m.
    pub epsilon_m: f64,
    pub min_points: usize,
    /// Largest admissible speed difference to the cluster seed, km/h.
    #[serde(default = "defaults::theta_kmh")]
    pub theta_kmh: f64,
    /// Power fraction of the far (weaker) user of a pair.
    #[serde(default = "defaults::alpha_f")]
    pub alpha_f: f64,
    /// Power fraction of the near (stronger) user of a pair.
    #[serde(default = "defaults::alpha_n")]
    pub alpha_n: f64,
    /// Minimum linear SINR difference for successful SIC.
    #[serde(default = "defaults::p_tol")]
    pub p_tol: f64,
    #[serde(default = "defaults::dbs_altitude_m")]
    pub dbs_altitude_m: f64,
    pub speed_min_kmh: f64,
    pub speed_max_kmh: f64,
    #[serde(default = "defaults::arena_side_m")]
    pub arena_side_m: f64,
    #[serde(default = "defaults::prediction_horizon_s")]
    pub prediction_horizon_s: f64,
    /// Grid size used to compare predicted positions, m.
    #[serde(default = "defaults::prediction_cell_m")]
    pub prediction_cell_m: f64,
    pub seed: u64,

    /// Macro antenna height, m. The macro site sits at the arena center.
    #[serde(default = "defaults::mbs_height_m")]
    pub mbs_height_m: f64,
    /// Number of congestion hotspots (intersections) in the arena.
    #[serde(default = "defaults::hotspot_count")]
    pub hotspot_count: usize,
    /// Traffic flows crossing at each hotspot.
    #[serde(default = "defaults::hotspot_flows")]
    pub hotspot_flows: usize,
    /// Share of vehicles queued at a hotspot. Zero gives a plain uniform
    /// random-waypoint population.
    #[serde(default = "defaults::hotspot_fraction")]
    pub hotspot_fraction: f64,
    /// Standard deviation of the jitter applied to queued positions, m.
    #[serde(default = "defaults::hotspot_spread_m")]
    pub hotspot_spread_m: f64,
    /// Length of the queue a flow forms behind its hotspot, m.
    #[serde(default = "defaults::hotspot_queue_m")]
    pub hotspot_queue_m: f64,
    /// Half-width of the speed band of one flow, km/h.
    #[serde(default = "defaults::hotspot_speed_spread_kmh")]
    pub hotspot_speed_spread_kmh: f64,
    /// Mobility steps simulated before the evaluated snapshot.
    #[serde(default)]
    pub warmup_steps: usize,
    #[serde(default = "defaults::step_dt_s")]
    pub step_dt_s: f64,
}

mod defaults {
    pub fn channel_bandwidth_hz() -> f64 {
        180_000.0
    }
    pub fn theta_kmh() -> f64 {
        10.0
    }
    pub fn alpha_f() -> f64 {
        0.8
    }
    pub fn alpha_n() -> f64 {
        0.2
    }
    pub fn p_tol() -> f64 {
        1.0
    }
    pub fn dbs_altitude_m() -> f64 {
        10.0
    }
    pub fn arena_side_m() -> f64 {
        1000.0
    }
    pub fn prediction_horizon_s() -> f64 {
        5.0
    }
    pub fn prediction_cell_m() -> f64 {
        50.0
    }
    pub fn mbs_height_m() -> f64 {
        25.0
    }
    pub fn hotspot_count() -> usize {
        2
    }
    pub fn hotspot_flows() -> usize {
        2
    }
    pub fn hotspot_fraction() -> f64 {
        0.8
    }
    pub fn hotspot_spread_m() -> f64 {
        0.5
    }
    pub fn hotspot_queue_m() -> f64 {
        8.0
    }
    pub fn hotspot_speed_spread_kmh() -> f64 {
        3.0
    }
    pub fn step_dt_s() -> f64 {
        1.0
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::standard()
    }
}

impl ScenarioConfig {
    /// Reference parameter set: 20 W macro, 2 W drones, 50 vehicles,
    /// -80 dBm/Hz noise, 500 m / 10 m coverage radii, 2.5 GHz carrier.
    ///
    /// 30 channels cover the worst case of one lone user per station: with
    /// clusters of at least five vehicles, 50 users never need more groups.
    pub fn standard() -> Self {
        Self {
            p_b_max: 20.0,
            p_k_max: 2.0,
            num_vehicles: 50,
            n0_dbm_hz: -80.0,
            r_b: 500.0,
            r_k: 10.0,
            fc_ghz: 2.5,
            num_channels: 30,
            channel_bandwidth_hz: defaults::channel_bandwidth_hz(),
            epsilon_m: 4.0,
            min_points: 6,
            theta_kmh: defaults::theta_kmh(),
            alpha_f: defaults::alpha_f(),
            alpha_n: defaults::alpha_n(),
            p_tol: defaults::p_tol(),
            dbs_altitude_m: defaults::dbs_altitude_m(),
            speed_min_kmh: 20.0,
            speed_max_kmh: 50.0,
            arena_side_m: defaults::arena_side_m(),
            prediction_horizon_s: defaults::prediction_horizon_s(),
            prediction_cell_m: defaults::prediction_cell_m(),
            seed: 0,
            mbs_height_m: defaults::mbs_height_m(),
            hotspot_count: defaults::hotspot_count(),
            hotspot_flows: defaults::hotspot_flows(),
            hotspot_fraction: defaults::hotspot_fraction(),
            hotspot_spread_m: defaults::hotspot_spread_m(),
            hotspot_queue_m: defaults::hotspot_queue_m(),
            hotspot_speed_spread_kmh: defaults::hotspot_speed_spread_kmh(),
            warmup_steps: 0,
            step_dt_s: defaults::step_dt_s(),
        }
    }

    /// Parses and validates a JSON config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// Noise power on one channel, W.
    pub fn sigma2_w(&self) -> f64 {
        crate::radio::noise_power_w(self.n0_dbm_hz, self.channel_bandwidth_hz)
    }

    pub fn validate(&self) -> Result<()> {
        fn invalid(key: &'static str, value: impl ToString, rule: &str) -> Error {
            Error::InvalidConfig {
                key,
                value: value.to_string(),
                rule: rule.to_string(),
            }
        }

        let positive = [
            ("p_b_max", self.p_b_max),
            ("p_k_max", self.p_k_max),
            ("r_b", self.r_b),
            ("r_k", self.r_k),
            ("fc_ghz", self.fc_ghz),
            ("channel_bandwidth_hz", self.channel_bandwidth_hz),
            ("epsilon_m", self.epsilon_m),
            ("theta_kmh", self.theta_kmh),
            ("alpha_f", self.alpha_f),
            ("alpha_n", self.alpha_n),
            ("dbs_altitude_m", self.dbs_altitude_m),
            ("speed_min_kmh", self.speed_min_kmh),
            ("speed_max_kmh", self.speed_max_kmh),
            ("arena_side_m", self.arena_side_m),
            ("prediction_horizon_s", self.prediction_horizon_s),
            ("prediction_cell_m", self.prediction_cell_m),
            ("mbs_height_m", self.mbs_height_m),
            ("hotspot_spread_m", self.hotspot_spread_m),
            ("step_dt_s", self.step_dt_s),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(key, value, "must be finite and strictly positive"));
            }
        }
        if !self.n0_dbm_hz.is_finite() {
            return Err(invalid("n0_dbm_hz", self.n0_dbm_hz, "must be finite"));
        }
        if !(self.p_tol.is_finite() && self.p_tol >= 0.0) {
            return Err(invalid(
                "p_tol",
                self.p_tol,
                "must be finite and non-negative",
            ));
        }
        if !(self.hotspot_queue_m.is_finite() && self.hotspot_queue_m >= 0.0) {
            return Err(invalid(
                "hotspot_queue_m",
                self.hotspot_queue_m,
                "must be finite and non-negative",
            ));
        }
        if !(self.hotspot_speed_spread_kmh.is_finite() && self.hotspot_speed_spread_kmh >= 0.0) {
            return Err(invalid(
                "hotspot_speed_spread_kmh",
                self.hotspot_speed_spread_kmh,
                "must be finite and non-negative",
            ));
        }
        if !(0.0..=1.0).contains(&self.hotspot_fraction) {
            return Err(invalid(
                "hotspot_fraction",
                self.hotspot_fraction,
                "must lie in [0, 1]",
            ));
        }
        let counts = [
            ("num_vehicles", self.num_vehicles),
            ("num_channels", self.num_channels),
            ("min_points", self.min_points),
            ("hotspot_count", self.hotspot_count),
            ("hotspot_flows", self.hotspot_flows),
        ];
        for (key, value) in counts {
            if value == 0 {
                return Err(invalid(key, value, "must be at least 1"));
            }
        }
        if self.alpha_f <= self.alpha_n {
            return Err(invalid(
                "alpha_f",
                self.alpha_f,
                "alpha_f must exceed alpha_n",
            ));
        }
        if (self.alpha_f + self.alpha_n - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "alpha_n",
                self.alpha_n,
                "alpha_f + alpha_n must equal 1",
            ));
        }
        if self.speed_min_kmh > self.speed_max_kmh {
            return Err(invalid(
                "speed_min_kmh",
                self.speed_min_kmh,
                "speed_min_kmh must not exceed speed_max_kmh",
            ));
        }
        if self.r_k > self.r_b {
            return Err(invalid("r_k", self.r_k, "r_k must not exceed r_b"));
        }
        Ok(())
    }

    /// Position of the macro base station antenna.
    pub fn mbs_position(&self) -> Point3 {
        let half = self.arena_side_m / 2.0;
        Point3::new(half, half, self.mbs_height_m)
    }
}

/// Deterministic random stream for a `(seed, label)` pair.
///
/// Streams with different labels are derived from disjoint key material, so
/// the mobility stream of a run does not shift when another subsystem draws
/// more or fewer numbers.
pub fn make_rng(seed: u64, stream_label: &str) -> SimRng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(stream_label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    SimRng::from_seed(key)
}

/// Network snapshot: vehicles, clusters, drone and macro stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioState {
    pub vehicles: Vec<Vehicle>,
    pub clusters: Vec<Cluster>,
    pub dbs_list: Vec<DbsStation>,
    /// Vehicles outside every cluster.
    pub mbs_users: BTreeSet<usize>,
    pub mbs_position: Point3,
    pub time_s: f64,
}

impl ScenarioState {
    /// State with every vehicle attached to the macro cell.
    pub fn macro_only(vehicles: Vec<Vehicle>, config: &ScenarioConfig) -> Self {
        let mbs_users = vehicles.iter().map(|v| v.id).collect();
        Self {
            vehicles,
            clusters: Vec::new(),
            dbs_list: Vec::new(),
            mbs_users,
            mbs_position: config.mbs_position(),
            time_s: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(rng: &mut SimRng, n: usize) -> Vec<u64> {
        (0..n).map(|_| rng.random()).collect()
    }

    #[test]
    fn standard_round_trips_through_json() {
        let config = ScenarioConfig::standard();
        let loaded = ScenarioConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(loaded, config);
        assert_eq!(loaded.p_b_max, 20.0);
        assert_eq!(loaded.p_k_max, 2.0);
        assert_eq!(loaded.num_vehicles, 50);
        assert_eq!(loaded.r_b, 500.0);
        assert_eq!(loaded.r_k, 10.0);
        assert_eq!(loaded.fc_ghz, 2.5);
    }

    #[test]
    fn equal_alphas_rejected() {
        let mut config = ScenarioConfig::standard();
        config.alpha_f = 0.5;
        config.alpha_n = 0.5;
        let err = ScenarioConfig::from_json(&config.to_json()).unwrap_err();
        assert!(
            err.to_string().contains("alpha_f must exceed alpha_n"),
            "{err}"
        );
    }

    #[test]
    fn missing_num_channels_is_reported() {
        let mut value: serde_json::Value =
            serde_json::from_str(&ScenarioConfig::standard().to_json()).unwrap();
        value.as_object_mut().unwrap().remove("num_channels");
        let err = ScenarioConfig::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("num_channels"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let mut value: serde_json::Value =
            serde_json::from_str(&ScenarioConfig::standard().to_json()).unwrap();
        value["warp_factor"] = 9.into();
        assert!(ScenarioConfig::from_json(&value.to_string()).is_err());
    }

    #[test]
    fn defaults_fill_optional_keys() {
        let text = r#"{
            "p_b_max": 20, "p_k_max": 2, "num_vehicles": 50, "n0_dbm_hz": -80,
            "r_b": 500, "r_k": 10, "fc_ghz": 2.5, "num_channels": 25,
            "epsilon_m": 4, "min_points": 6, "speed_min_kmh": 20,
            "speed_max_kmh": 50, "seed": 7
        }"#;
        let config = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(config.alpha_f, 0.8);
        assert_eq!(config.alpha_n, 0.2);
        assert_eq!(config.p_tol, 1.0);
        assert_eq!(config.theta_kmh, 10.0);
        assert_eq!(config.channel_bandwidth_hz, 180_000.0);
        assert_eq!(config.dbs_altitude_m, 10.0);
        assert_eq!(config.seed, 7);
    }

    #[test]
    fn invariant_violations_name_the_key() {
        let mut config = ScenarioConfig::standard();
        config.r_k = 600.0;
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("r_k"));

        let mut config = ScenarioConfig::standard();
        config.speed_min_kmh = 60.0;
        assert!(config.validate().is_err());

        let mut config = ScenarioConfig::standard();
        config.alpha_f = 0.7;
        assert!(config.validate().is_err());
    }

    #[test]
    fn rng_is_deterministic_per_seed_and_label() {
        let a = draws(&mut make_rng(42, "mobility"), 100);
        let b = draws(&mut make_rng(42, "mobility"), 100);
        assert_eq!(a, b);
        let c = draws(&mut make_rng(43, "mobility"), 1);
        assert_ne!(a[0], c[0]);
        let d = draws(&mut make_rng(42, "channel"), 100);
        assert_ne!(a[0], d[0]);
        assert_ne!(a, d);
    }
}
