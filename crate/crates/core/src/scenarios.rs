//! Scenario configuration, named presets and model simplification switches.
//!
//! A [`ScenarioConfig`] is plain data and round-trips through TOML:
//!
//! ```
//! use gbsm::scenarios::{preset, PresetName, ScenarioConfig};
//! let cfg = preset(PresetName::V2v2d);
//! let text = cfg.to_toml().unwrap();
//! assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg);
//! ```

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clusters::{AngleDist, AngleStats, DistanceDist, EvolutionParams, RayCount};
use crate::error::{invalid, GbsmError, Result};
use crate::geometry::{AntennaArray, PatternKind, Vector3};
use crate::SPEED_OF_LIGHT;

/// Layout and motion of one antenna array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub elements: usize,
    /// Element spacing of the uniform linear array, m. Half a wavelength
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Explicit element offsets from the array center, m. Overrides the
    /// linear layout when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<Vector3>>,
    pub broadside_azimuth: f64,
    pub broadside_elevation: f64,
    /// `(alpha, beta, gamma)` of the local coordinate system, rad.
    pub rotation: [f64; 3],
    pub velocity: Vector3,
    #[serde(default)]
    pub pattern: PatternKind,
}

impl ArrayConfig {
    fn linear(elements: usize, broadside: (f64, f64), velocity: Vector3) -> Self {
        Self {
            elements,
            spacing: None,
            offsets: None,
            broadside_azimuth: broadside.0,
            broadside_elevation: broadside.1,
            rotation: [PI / 15.0; 3],
            velocity,
            pattern: PatternKind::Omnidirectional,
        }
    }

    pub fn build(&self, center: Vector3, wavelength: f64) -> Result<AntennaArray> {
        let offsets = match &self.offsets {
            Some(o) => o.clone(),
            None => {
                let spacing = self.spacing.unwrap_or(wavelength / 2.0);
                AntennaArray::linear_offsets(self.elements, spacing, self.broadside_azimuth)
            }
        };
        AntennaArray::new(
            center,
            offsets,
            self.broadside_azimuth,
            self.broadside_elevation,
            self.rotation,
            self.velocity,
            self.pattern.clone(),
        )
    }

    fn element_count(&self) -> usize {
        self.offsets.as_ref().map_or(self.elements, Vec::len)
    }
}

/// Knobs used by the statistics pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Delay bin width for PDP correlation, s.
    pub delay_resolution: f64,
    /// PDP correlation threshold defining the stationary interval.
    pub stationarity_threshold: f64,
    /// Frequency correlation level defining the coherence bandwidth.
    pub coherence_level: f64,
    /// Largest frequency separation searched for the coherence bandwidth, Hz.
    pub max_frequency_lag: f64,
    /// Number of frequency lag grid points.
    pub frequency_points: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            delay_resolution: 5e-9,
            stationarity_threshold: 0.8,
            coherence_level: 0.9,
            max_frequency_lag: 5e6,
            frequency_points: 1001,
        }
    }
}

/// Complete description of a simulated link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    /// Carrier frequency, Hz.
    pub carrier_frequency: f64,
    /// Initial transmitter to receiver center distance, m.
    pub distance: f64,
    /// Force every elevation to zero.
    pub planar: bool,
    pub rx: ArrayConfig,
    pub tx: ArrayConfig,
    pub evolution: EvolutionParams,
    pub angles: AngleStats,
    /// Distance from the receive array center to the last bounce.
    pub rx_cluster_distance: DistanceDist,
    /// Distance from the transmit array center to the first bounce.
    pub tx_cluster_distance: DistanceDist,
    /// Rician factor, linear.
    pub rician_k: f64,
    /// Cross-polarization power ratio, linear.
    pub cross_polarization: f64,
    /// Cluster birth/death along the array axis.
    pub array_evolution: bool,
    /// Start every ray with the element-level propagation phase
    /// `-2 pi d / lambda` instead of zero.
    pub spherical_phase: bool,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| GbsmError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| GbsmError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_frequency > 0.0) {
            return Err(invalid("carrier_frequency", "must be > 0"));
        }
        if !(self.distance >= 0.0) {
            return Err(invalid("distance", "must be >= 0"));
        }
        if self.rx.element_count() == 0 || self.tx.element_count() == 0 {
            return Err(invalid("elements", "each array needs at least one element"));
        }
        for d in [&self.rx_cluster_distance, &self.tx_cluster_distance] {
            if !(d.mean > 0.0) || !(d.std >= 0.0) {
                return Err(invalid("cluster_distance", "mean must be > 0 and std >= 0"));
            }
        }
        if !(self.rician_k >= 0.0) {
            return Err(invalid("rician_k", "must be >= 0"));
        }
        if !(self.cross_polarization >= 0.0) {
            return Err(invalid("cross_polarization", "must be >= 0"));
        }
        if !(self.dt > 0.0) || !(self.duration > 0.0) {
            return Err(invalid("dt", "duration and dt must be > 0"));
        }
        let a = &self.analysis;
        if !(a.delay_resolution > 0.0) {
            return Err(invalid("delay_resolution", "must be > 0"));
        }
        if a.frequency_points < 2 || !(a.max_frequency_lag > 0.0) {
            return Err(invalid("frequency_points", "need >= 2 points over a positive span"));
        }
        self.evolution.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    MassiveMimo3d,
    Hst3d,
    V2v2d,
    Mmwave3d,
    MmwaveMassive2d,
    /// Small static-environment link used for the per-cluster ACF check.
    ConventionalMimo3d,
}

impl PresetName {
    pub const ALL: [PresetName; 6] = [
        PresetName::MassiveMimo3d,
        PresetName::Hst3d,
        PresetName::V2v2d,
        PresetName::Mmwave3d,
        PresetName::MmwaveMassive2d,
        PresetName::ConventionalMimo3d,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::MassiveMimo3d => "massive_mimo_3d",
            PresetName::Hst3d => "hst_3d",
            PresetName::V2v2d => "v2v_2d",
            PresetName::Mmwave3d => "mmwave_3d",
            PresetName::MmwaveMassive2d => "mmwave_massive_2d",
            PresetName::ConventionalMimo3d => "conventional_mimo_3d",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = GbsmError;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| GbsmError::UnknownPreset(s.to_string()))
    }
}

fn outdoor_evolution() -> EvolutionParams {
    EvolutionParams {
        generation_rate: 80.0,
        recombination_rate: 4.0,
        moving_fraction: 0.3,
        rx_cluster_speed: 0.0,
        tx_cluster_speed: 0.0,
        array_correlation_distance: 30.0,
        space_correlation_distance: 100.0,
        virtual_link_coherence: 7.0,
        delay_scalar: 2.3,
        log_delay_spread_mean: -6.63,
        log_delay_spread_std: 0.32,
        ray_count: RayCount::Fixed(20),
        mean_ray_delay: 0.0,
        ray_angle_offset_std: 0.017,
        shadowing_std_db: 3.0,
        fade_duration: 1e-3,
        power_exponent: 2.0,
    }
}

fn indoor_evolution() -> EvolutionParams {
    EvolutionParams {
        delay_scalar: 2.4,
        log_delay_spread_mean: -7.60,
        log_delay_spread_std: 0.19,
        ray_count: RayCount::Poisson(15.0),
        mean_ray_delay: 3e-9,
        ..outdoor_evolution()
    }
}

fn angles(aoa_std: (f64, f64), aod_std: (f64, f64), rx: (f64, f64), tx: (f64, f64)) -> AngleStats {
    AngleStats {
        arrival_azimuth: AngleDist { mean: rx.0, std: aoa_std.0 },
        arrival_elevation: AngleDist { mean: rx.1, std: aoa_std.1 },
        departure_azimuth: AngleDist { mean: tx.0, std: aod_std.0 },
        departure_elevation: AngleDist { mean: tx.1, std: aod_std.1 },
    }
}

const RX_BROADSIDE: (f64, f64) = (FRAC_PI_4, FRAC_PI_4);
const TX_BROADSIDE: (f64, f64) = (FRAC_PI_3, FRAC_PI_4);

fn base(name: &str, fc: f64, distance: f64, m_r: usize, m_t: usize) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        carrier_frequency: fc,
        distance,
        planar: false,
        rx: ArrayConfig::linear(m_r, RX_BROADSIDE, Vector3::ZERO),
        tx: ArrayConfig::linear(m_t, TX_BROADSIDE, Vector3::ZERO),
        evolution: outdoor_evolution(),
        angles: angles((0.90, 0.18), (0.54, 0.11), RX_BROADSIDE, TX_BROADSIDE),
        rx_cluster_distance: DistanceDist { mean: 25.0, std: 15.0 },
        tx_cluster_distance: DistanceDist { mean: 30.0, std: 10.0 },
        rician_k: 0.0,
        cross_polarization: 0.0,
        array_evolution: true,
        spherical_phase: true,
        duration: 1.0,
        dt: 1e-3,
        seed: 1,
        analysis: AnalysisConfig::default(),
    }
}

/// Built-in parameterization of a named scenario.
pub fn preset(name: PresetName) -> ScenarioConfig {
    let mut c;
    match name {
        PresetName::MassiveMimo3d => {
            c = base(name.as_str(), 2.6e9, 200.0, 32, 32);
            c.angles.arrival_azimuth.std = 1.15;
            c.evolution.array_correlation_distance = 30.0;
            c.evolution.virtual_link_coherence = 30.0;
            c.cross_polarization = 10f64.powf(-0.8);
            c.tx.pattern = PatternKind::HalfWaveDipole;
        }
        PresetName::Hst3d => {
            c = base(name.as_str(), 932e6, 200.0, 2, 2);
            c.rx.velocity = Vector3::new(0.0, 60.0, 0.0);
            c.evolution.rx_cluster_speed = 0.5;
            c.evolution.tx_cluster_speed = 0.5;
            c.evolution.array_correlation_distance = 50.0;
            c.evolution.virtual_link_coherence = 7.0;
            // PDP correlation on a 100 MHz sounding grid
            c.analysis.delay_resolution = 10e-9;
        }
        PresetName::V2v2d => {
            c = base(name.as_str(), 5.9e9, 400.0, 2, 2);
            c.rx.velocity = Vector3::new(0.0, 25.0, 0.0);
            c.tx.velocity = Vector3::new(0.0, 25.0, 0.0);
            c.angles = angles((0.91, 0.0), (0.53, 0.0), RX_BROADSIDE, TX_BROADSIDE);
            c.angles.departure_azimuth.mean = 1.04;
            c.evolution.rx_cluster_speed = 0.5;
            c.evolution.tx_cluster_speed = 0.5;
            c.evolution.array_correlation_distance = 30.0;
            c.evolution.space_correlation_distance = 10.0;
            c.evolution.virtual_link_coherence = 5.0;
            c = apply_simplification(&c, Simplification::Planar2d);
        }
        PresetName::Mmwave3d => {
            c = base(name.as_str(), 58e9, 6.0, 2, 2);
            c.evolution = indoor_evolution();
            c.angles = angles((0.91, 0.18), (0.53, 0.11), RX_BROADSIDE, TX_BROADSIDE);
            c.angles.departure_azimuth.mean = 1.04;
            c.rx_cluster_distance = DistanceDist { mean: 5.0, std: 3.0 };
            c.tx_cluster_distance = DistanceDist { mean: 5.0, std: 3.0 };
        }
        PresetName::MmwaveMassive2d => {
            c = preset(PresetName::Mmwave3d);
            c.name = name.as_str().to_string();
            c.rx.elements = 32;
            c.tx.elements = 2;
            c = apply_simplification(&c, Simplification::Planar2d);
        }
        PresetName::ConventionalMimo3d => {
            c = base(name.as_str(), 2e9, 200.0, 2, 2);
            c.rx.velocity = Vector3::new(0.0, 5.0, 0.0);
            c.evolution.array_correlation_distance = 50.0;
            c.evolution.ray_count = RayCount::Fixed(81);
            c.duration = 0.1;
        }
    }
    c
}

/// Model reductions obtained purely by parameter choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Simplification {
    /// Small arrays, where array-axis effects become negligible.
    ConventionalMimo,
    /// Static transmitter.
    F2m,
    /// Zero relative ray delays: each cluster is a single delay tap.
    ScmLike,
    /// Every elevation forced to zero.
    Planar2d,
}

/// Element count used by [`Simplification::ConventionalMimo`].
pub const CONVENTIONAL_ELEMENTS: usize = 2;

pub fn apply_simplification(config: &ScenarioConfig, switch: Simplification) -> ScenarioConfig {
    let mut c = config.clone();
    match switch {
        Simplification::ConventionalMimo => {
            for a in [&mut c.rx, &mut c.tx] {
                a.elements = a.elements.min(CONVENTIONAL_ELEMENTS);
                if let Some(o) = &mut a.offsets {
                    o.truncate(CONVENTIONAL_ELEMENTS);
                }
            }
        }
        Simplification::F2m => c.tx.velocity = Vector3::ZERO,
        Simplification::ScmLike => c.evolution.mean_ray_delay = 0.0,
        Simplification::Planar2d => {
            c.planar = true;
            c.rx.broadside_elevation = 0.0;
            c.tx.broadside_elevation = 0.0;
            for d in [&mut c.angles.arrival_elevation, &mut c.angles.departure_elevation] {
                d.mean = 0.0;
                d.std = 0.0;
            }
            for a in [&mut c.rx, &mut c.tx] {
                a.velocity.z = 0.0;
                if let Some(o) = &mut a.offsets {
                    o.iter_mut().for_each(|v| v.z = 0.0);
                }
            }
        }
    }
    c
}
