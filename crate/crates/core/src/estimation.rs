//! Fitting model parameters to a measured statistic curve by exhaustive
//! grid search on the mean squared error.
//!
//! Every grid point is simulated with the same seed list, so a target
//! produced by the model at a grid point is matched there with `eps = 0`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, GbsmError, Result};
use crate::experiments::{
    simulate_coherence_bandwidths, simulate_rms_delay_spreads, simulate_space_ccf, simulate_stationary_intervals,
    Sampling,
};
use crate::scenarios::ScenarioConfig;
use crate::stats::curve::Curve;
use crate::stats::distribution::{DistributionMode, EmpiricalDistribution};

/// A fitted parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    ArrivalAzimuthStd,
    ArrivalElevationStd,
    DepartureAzimuthStd,
    DepartureElevationStd,
    ArrayCorrelationDistance,
    SpaceCorrelationDistance,
    VirtualLinkCoherence,
}

impl Param {
    pub const ALL: [Param; 7] = [
        Param::ArrivalAzimuthStd,
        Param::ArrivalElevationStd,
        Param::DepartureAzimuthStd,
        Param::DepartureElevationStd,
        Param::ArrayCorrelationDistance,
        Param::SpaceCorrelationDistance,
        Param::VirtualLinkCoherence,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Param::ArrivalAzimuthStd => "arrival_azimuth_std",
            Param::ArrivalElevationStd => "arrival_elevation_std",
            Param::DepartureAzimuthStd => "departure_azimuth_std",
            Param::DepartureElevationStd => "departure_elevation_std",
            Param::ArrayCorrelationDistance => "array_correlation_distance",
            Param::SpaceCorrelationDistance => "space_correlation_distance",
            Param::VirtualLinkCoherence => "virtual_link_coherence",
        }
    }

    pub fn get(&self, cfg: &ScenarioConfig) -> f64 {
        match self {
            Param::ArrivalAzimuthStd => cfg.angles.arrival_azimuth.std,
            Param::ArrivalElevationStd => cfg.angles.arrival_elevation.std,
            Param::DepartureAzimuthStd => cfg.angles.departure_azimuth.std,
            Param::DepartureElevationStd => cfg.angles.departure_elevation.std,
            Param::ArrayCorrelationDistance => cfg.evolution.array_correlation_distance,
            Param::SpaceCorrelationDistance => cfg.evolution.space_correlation_distance,
            Param::VirtualLinkCoherence => cfg.evolution.virtual_link_coherence,
        }
    }

    pub fn set(&self, cfg: &mut ScenarioConfig, value: f64) {
        let slot = match self {
            Param::ArrivalAzimuthStd => &mut cfg.angles.arrival_azimuth.std,
            Param::ArrivalElevationStd => &mut cfg.angles.arrival_elevation.std,
            Param::DepartureAzimuthStd => &mut cfg.angles.departure_azimuth.std,
            Param::DepartureElevationStd => &mut cfg.angles.departure_elevation.std,
            Param::ArrayCorrelationDistance => &mut cfg.evolution.array_correlation_distance,
            Param::SpaceCorrelationDistance => &mut cfg.evolution.space_correlation_distance,
            Param::VirtualLinkCoherence => &mut cfg.evolution.virtual_link_coherence,
        };
        *slot = value;
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Statistic a target curve describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatisticKind {
    /// Receive space CCF magnitude against element separation.
    #[serde(rename = "space-ccf")]
    SpaceCcf,
    #[serde(rename = "stationary-interval-ccdf")]
    StationaryIntervalCcdf,
    #[serde(rename = "coherence-bandwidth-cdf")]
    CoherenceBandwidthCdf,
    #[serde(rename = "rms-delay-ccdf")]
    RmsDelayCcdf,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 4] = [
        StatisticKind::SpaceCcf,
        StatisticKind::StationaryIntervalCcdf,
        StatisticKind::CoherenceBandwidthCdf,
        StatisticKind::RmsDelayCcdf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StatisticKind::SpaceCcf => "space-ccf",
            StatisticKind::StationaryIntervalCcdf => "stationary-interval-ccdf",
            StatisticKind::CoherenceBandwidthCdf => "coherence-bandwidth-cdf",
            StatisticKind::RmsDelayCcdf => "rms-delay-ccdf",
        }
    }

    fn mode(&self) -> Option<DistributionMode> {
        match self {
            StatisticKind::SpaceCcf => None,
            StatisticKind::CoherenceBandwidthCdf => Some(DistributionMode::Cdf),
            _ => Some(DistributionMode::Ccdf),
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatisticKind {
    type Err = GbsmError;

    fn from_str(s: &str) -> Result<Self> {
        StatisticKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| GbsmError::UnknownStatistic(s.to_string()))
    }
}

/// Sampled curve to be matched.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetCurve {
    pub kind: StatisticKind,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub source: String,
}

impl TargetCurve {
    pub fn new(kind: StatisticKind, x: Vec<f64>, y: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(invalid("target", "need equally many x and y values, at least one"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("target", "x must be strictly increasing"));
        }
        if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("target", "y must lie in [0, 1]"));
        }
        if kind == StatisticKind::SpaceCcf && x[0] < 0.0 {
            return Err(invalid("target", "separations must be >= 0"));
        }
        Ok(Self { kind, x, y, source: source.into() })
    }

    pub fn from_curve(curve: &Curve) -> Result<Self> {
        let kind = curve.statistic.parse()?;
        let source = curve.meta_value("source").unwrap_or("").to_string();
        Self::new(kind, curve.x.clone(), curve.y.clone(), source)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_curve(&Curve::from_text(text)?)
    }

    pub fn to_curve(&self) -> Curve {
        let c = Curve::new(self.kind.as_str(), self.x.clone(), self.y.clone());
        if self.source.is_empty() {
            c
        } else {
            c.with_meta("source", &self.source)
        }
    }
}

/// How the simulated statistic is produced for every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticSettings {
    pub duration: f64,
    pub dt: f64,
    /// Keep every `every`-th state of each realization.
    #[serde(default = "one")]
    pub every: usize,
    /// Largest separation of the space CCF, elements.
    #[serde(default = "default_separation")]
    pub max_separation: usize,
}

fn one() -> usize {
    1
}

fn default_separation() -> usize {
    8
}

impl StatisticSettings {
    pub fn sampling(&self) -> Sampling {
        Sampling::new(self.duration, self.dt, self.every)
    }
}

/// Simulated statistic before evaluation at the target points.
#[derive(Debug, Clone, PartialEq)]
pub enum Simulated {
    /// CCF magnitude at separations `0, 1, ...`.
    Ccf(Vec<f64>),
    Distribution(EmpiricalDistribution),
}

impl Simulated {
    /// Linear interpolation at `x`; held constant beyond the ends.
    pub fn at(&self, x: f64) -> f64 {
        match self {
            Simulated::Ccf(v) => {
                let last = v.len() - 1;
                if x <= 0.0 {
                    return v[0];
                }
                if x >= last as f64 {
                    return v[last];
                }
                let i = x.floor() as usize;
                let f = x - i as f64;
                v[i] + f * (v[i + 1] - v[i])
            }
            Simulated::Distribution(d) => d.eval_interpolated(x),
        }
    }
}

pub fn simulate_statistic(
    kind: StatisticKind,
    cfg: &ScenarioConfig,
    seeds: &[u64],
    settings: &StatisticSettings,
) -> Result<Simulated> {
    let sampling = settings.sampling();
    let values = match kind {
        StatisticKind::SpaceCcf => {
            return Ok(Simulated::Ccf(simulate_space_ccf(cfg, seeds, settings.max_separation)?));
        }
        StatisticKind::StationaryIntervalCcdf => {
            simulate_stationary_intervals(cfg, seeds, sampling)?.iter().map(|c| c.value).collect::<Vec<_>>()
        }
        StatisticKind::CoherenceBandwidthCdf => {
            simulate_coherence_bandwidths(cfg, seeds, sampling)?.iter().map(|c| c.value).collect()
        }
        StatisticKind::RmsDelayCcdf => simulate_rms_delay_spreads(cfg, seeds, sampling)?,
    };
    let mode = kind.mode().expect("distribution statistic");
    Ok(Simulated::Distribution(EmpiricalDistribution::new(&values, mode)?))
}

/// Mean squared error between the target and the statistic simulated with
/// `cfg` over `seeds`.
pub fn objective(cfg: &ScenarioConfig, target: &TargetCurve, seeds: &[u64], settings: &StatisticSettings) -> Result<f64> {
    let sim = simulate_statistic(target.kind, cfg, seeds, settings)?;
    Ok(mse(&sim, target))
}

fn mse(sim: &Simulated, target: &TargetCurve) -> f64 {
    let sum: f64 = target.x.iter().zip(&target.y).map(|(&x, &y)| (sim.at(x) - y).powi(2)).sum();
    sum / target.x.len() as f64
}

/// Target produced by the model itself: the CCF at every separation, or
/// the distribution at its 5 %, 10 %, ..., 95 % quantiles.
pub fn synthesize_target(
    kind: StatisticKind,
    cfg: &ScenarioConfig,
    seeds: &[u64],
    settings: &StatisticSettings,
) -> Result<TargetCurve> {
    let sim = simulate_statistic(kind, cfg, seeds, settings)?;
    let mut x: Vec<f64> = match &sim {
        Simulated::Ccf(v) => (0..v.len()).map(|s| s as f64).collect(),
        Simulated::Distribution(d) => (1..20).map(|k| d.quantile(k as f64 * 0.05)).collect(),
    };
    x.dedup_by(|b, a| !(*b > *a));
    let y = x.iter().map(|&v| sim.at(v).clamp(0.0, 1.0)).collect();
    TargetCurve::new(kind, x, y, format!("synthetic:{}", cfg.name))
}

/// Candidate values for each fitted parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub param: Param,
    pub values: Vec<f64>,
}

/// Grid description independent of the base scenario, as read from a
/// grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Early-stop threshold `eps_T`; no default.
    pub threshold: f64,
    pub seeds: Vec<u64>,
    pub settings: StatisticSettings,
    #[serde(rename = "axis")]
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GbsmError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| GbsmError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGrid {
    pub axes: Vec<GridAxis>,
    pub base: ScenarioConfig,
    pub seeds: Vec<u64>,
    pub threshold: f64,
    pub settings: StatisticSettings,
}

impl ParameterGrid {
    pub fn from_spec(spec: GridSpec, base: ScenarioConfig) -> Result<Self> {
        let grid = Self { axes: spec.axes, base, seeds: spec.seeds, threshold: spec.threshold, settings: spec.settings };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(invalid("threshold", "must be > 0"));
        }
        if self.seeds.is_empty() {
            return Err(GbsmError::EmptyInput("seed list"));
        }
        if self.axes.is_empty() {
            return Err(GbsmError::EmptyInput("grid axes"));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.values.is_empty() {
                return Err(invalid("grid", format!("axis {} has no values", a.param)));
            }
            if self.axes[..i].iter().any(|b| b.param == a.param) {
                return Err(invalid("grid", format!("axis {} repeated", a.param)));
            }
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Values of point `index`, first axis varying slowest.
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            v[k] = a.values[index % a.values.len()];
            index /= a.values.len();
        }
        v
    }

    pub fn config_at(&self, values: &[f64]) -> ScenarioConfig {
        let mut cfg = self.base.clone();
        for (a, &v) in self.axes.iter().zip(values) {
            a.param.set(&mut cfg, v);
        }
        cfg
    }
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub statistic: StatisticKind,
    pub params: Vec<Param>,
    pub best: Vec<f64>,
    pub epsilon: f64,
    /// Every evaluated point with its error, in evaluation order.
    pub table: Vec<(Vec<f64>, f64)>,
    pub threshold: f64,
    /// True when the search stopped at a point with `eps <= threshold`.
    pub early_stopped: bool,
}

impl FitReport {
    pub fn threshold_met(&self) -> bool {
        self.epsilon <= self.threshold
    }

    /// Plain-text report: key/value lines, then the full table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "statistic: {}", self.statistic);
        for (p, v) in self.params.iter().zip(&self.best) {
            let _ = writeln!(s, "fitted.{p}: {v:.12e}");
        }
        let _ = writeln!(s, "epsilon: {:.12e}", self.epsilon);
        let _ = writeln!(s, "threshold: {:.12e}", self.threshold);
        let _ = writeln!(s, "threshold_met: {}", self.threshold_met());
        let _ = writeln!(s, "early_stopped: {}", self.early_stopped);
        let _ = writeln!(s, "evaluated: {}", self.table.len());
        let names: Vec<&str> = self.params.iter().map(Param::as_str).collect();
        let _ = writeln!(s, "# {} epsilon", names.join(" "));
        for (v, e) in &self.table {
            for x in v {
                let _ = write!(s, "{x:.12e} ");
            }
            let _ = writeln!(s, "{e:.12e}");
        }
        s
    }
}

/// Evaluate the grid in order until a point reaches the threshold; the
/// first strict minimum wins ties.
pub fn grid_search(grid: &ParameterGrid, target: &TargetCurve) -> Result<FitReport> {
    grid.validate()?;
    let mut table = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut early_stopped = false;
    for i in 0..grid.size() {
        let values = grid.point(i);
        let eps = objective(&grid.config_at(&values), target, &grid.seeds, &grid.settings)?;
        table.push((values.clone(), eps));
        if best.as_ref().is_none_or(|b| eps < b.1) {
            best = Some((values, eps));
        }
        if eps <= grid.threshold {
            early_stopped = i + 1 < grid.size();
            break;
        }
    }
    let (best, epsilon) = best.expect("grid has at least one point");
    Ok(FitReport {
        statistic: target.kind,
        params: grid.axes.iter().map(|a| a.param).collect(),
        best,
        epsilon,
        table,
        threshold: grid.threshold,
        early_stopped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{preset, PresetName};

    fn small_massive() -> ScenarioConfig {
        let mut cfg = preset(PresetName::MassiveMimo3d);
        cfg.rx.elements = 6;
        cfg.tx.elements = 1;
        cfg
    }

    fn ccf_settings() -> StatisticSettings {
        StatisticSettings { duration: 1e-3, dt: 1e-3, every: 1, max_separation: 4 }
    }

    #[test]
    fn self_target_has_zero_error() {
        let cfg = small_massive();
        let seeds = [1, 2, 3, 4];
        let t = synthesize_target(StatisticKind::SpaceCcf, &cfg, &seeds, &ccf_settings()).unwrap();
        assert_eq!(objective(&cfg, &t, &seeds, &ccf_settings()).unwrap(), 0.0);
    }

    #[test]
    fn constant_target_has_positive_error() {
        let cfg = small_massive();
        let t = TargetCurve::new(StatisticKind::SpaceCcf, vec![0.0, 1.0, 2.0, 3.0], vec![0.5; 4], "flat").unwrap();
        assert!(objective(&cfg, &t, &[1, 2], &ccf_settings()).unwrap() > 0.0);
    }

    #[test]
    fn grid_indexing_and_size() {
        let g = ParameterGrid {
            axes: vec![
                GridAxis { param: Param::ArrivalAzimuthStd, values: vec![1.0, 2.0] },
                GridAxis { param: Param::VirtualLinkCoherence, values: vec![3.0, 4.0, 5.0] },
            ],
            base: small_massive(),
            seeds: vec![1],
            threshold: 1e-9,
            settings: ccf_settings(),
        };
        assert_eq!(g.size(), 6);
        assert_eq!(g.point(0), vec![1.0, 3.0]);
        assert_eq!(g.point(4), vec![2.0, 4.0]);
        let cfg = g.config_at(&g.point(5));
        assert_eq!(cfg.angles.arrival_azimuth.std, 2.0);
        assert_eq!(cfg.evolution.virtual_link_coherence, 5.0);
    }

    #[test]
    fn single_point_grid() {
        let cfg = small_massive();
        let g = ParameterGrid {
            axes: vec![GridAxis { param: Param::ArrivalAzimuthStd, values: vec![0.7] }],
            base: cfg.clone(),
            seeds: vec![1, 2],
            threshold: 1e-12,
            settings: ccf_settings(),
        };
        let t = TargetCurve::new(StatisticKind::SpaceCcf, vec![0.0, 1.0], vec![1.0, 0.2], "").unwrap();
        let r = grid_search(&g, &t).unwrap();
        assert_eq!(r.best, vec![0.7]);
        assert_eq!(r.table.len(), 1);
        assert!(!r.early_stopped);
    }

    #[test]
    fn threshold_must_be_positive() {
        let g = ParameterGrid {
            axes: vec![GridAxis { param: Param::ArrivalAzimuthStd, values: vec![0.7] }],
            base: small_massive(),
            seeds: vec![1],
            threshold: 0.0,
            settings: ccf_settings(),
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn target_validation() {
        assert!(TargetCurve::new(StatisticKind::RmsDelayCcdf, vec![1.0, 1.0], vec![0.5, 0.4], "").is_err());
        assert!(TargetCurve::new(StatisticKind::RmsDelayCcdf, vec![1.0, 2.0], vec![0.5, 1.4], "").is_err());
        assert!("space-ccf".parse::<StatisticKind>().is_ok());
        assert!(matches!("psd".parse::<StatisticKind>(), Err(GbsmError::UnknownStatistic(_))));
    }

    #[test]
    fn grid_spec_round_trip() {
        let spec = GridSpec {
            threshold: 1e-6,
            seeds: vec![1, 2],
            settings: ccf_settings(),
            axes: vec![GridAxis { param: Param::SpaceCorrelationDistance, values: vec![5.0, 10.0] }],
        };
        assert_eq!(GridSpec::from_toml(&spec.to_toml().unwrap()).unwrap(), spec);
        assert!(GridSpec::from_toml("seeds = [1]\n").is_err());
    }
}
