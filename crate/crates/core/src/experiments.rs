//! Ensemble pipelines: run a preset over a list of seeds and reduce the
//! realizations to one statistic. Realizations run in parallel on the
//! current rayon pool; results are always collected in seed order so the
//! reductions are independent of the thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelState, CirSnapshot};
use crate::clusters::{pair_visibility_probability, ClusterId};
use crate::error::{invalid, GbsmError, Result};
use crate::geometry::PolarizedField;
use crate::scenarios::{preset, PresetName, ScenarioConfig};
use crate::stats::correlation::{
    analytical_acf_per_cluster, coherence_bandwidth_from_pdp, rx_ccf, simulated_acf_per_cluster, transfer_taps,
    CorrelationResult,
};
use crate::stats::curve::Curve;
use crate::stats::distribution::{DistributionMode, EmpiricalDistribution};
use crate::stats::music::smooth_music_aps;
use crate::stats::pdp::{pdp, rms_delay_spread, stationary_interval_binned, BinnedPdp, Censored};

/// How each realization is run and sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Length of each realization, s.
    pub duration: f64,
    pub dt: f64,
    /// Keep every `every`-th state, starting at `t = 0`.
    pub every: usize,
}

impl Sampling {
    pub fn new(duration: f64, dt: f64, every: usize) -> Self {
        Self { duration, dt, every }
    }

    fn steps(&self) -> Result<usize> {
        if self.every == 0 {
            return Err(invalid("every", "must be >= 1"));
        }
        crate::channel::sample_count(self.duration, self.dt)
    }
}

/// Map `f` over the seeds in parallel, keeping seed order.
pub fn par_seeds<T, F>(seeds: &[u64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    if seeds.is_empty() {
        return Err(GbsmError::EmptyInput("seed list"));
    }
    seeds.par_iter().map(|&s| f(s)).collect()
}

/// Visit the sampled states of one realization.
pub fn sample_states<T, F>(cfg: &ScenarioConfig, sampling: Sampling, seed: u64, mut f: F) -> Result<Vec<T>>
where
    F: FnMut(&ChannelState) -> Result<T>,
{
    let n = sampling.steps()?;
    let mut state = ChannelState::new(cfg, seed)?;
    let mut out = Vec::new();
    for k in 0..n {
        if k > 0 {
            state.evolve(sampling.dt)?;
        }
        if k % sampling.every == 0 {
            out.push(f(&state)?);
        }
    }
    Ok(out)
}

/// Receive-side spatial correlation terms of one snapshot at `xi = 0` for
/// transmit element `p`: `cross[s]` is the mean over `q` of
/// `H*_q H_{q+s}`, `power` the mean of `|H_q|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceCcfTerms {
    pub cross: Vec<Complex64>,
    pub power: f64,
}

pub fn space_ccf_terms(snapshot: &CirSnapshot, p: usize, max_separation: usize) -> Result<SpaceCcfTerms> {
    let m = snapshot.rx_elements;
    if max_separation >= m {
        return Err(invalid("max_separation", format!("must be below the {m} receive elements")));
    }
    if p >= snapshot.tx_elements {
        return Err(GbsmError::IndexOutOfRange { index: p, len: snapshot.tx_elements });
    }
    let h: Vec<Complex64> = (0..m).map(|q| transfer_taps(snapshot.pair(q, p), 0.0)).collect();
    let cross = (0..=max_separation)
        .map(|s| (0..m - s).map(|q| h[q].conj() * h[q + s]).sum::<Complex64>() / (m - s) as f64)
        .collect();
    let power = h.iter().map(|v| v.norm_sqr()).sum::<f64>() / m as f64;
    Ok(SpaceCcfTerms { cross, power })
}

/// `|sum cross[s]| / sum power` over realizations.
pub fn combine_space_ccf(terms: &[SpaceCcfTerms]) -> Result<Vec<f64>> {
    let first = terms.first().ok_or(GbsmError::EmptyInput("space correlation terms"))?;
    let power: f64 = terms.iter().map(|t| t.power).sum();
    if !(power > 0.0) {
        return Err(GbsmError::ZeroPower);
    }
    Ok((0..first.cross.len())
        .map(|s| terms.iter().map(|t| t.cross[s]).sum::<Complex64>().norm() / power)
        .collect())
}

/// Space correlation terms of one state, averaged over the transmit
/// elements, with the expectation over the polarization and LOS phases
/// and over the cluster visibility draw taken in closed form. Per ray only
/// the squared transmit field magnitudes and the receive fields and phases
/// remain, weighted by the probability that the elements involved observe
/// the cluster.
pub fn phase_averaged_space_ccf_terms(state: &ChannelState, max_separation: usize) -> Result<SpaceCcfTerms> {
    let m_r = state.rx_array.len();
    let m_t = state.tx_array.len();
    if max_separation >= m_r {
        return Err(invalid("max_separation", format!("must be below the {m_r} receive elements")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let no_field = PolarizedField { vertical: 0.0, horizontal: 0.0 };
    let cfg = &state.config;
    let k = cfg.rician_k;
    let kappa = cfg.cross_polarization;
    let w2 = 1.0 / (k + 1.0);
    let rx_pos = state.rx_positions();
    let tx_pos = state.tx_positions();
    let rx_vis = pair_visibility_probability(&rx_pos, &cfg.evolution, cfg.array_evolution);
    let tx_vis = pair_visibility_probability(&tx_pos, &cfg.evolution, cfg.array_evolution);
    let mut cross = vec![zero; max_separation + 1];
    let mut power = 0.0;
    if k > 0.0 {
        for p in 0..m_t {
            let los: Vec<Complex64> = (0..m_r).map(|q| state.los_gain(q, p)).collect::<Result<_>>()?;
            let scale = k / (k + 1.0) / m_t as f64;
            for (s, c) in cross.iter_mut().enumerate() {
                *c += (0..m_r - s).map(|q| los[q].conj() * los[q + s]).sum::<Complex64>() * scale / (m_r - s) as f64;
            }
            power += los.iter().map(|g| g.norm_sqr()).sum::<f64>() * scale / m_r as f64;
        }
    }
    let mut v = vec![zero; m_r];
    let mut h = vec![zero; m_r];
    for (index, c) in state.clusters.iter().enumerate() {
        for (r, pw) in c.rays.iter().zip(state.ray_powers(index)) {
            let (mut tv, mut th) = (0.0, 0.0);
            for (p, a) in tx_pos.iter().enumerate() {
                let f = state.tx_array.field(r.tx_point, *a).unwrap_or(no_field);
                tv += tx_vis[p][p] * f.vertical * f.vertical;
                th += tx_vis[p][p] * f.horizontal * f.horizontal;
            }
            let (tv, th) = (tv / m_t as f64, th / m_t as f64);
            let wv = ((tv + kappa * th) * pw * w2).sqrt();
            let wh = ((kappa * tv + th) * pw * w2).sqrt();
            for (q, a) in rx_pos.iter().enumerate() {
                let f = state.rx_array.field(r.rx_point, *a).unwrap_or(no_field);
                let e = Complex64::from_polar(1.0, r.rx_phase[q]);
                v[q] = e * f.vertical * wv;
                h[q] = e * f.horizontal * wh;
            }
            for (s, acc) in cross.iter_mut().enumerate() {
                let sum: Complex64 = (0..m_r - s)
                    .map(|q| (v[q].conj() * v[q + s] + h[q].conj() * h[q + s]) * rx_vis[q][q + s])
                    .sum();
                *acc += sum / (m_r - s) as f64;
            }
            power += (0..m_r).map(|q| (v[q].norm_sqr() + h[q].norm_sqr()) * rx_vis[q][q]).sum::<f64>() / m_r as f64;
        }
    }
    Ok(SpaceCcfTerms { cross, power })
}

/// Per-seed averaged space correlation terms at `t = 0`.
pub fn simulate_space_ccf_terms(cfg: &ScenarioConfig, seeds: &[u64], max_separation: usize) -> Result<Vec<SpaceCcfTerms>> {
    par_seeds(seeds, |seed| phase_averaged_space_ccf_terms(&ChannelState::new(cfg, seed)?, max_separation))
}

/// Normalized receive space CCF magnitude against element separation.
pub fn simulate_space_ccf(cfg: &ScenarioConfig, seeds: &[u64], max_separation: usize) -> Result<Vec<f64>> {
    combine_space_ccf(&simulate_space_ccf_terms(cfg, seeds, max_separation)?)
}

/// Space CCF of stored realizations, computed through the receive CCF of
/// the first snapshot of each, averaged over element pairs.
pub fn space_ccf_of_ensemble(ensemble: &[Vec<CirSnapshot>], p: usize, max_separation: usize) -> Result<Vec<f64>> {
    let m = ensemble
        .first()
        .and_then(|r| r.first())
        .ok_or(GbsmError::EmptyInput("ensemble"))?
        .rx_elements;
    if max_separation >= m {
        return Err(invalid("max_separation", format!("must be below the {m} receive elements")));
    }
    let power: f64 = (0..m).map(|q| rx_ccf(ensemble, q, q, p, 0.0, 0).map(|v| v.re)).sum::<Result<f64>>()? / m as f64;
    if !(power > 0.0) {
        return Err(GbsmError::ZeroPower);
    }
    (0..=max_separation)
        .map(|s| {
            let mut acc = Complex64::new(0.0, 0.0);
            for q in 0..m - s {
                acc += rx_ccf(ensemble, q, q + s, p, 0.0, 0)?;
            }
            Ok((acc / (m - s) as f64).norm() / power)
        })
        .collect()
}

/// Stationary interval starting at the first state of one realization.
pub fn stationary_interval_of(cfg: &ScenarioConfig, sampling: Sampling, seed: u64) -> Result<Censored> {
    let res = cfg.analysis.delay_resolution;
    let mut binned: Vec<BinnedPdp> = Vec::new();
    let mut times = Vec::new();
    sample_states(cfg, sampling, seed, |s| {
        binned.push(pdp(&s.path_snapshot()).binned(res));
        times.push(s.time);
        Ok(())
    })?;
    stationary_interval_binned(&binned, &times, 0, cfg.analysis.stationarity_threshold)
}

pub fn simulate_stationary_intervals(cfg: &ScenarioConfig, seeds: &[u64], sampling: Sampling) -> Result<Vec<Censored>> {
    par_seeds(seeds, |seed| stationary_interval_of(cfg, sampling, seed))
}

/// Stationary interval of each stored realization (paths only are used).
pub fn stationary_intervals_of_ensemble(ensemble: &[Vec<CirSnapshot>], cfg: &ScenarioConfig) -> Result<Vec<Censored>> {
    let res = cfg.analysis.delay_resolution;
    ensemble
        .iter()
        .map(|real| {
            let binned: Vec<BinnedPdp> = real.iter().map(|s| pdp(s).binned(res)).collect();
            let times: Vec<f64> = real.iter().map(|s| s.time).collect();
            stationary_interval_binned(&binned, &times, 0, cfg.analysis.stationarity_threshold)
        })
        .collect()
}

fn coherence_bandwidth_of_snapshot(s: &CirSnapshot, cfg: &ScenarioConfig) -> Result<Censored> {
    let a = &cfg.analysis;
    coherence_bandwidth_from_pdp(&pdp(s), a.max_frequency_lag, a.frequency_points, a.coherence_level)
}

/// Coherence bandwidth of the phase-averaged frequency correlation at
/// every sampled state.
pub fn simulate_coherence_bandwidths(cfg: &ScenarioConfig, seeds: &[u64], sampling: Sampling) -> Result<Vec<Censored>> {
    let per: Vec<Vec<Censored>> = par_seeds(seeds, |seed| {
        sample_states(cfg, sampling, seed, |s| coherence_bandwidth_of_snapshot(&s.path_snapshot(), cfg))
    })?;
    Ok(per.into_iter().flatten().collect())
}

pub fn coherence_bandwidths_of_ensemble(ensemble: &[Vec<CirSnapshot>], cfg: &ScenarioConfig) -> Result<Vec<Censored>> {
    ensemble
        .iter()
        .flatten()
        .map(|s| coherence_bandwidth_of_snapshot(s, cfg))
        .collect()
}

/// RMS delay spread at every sampled state.
pub fn simulate_rms_delay_spreads(cfg: &ScenarioConfig, seeds: &[u64], sampling: Sampling) -> Result<Vec<f64>> {
    let per: Vec<Vec<f64>> = par_seeds(seeds, |seed| {
        sample_states(cfg, sampling, seed, |s| rms_delay_spread(&pdp(&s.path_snapshot())))
    })?;
    Ok(per.into_iter().flatten().collect())
}

pub fn rms_delay_spreads_of_ensemble(ensemble: &[Vec<CirSnapshot>]) -> Result<Vec<f64>> {
    ensemble.iter().flatten().map(|s| rms_delay_spread(&pdp(s))).collect()
}

/// Ensemble time autocorrelation magnitude of pair `(q, p)` at `xi = 0`
/// from `t = 0`, normalized to one at zero lag.
pub fn acf_of_ensemble(ensemble: &[Vec<CirSnapshot>], q: usize, p: usize) -> Result<CorrelationResult> {
    let n = ensemble.iter().map(Vec::len).min().ok_or(GbsmError::EmptyInput("ensemble"))?;
    let first = &ensemble[0];
    let values = (0..n)
        .map(|lag| crate::stats::correlation::acf(ensemble, q, p, 0.0, 0, lag))
        .collect::<Result<Vec<_>>>()?;
    CorrelationResult {
        lags: first[..n].iter().map(|s| s.time - first[0].time).collect(),
        values,
        normalized: false,
    }
    .normalize()
}

/// Analytical against simulated time correlation of individual clusters
/// on one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfComparison {
    pub clusters: Vec<ClusterId>,
    /// Per cluster, divided by the zero-lag analytical value of the first.
    pub analytical: Vec<CorrelationResult>,
    pub simulated: Vec<CorrelationResult>,
}

impl AcfComparison {
    /// Largest `|analytical - simulated|` over clusters and lags.
    pub fn max_deviation(&self) -> f64 {
        self.analytical
            .iter()
            .zip(&self.simulated)
            .flat_map(|(a, s)| a.values.iter().zip(&s.values).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

/// Parameters of the per-cluster correlation comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfSetup {
    pub seed: u64,
    pub q: usize,
    pub p: usize,
    pub clusters: usize,
    pub lags: usize,
    /// Spacing of the lags in simulation steps.
    pub lag_steps: usize,
    pub draws: usize,
    pub draw_seed: u64,
}

impl Default for AcfSetup {
    fn default() -> Self {
        Self { seed: 4, q: 0, p: 0, clusters: 2, lags: 51, lag_steps: 2, draws: 20_000, draw_seed: 1_000_000 }
    }
}

pub fn compare_cluster_acf(cfg: &ScenarioConfig, setup: AcfSetup) -> Result<AcfComparison> {
    if setup.lags == 0 || setup.lag_steps == 0 || setup.clusters == 0 {
        return Err(invalid("setup", "lags, lag_steps and clusters must be >= 1"));
    }
    let mut state = ChannelState::new(cfg, setup.seed)?;
    let mut trajectory = vec![state.clone()];
    for _ in 1..setup.lags {
        for _ in 0..setup.lag_steps {
            state.evolve(cfg.dt)?;
        }
        trajectory.push(state.clone());
    }
    let last = trajectory.last().expect("non-empty trajectory");
    let ids: Vec<ClusterId> = trajectory[0]
        .clusters
        .iter()
        .map(|c| c.id)
        .filter(|&id| last.cluster(id).is_some() && trajectory[0].visibility.is_visible(setup.q, setup.p, id))
        .take(setup.clusters)
        .collect();
    if ids.len() < setup.clusters {
        return Err(invalid("clusters", "not enough clusters persist along the trajectory"));
    }
    let runs: Vec<(CorrelationResult, CorrelationResult)> = ids
        .par_iter()
        .map(|&id| {
            let a = analytical_acf_per_cluster(&trajectory, &cfg.evolution, setup.q, setup.p, id)?;
            let s = simulated_acf_per_cluster(&trajectory, setup.q, setup.p, id, setup.draws, setup.draw_seed)?;
            Ok((a, s))
        })
        .collect::<Result<_>>()?;
    let reference = runs[0].0.values[0];
    let mut analytical = Vec::new();
    let mut simulated = Vec::new();
    for (a, s) in &runs {
        analytical.push(a.normalized_by(reference)?);
        simulated.push(s.normalized_by(reference)?);
    }
    Ok(AcfComparison { clusters: ids, analytical, simulated })
}

/// Layout of the sliding-window angular power spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ApsSetup {
    /// Antennas per window.
    pub window: usize,
    /// Smoothing subarray length.
    pub subarray: usize,
    /// Window start stride in antennas.
    pub stride: usize,
    /// Frequencies used as snapshots, Hz relative to the carrier.
    pub frequencies: Vec<f64>,
    /// Angles from broadside, rad.
    pub angles: Vec<f64>,
}

impl Default for ApsSetup {
    fn default() -> Self {
        Self {
            window: 8,
            subarray: 3,
            stride: 1,
            frequencies: (0..64).map(|k| k as f64 * 2e6).collect(),
            angles: (0..=360).map(|k| (-90.0 + 0.5 * k as f64).to_radians()).collect(),
        }
    }
}

/// Smoothed MUSIC spectrum of every antenna window of one snapshot;
/// `result[w]` belongs to the window starting at antenna `w * stride`.
/// Every transmit element and frequency contributes one array sample.
pub fn aps_grid(snapshot: &CirSnapshot, setup: &ApsSetup) -> Result<Vec<Vec<f64>>> {
    let m = snapshot.rx_elements;
    if setup.window > m || setup.window < setup.subarray || setup.stride == 0 {
        return Err(invalid("window", "need subarray <= window <= receive elements and stride >= 1"));
    }
    let h: Vec<Vec<Vec<Complex64>>> = (0..snapshot.tx_elements)
        .map(|p| {
            (0..m)
                .map(|q| {
                    let taps = snapshot.pair(q, p);
                    setup.frequencies.iter().map(|&f| transfer_taps(taps, f)).collect()
                })
                .collect()
        })
        .collect();
    (0..=m - setup.window)
        .step_by(setup.stride)
        .map(|w| {
            let samples: Vec<Vec<Complex64>> = h
                .iter()
                .flat_map(|hp| {
                    (0..setup.frequencies.len())
                        .map(move |k| (w..w + setup.window).map(|q| hp[q][k]).collect())
                })
                .collect();
            smooth_music_aps(&samples, setup.subarray, &setup.angles, None)
        })
        .collect()
}

/// Empirical distribution as a curve sampled at the sorted samples.
pub fn distribution_curve(statistic: &str, samples: &[f64], mode: DistributionMode) -> Result<Curve> {
    let dist = EmpiricalDistribution::new(samples, mode)?;
    let mut x: Vec<f64> = dist.samples().to_vec();
    x.dedup();
    let y = x.iter().map(|&v| dist.eval(v)).collect();
    Ok(Curve::new(statistic, x, y)
        .with_meta("samples", samples.len())
        .with_meta("median", format!("{:.6e}", dist.median())))
}

/// Figures reproduced by [`reproduce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Per-cluster analytical and simulated time correlation.
    Fig4,
    /// Stationary interval CCDF, high-speed train.
    Fig5,
    /// Coherence bandwidth CDF, vehicle-to-vehicle.
    Fig6,
    /// RMS delay spread CCDF, indoor millimeter wave.
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig4, Figure::Fig5, Figure::Fig6, Figure::Fig8];

    pub fn as_str(&self) -> &'static str {
        match self {
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig8 => "fig8",
        }
    }

    pub fn preset(&self) -> PresetName {
        match self {
            Figure::Fig4 => PresetName::ConventionalMimo3d,
            Figure::Fig5 => PresetName::Hst3d,
            Figure::Fig6 => PresetName::V2v2d,
            Figure::Fig8 => PresetName::Mmwave3d,
        }
    }

    /// Number of realizations used by default.
    pub fn default_realizations(&self) -> usize {
        match self {
            Figure::Fig4 => 1,
            Figure::Fig5 => 200,
            Figure::Fig6 => 100,
            Figure::Fig8 => 200,
        }
    }

    /// Per-realization run length and sampling used by default.
    pub fn default_sampling(&self) -> Sampling {
        match self {
            Figure::Fig4 => Sampling::new(0.1, 1e-3, 2),
            Figure::Fig5 => Sampling::new(0.3, 1e-3, 1),
            Figure::Fig6 => Sampling::new(1.0, 1e-3, 100),
            Figure::Fig8 => Sampling::new(1.0, 1e-3, 100),
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = GbsmError;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| invalid("figure", format!("unknown figure '{s}'")))
    }
}

impl std::fmt::Display for Figure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn censored_values(v: &[Censored]) -> (Vec<f64>, usize) {
    (v.iter().map(|c| c.value).collect(), v.iter().filter(|c| c.censored).count())
}

/// Figure data as named curves. For [`Figure::Fig4`] the first seed picks
/// the trajectory.
pub fn reproduce(figure: Figure, seeds: &[u64], sampling: Sampling) -> Result<Vec<(String, Curve)>> {
    let cfg = preset(figure.preset());
    let seed_list = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    let tag = |c: Curve| {
        c.with_meta("preset", figure.preset())
            .with_meta("realizations", seeds.len())
            .with_meta("duration_s", sampling.duration)
            .with_meta("dt_s", sampling.dt)
            .with_meta("seeds", &seed_list)
    };
    match figure {
        Figure::Fig4 => {
            let seed = *seeds.first().ok_or(GbsmError::EmptyInput("seed list"))?;
            let setup = AcfSetup {
                seed,
                lags: crate::channel::sample_count(sampling.duration, sampling.dt)? / sampling.every.max(1) + 1,
                lag_steps: sampling.every.max(1),
                ..AcfSetup::default()
            };
            let mut cfg = cfg;
            cfg.dt = sampling.dt;
            let cmp = compare_cluster_acf(&cfg, setup)?;
            let mut out = Vec::new();
            for (k, id) in cmp.clusters.iter().enumerate() {
                for (kind, r) in [("analytical", &cmp.analytical[k]), ("simulated", &cmp.simulated[k])] {
                    let c = Curve::new(format!("acf-{kind}"), r.lags.clone(), r.magnitudes())
                        .with_meta("cluster", id)
                        .with_meta("draws", setup.draws);
                    out.push((format!("fig4_cluster{}_{kind}", k + 1), tag(c)));
                }
            }
            Ok(out)
        }
        Figure::Fig5 => {
            let v = simulate_stationary_intervals(&cfg, seeds, sampling)?;
            let (x, censored) = censored_values(&v);
            let c = distribution_curve("stationary-interval-ccdf", &x, DistributionMode::Ccdf)?.with_meta("censored", censored);
            Ok(vec![("fig5_stationary_interval_ccdf".into(), tag(c))])
        }
        Figure::Fig6 => {
            let v = simulate_coherence_bandwidths(&cfg, seeds, sampling)?;
            let (x, censored) = censored_values(&v);
            let c = distribution_curve("coherence-bandwidth-cdf", &x, DistributionMode::Cdf)?.with_meta("censored", censored);
            Ok(vec![("fig6_coherence_bandwidth_cdf".into(), tag(c))])
        }
        Figure::Fig8 => {
            let v = simulate_rms_delay_spreads(&cfg, seeds, sampling)?;
            let c = distribution_curve("rms-delay-ccdf", &v, DistributionMode::Ccdf)?;
            Ok(vec![("fig8_rms_delay_ccdf".into(), tag(c))])
        }
    }
}

/// Angle grid in degrees matching [`ApsSetup::angles`].
pub fn degrees(angles: &[f64]) -> Vec<f64> {
    angles.iter().map(|a| a * 180.0 / PI).collect()
}
