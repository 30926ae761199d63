//! Transfer function, space-time-frequency correlation and its
//! reductions, coherence bandwidth and per-cluster time correlation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{ChannelState, CirSnapshot, Tap};
use crate::clusters::{joint_survival_probability, ClusterId, EvolutionParams};
use crate::error::{invalid, GbsmError, Result};
use crate::rng::{stream, STREAM_PHASES};
use crate::stats::pdp::{Censored, Pdp};
use rand::Rng;

/// `H(xi) = sum g exp(-j 2 pi xi tau)` for one tap list.
pub fn transfer_taps(taps: &[Tap], xi: f64) -> Complex64 {
    taps.iter()
        .map(|t| t.gain * Complex64::from_polar(1.0, -2.0 * PI * xi * t.delay))
        .sum()
}

/// Transfer function of every pair on a frequency grid, indexed
/// `[q * M_T + p][k]`.
pub fn transfer_function(snapshot: &CirSnapshot, freqs: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    if freqs.is_empty() {
        return Err(GbsmError::EmptyInput("frequency grid"));
    }
    Ok(snapshot
        .taps
        .iter()
        .map(|taps| freqs.iter().map(|&f| transfer_taps(taps, f)).collect())
        .collect())
}

/// One point of the space-time-frequency correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StfcfQuery {
    pub q: usize,
    pub p: usize,
    pub q2: usize,
    pub p2: usize,
    /// Frequency `xi`, Hz.
    pub xi: f64,
    /// Frequency lag, Hz.
    pub dxi: f64,
    /// Snapshot index of `t`.
    pub t_index: usize,
    /// Lag in snapshots.
    pub lag: usize,
}

/// Ensemble average of `H*_{qp}(xi, t) H_{q'p'}(xi + dxi, t + dt)` over
/// realizations; each realization is a time-ordered snapshot sequence.
pub fn stfcf(ensemble: &[Vec<CirSnapshot>], query: StfcfQuery) -> Result<Complex64> {
    if ensemble.is_empty() {
        return Err(GbsmError::EmptyInput("ensemble"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for real in ensemble {
        let a = real
            .get(query.t_index)
            .ok_or(GbsmError::IndexOutOfRange { index: query.t_index, len: real.len() })?;
        let k = query.t_index + query.lag;
        let b = real.get(k).ok_or(GbsmError::IndexOutOfRange { index: k, len: real.len() })?;
        fn pair(s: &CirSnapshot, q: usize, p: usize) -> Result<&[Tap]> {
            if q >= s.rx_elements || p >= s.tx_elements {
                return Err(GbsmError::IndexOutOfRange { index: q.max(p), len: s.rx_elements.max(s.tx_elements) });
            }
            Ok(s.pair(q, p))
        }
        let h1 = transfer_taps(pair(a, query.q, query.p)?, query.xi);
        let h2 = transfer_taps(pair(b, query.q2, query.p2)?, query.xi + query.dxi);
        acc += h1.conj() * h2;
    }
    Ok(acc / ensemble.len() as f64)
}

/// Time autocorrelation of pair `(q, p)`.
pub fn acf(ensemble: &[Vec<CirSnapshot>], q: usize, p: usize, xi: f64, t_index: usize, lag: usize) -> Result<Complex64> {
    stfcf(ensemble, StfcfQuery { q, p, q2: q, p2: p, xi, dxi: 0.0, t_index, lag })
}

/// Receive space cross-correlation between elements `q` and `q2`.
pub fn rx_ccf(ensemble: &[Vec<CirSnapshot>], q: usize, q2: usize, p: usize, xi: f64, t_index: usize) -> Result<Complex64> {
    stfcf(ensemble, StfcfQuery { q, p, q2, p2: p, xi, dxi: 0.0, t_index, lag: 0 })
}

/// Transmit space cross-correlation between elements `p` and `p2`.
pub fn tx_ccf(ensemble: &[Vec<CirSnapshot>], q: usize, p: usize, p2: usize, xi: f64, t_index: usize) -> Result<Complex64> {
    stfcf(ensemble, StfcfQuery { q, p, q2: q, p2, xi, dxi: 0.0, t_index, lag: 0 })
}

/// Frequency correlation of pair `(q, p)`.
pub fn fcf(ensemble: &[Vec<CirSnapshot>], q: usize, p: usize, xi: f64, dxi: f64, t_index: usize) -> Result<Complex64> {
    stfcf(ensemble, StfcfQuery { q, p, q2: q, p2: p, xi, dxi, t_index, lag: 0 })
}

/// Correlation values along one lag axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub lags: Vec<f64>,
    pub values: Vec<Complex64>,
    pub normalized: bool,
}

impl CorrelationResult {
    /// Divide by the magnitude of `reference` (the zero-lag value by
    /// default).
    pub fn normalized_by(&self, reference: Complex64) -> Result<CorrelationResult> {
        let n = reference.norm();
        if !(n > 0.0) {
            return Err(GbsmError::ZeroPower);
        }
        Ok(CorrelationResult {
            lags: self.lags.clone(),
            values: self.values.iter().map(|v| v / n).collect(),
            normalized: true,
        })
    }

    pub fn normalize(&self) -> Result<CorrelationResult> {
        let r = *self.values.first().ok_or(GbsmError::EmptyInput("correlation"))?;
        self.normalized_by(r)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Phase-averaged frequency correlation of a PDP,
/// `sum P exp(-j 2 pi dxi tau) / sum P`.
pub fn fcf_from_pdp(pdp: &Pdp, dxis: &[f64]) -> Result<CorrelationResult> {
    let total = pdp.total_power();
    if !(total > 0.0) {
        return Err(GbsmError::ZeroPower);
    }
    let values = dxis
        .iter()
        .map(|&d| {
            pdp.entries
                .iter()
                .map(|&(tau, p)| Complex64::from_polar(p, -2.0 * PI * d * tau))
                .sum::<Complex64>()
                / total
        })
        .collect();
    Ok(CorrelationResult { lags: dxis.to_vec(), values, normalized: true })
}

/// Frequency correlation of one transfer function sampled on a uniform
/// grid, averaged over frequency; `values[k]` is the lag of `k` bins.
pub fn fcf_by_frequency_average(h: &[Complex64], step: f64, max_lag: usize) -> Result<CorrelationResult> {
    if h.len() <= max_lag {
        return Err(invalid("max_lag", "must be smaller than the number of frequency samples"));
    }
    let values = (0..=max_lag)
        .map(|k| {
            let n = h.len() - k;
            (0..n).map(|i| h[i].conj() * h[i + k]).sum::<Complex64>() / n as f64
        })
        .collect();
    let lags = (0..=max_lag).map(|k| k as f64 * step).collect();
    CorrelationResult { lags, values, normalized: false }.normalize()
}

/// Smallest frequency lag at which `|FCF|` drops below `level`, linearly
/// interpolated between grid points. Censored at the last lag when the
/// level is never crossed.
pub fn coherence_bandwidth(fcf: &CorrelationResult, level: f64) -> Result<Censored> {
    let mags = fcf.magnitudes();
    if mags.is_empty() {
        return Err(GbsmError::EmptyInput("fcf"));
    }
    let r0 = mags[0];
    if !(r0 > 0.0) {
        return Err(GbsmError::ZeroPower);
    }
    for k in 1..mags.len() {
        let (a, b) = (mags[k - 1] / r0, mags[k] / r0);
        if b < level {
            let (x0, x1) = (fcf.lags[k - 1], fcf.lags[k]);
            let x = if a > b { x0 + (a - level) / (a - b) * (x1 - x0) } else { x1 };
            return Ok(Censored { value: x.clamp(x0, x1), censored: false });
        }
    }
    Ok(Censored { value: *fcf.lags.last().unwrap(), censored: true })
}

/// Coherence bandwidth of the phase-averaged FCF of a PDP on the lag grid
/// `k * max_lag / (points - 1)`, evaluated lazily up to the first crossing.
pub fn coherence_bandwidth_from_pdp(pdp: &Pdp, max_lag: f64, points: usize, level: f64) -> Result<Censored> {
    let total = pdp.total_power();
    if !(total > 0.0) {
        return Err(GbsmError::ZeroPower);
    }
    if points < 2 || !(max_lag > 0.0) {
        return Err(invalid("points", "need at least two lags over a positive span"));
    }
    let step = max_lag / (points - 1) as f64;
    let mag = |d: f64| {
        pdp.entries
            .iter()
            .map(|&(tau, p)| Complex64::from_polar(p, -2.0 * PI * d * tau))
            .sum::<Complex64>()
            .norm()
            / total
    };
    let mut prev = 1.0;
    for k in 1..points {
        let x1 = k as f64 * step;
        let b = mag(x1);
        if b < level {
            let x0 = x1 - step;
            let x = if prev > b { x0 + (prev - level) / (prev - b) * step } else { x1 };
            return Ok(Censored { value: x.clamp(x0, x1), censored: false });
        }
        prev = b;
    }
    Ok(Censored { value: (points - 1) as f64 * step, censored: true })
}

fn cluster_terms(state: &ChannelState, q: usize, p: usize, id: ClusterId) -> Result<Vec<[Complex64; 4]>> {
    state.cluster_gain_terms(q, p, id)
}

/// Semi-analytical time correlation of one cluster: the expectation over
/// the polarization phases is taken in closed form, while powers, fields
/// and path lengths follow the given trajectory (`trajectory[k]` at lag
/// `k`), scaled by the cluster survival probability.
pub fn analytical_acf_per_cluster(
    trajectory: &[ChannelState],
    params: &EvolutionParams,
    q: usize,
    p: usize,
    id: ClusterId,
) -> Result<CorrelationResult> {
    let first = trajectory.first().ok_or(GbsmError::EmptyInput("trajectory"))?;
    let t0 = first.time;
    let base = state_components(first, q, p, id)?;
    let mut values = Vec::with_capacity(trajectory.len());
    for s in trajectory {
        let comp = state_components(s, q, p, id)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in base.iter().zip(&comp) {
            let w: f64 = (0..4).map(|i| a.weights[i] * b.weights[i]).sum();
            let phase = b.path_phase - a.path_phase;
            acc += Complex64::from_polar((a.power * b.power).sqrt() * w, phase);
        }
        let surv = joint_survival_probability(params, 0.0, 0.0, s.time - t0);
        values.push(acc * surv / (first.config.rician_k + 1.0));
    }
    Ok(CorrelationResult {
        lags: trajectory.iter().map(|s| s.time - t0).collect(),
        values,
        normalized: false,
    })
}

struct RayComponent {
    power: f64,
    /// Field products for the VV, VH, HV, HH entries, times the squared
    /// polarization magnitudes of the first state only via the product.
    weights: [f64; 4],
    /// Exact propagation phase `-2 pi (d_rx + d_tx) / lambda`.
    path_phase: f64,
}

fn state_components(s: &ChannelState, q: usize, p: usize, id: ClusterId) -> Result<Vec<RayComponent>> {
    let index = s
        .clusters
        .iter()
        .position(|c| c.id == id)
        .ok_or_else(|| invalid("cluster", format!("cluster {id} absent from trajectory at t = {}", s.time)))?;
    let c = &s.clusters[index];
    if !s.visibility.is_visible(q, p, id) {
        return Ok(c.rays.iter().map(|_| RayComponent { power: 0.0, weights: [0.0; 4], path_phase: 0.0 }).collect());
    }
    let a_r = s.rx_array.element_position(q, s.time)?;
    let a_t = s.tx_array.element_position(p, s.time)?;
    let powers = s.ray_powers(index);
    let kappa = s.config.cross_polarization;
    let k = 2.0 * PI / s.wavelength;
    c.rays
        .iter()
        .zip(powers)
        .map(|(r, power)| {
            let fr = s.rx_array.field(r.rx_point, a_r)?;
            let ft = s.tx_array.field(r.tx_point, a_t)?;
            let amp = [
                ft.vertical * fr.vertical,
                ft.vertical * fr.horizontal * kappa.sqrt(),
                ft.horizontal * fr.vertical * kappa.sqrt(),
                ft.horizontal * fr.horizontal,
            ];
            Ok(RayComponent {
                power,
                weights: amp,
                path_phase: -k * (r.rx_point.distance(&a_r) + r.tx_point.distance(&a_t)),
            })
        })
        .collect()
}

/// Monte-Carlo time correlation of one cluster: the cluster's polarization
/// phases are redrawn `draws` times (identically at every lag) and
/// `g*(t) g(t + dt)` is averaged, with `g` the simulator's gain of the
/// cluster on the given trajectory.
pub fn simulated_acf_per_cluster(
    trajectory: &[ChannelState],
    q: usize,
    p: usize,
    id: ClusterId,
    draws: usize,
    seed: u64,
) -> Result<CorrelationResult> {
    let first = trajectory.first().ok_or(GbsmError::EmptyInput("trajectory"))?;
    if draws == 0 {
        return Err(invalid("draws", "must be > 0"));
    }
    let terms: Vec<Vec<[Complex64; 4]>> = trajectory
        .iter()
        .map(|s| cluster_terms(s, q, p, id))
        .collect::<Result<_>>()?;
    let rays = terms[0].len();
    let mut acc = vec![Complex64::new(0.0, 0.0); trajectory.len()];
    let mut rot = vec![[Complex64::new(0.0, 0.0); 4]; rays];
    for d in 0..draws {
        // same draw order as ChannelState::redraw_cluster_phases
        let mut rng = stream(seed.wrapping_add(d as u64), STREAM_PHASES);
        for r in rot.iter_mut() {
            for e in r.iter_mut() {
                let phi = 2.0 * PI * (1.0 - rng.random::<f64>());
                *e = Complex64::from_polar(1.0, phi);
            }
        }
        let gain = |t: &[[Complex64; 4]]| -> Complex64 {
            t.iter()
                .zip(&rot)
                .map(|(a, b)| a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3])
                .sum()
        };
        let g0 = gain(&terms[0]).conj();
        for (k, t) in terms.iter().enumerate() {
            acc[k] += g0 * gain(t);
        }
    }
    let t0 = first.time;
    Ok(CorrelationResult {
        lags: trajectory.iter().map(|s| s.time - t0).collect(),
        values: acc.into_iter().map(|v| v / draws as f64).collect(),
        normalized: false,
    })
}
