//! Cluster and ray data model, new-cluster generation, array-axis
//! visibility and the birth/death and power evolution primitives.
//!
//! The time-step driver that strings these together lives in
//! [`evolve_time_step`], which operates on a [`ChannelState`].

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelState, StepReport};
use crate::error::{invalid, GbsmError, Result};
use crate::geometry::Vector3;

pub type ClusterId = u64;

/// How many rays a newly generated cluster carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayCount {
    /// Deterministic ray count (zero standard deviation presets).
    Fixed(usize),
    /// `max(Pois(mean), 1)`.
    Poisson(f64),
}

impl RayCount {
    pub fn mean(&self) -> f64 {
        match *self {
            RayCount::Fixed(n) => n as f64,
            RayCount::Poisson(m) => m,
        }
    }
}

/// Birth/death, delay and power parameters shared by every cluster of a
/// realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    /// Cluster generation rate `lambda_G`, 1/m.
    pub generation_rate: f64,
    /// Cluster recombination rate `lambda_R`, 1/m.
    pub recombination_rate: f64,
    /// Fraction of moving clusters `P_F`.
    pub moving_fraction: f64,
    /// Mean relative cluster speed at the receive side, m/s.
    pub rx_cluster_speed: f64,
    /// Mean relative cluster speed at the transmit side, m/s.
    pub tx_cluster_speed: f64,
    /// Array-axis correlation distance `D_c^a`, m.
    pub array_correlation_distance: f64,
    /// Time-axis (space) correlation distance `D_c^s`, m.
    pub space_correlation_distance: f64,
    /// Coherence time of virtual links, s. `inf` freezes virtual delays.
    pub virtual_link_coherence: f64,
    /// Delay scalar `r_tau`.
    pub delay_scalar: f64,
    /// Mean of `log10(sigma_tau / 1 s)`.
    pub log_delay_spread_mean: f64,
    /// Standard deviation of `log10(sigma_tau / 1 s)`.
    pub log_delay_spread_std: f64,
    pub ray_count: RayCount,
    /// Mean relative delay of rays within a cluster, s.
    pub mean_ray_delay: f64,
    /// Standard deviation of the Laplacian per-ray angle offsets, rad.
    pub ray_angle_offset_std: f64,
    /// Per-cluster and per-ray shadowing standard deviation, dB.
    pub shadowing_std_db: f64,
    /// Linear power ramp length for appearing and disappearing clusters, s.
    pub fade_duration: f64,
    /// Path loss exponent used by the ray power evolution.
    pub power_exponent: f64,
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("generation_rate", self.generation_rate),
            ("recombination_rate", self.recombination_rate),
            ("array_correlation_distance", self.array_correlation_distance),
            ("space_correlation_distance", self.space_correlation_distance),
            ("virtual_link_coherence", self.virtual_link_coherence),
            ("delay_scalar", self.delay_scalar),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.moving_fraction) {
            return Err(invalid("moving_fraction", "must lie in [0, 1]"));
        }
        for (name, v) in [
            ("rx_cluster_speed", self.rx_cluster_speed),
            ("tx_cluster_speed", self.tx_cluster_speed),
            ("mean_ray_delay", self.mean_ray_delay),
            ("ray_angle_offset_std", self.ray_angle_offset_std),
            ("shadowing_std_db", self.shadowing_std_db),
            ("fade_duration", self.fade_duration),
            ("log_delay_spread_std", self.log_delay_spread_std),
        ] {
            if !(v >= 0.0) {
                return Err(invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        if !(self.power_exponent > 1.0) {
            return Err(invalid("power_exponent", "must be > 1"));
        }
        match self.ray_count {
            RayCount::Fixed(0) => Err(invalid("ray_count", "need at least one ray")),
            RayCount::Poisson(m) if !(m > 0.0) => Err(invalid("ray_count", "mean must be > 0")),
            _ => Ok(()),
        }
    }

    /// Mean number of clusters in equilibrium, `lambda_G / lambda_R`.
    pub fn mean_cluster_count(&self) -> f64 {
        self.generation_rate / self.recombination_rate
    }
}

/// Probability that a cluster survives a time step of `dt` seconds.
pub fn survival_probability(params: &EvolutionParams, dt: f64) -> f64 {
    let drift = params.moving_fraction * (params.rx_cluster_speed + params.tx_cluster_speed) * dt;
    (-params.recombination_rate * drift / params.space_correlation_distance).exp()
}

/// Mean of the Poisson number of clusters born during `dt`.
pub fn expected_new_clusters(params: &EvolutionParams, dt: f64) -> f64 {
    params.mean_cluster_count() * (1.0 - survival_probability(params, dt))
}

/// Joint survival of a cluster between two antenna pairs and a time lag.
pub fn joint_survival_probability(
    params: &EvolutionParams,
    tx_separation: f64,
    rx_separation: f64,
    dt: f64,
) -> f64 {
    let array = (tx_separation + rx_separation) / params.array_correlation_distance;
    let time = params.moving_fraction * (params.rx_cluster_speed + params.tx_cluster_speed) * dt
        / params.space_correlation_distance;
    (-params.recombination_rate * (array + time)).exp()
}

/// Virtual delay `-r_tau * sigma_tau * ln(u)`, `u ~ U(0, 1]`.
pub fn generate_virtual_delay<R: Rng + ?Sized>(r_tau: f64, sigma_tau: f64, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    virtual_delay_from_uniform(r_tau, sigma_tau, u)
}

pub fn virtual_delay_from_uniform(r_tau: f64, sigma_tau: f64, u: f64) -> f64 {
    -r_tau * sigma_tau * u.ln()
}

/// Unnormalized cluster power for a given shadowing draw `z_db`.
pub fn cluster_power(virtual_delay: f64, r_tau: f64, sigma_tau: f64, z_db: f64) -> f64 {
    (-virtual_delay * (r_tau - 1.0) / (r_tau * sigma_tau)).exp() * 10f64.powf(-z_db / 10.0)
}

pub fn generate_cluster_power<R: Rng + ?Sized>(
    virtual_delay: f64,
    r_tau: f64,
    sigma_tau: f64,
    shadowing_std_db: f64,
    rng: &mut R,
) -> f64 {
    let z = shadowing_std_db * rng.sample::<f64, _>(StandardNormal);
    cluster_power(virtual_delay, r_tau, sigma_tau, z)
}

/// Unnormalized ray power before scaling by the cluster power.
pub fn ray_power(relative_delay: f64, mean_ray_delay: f64, r_tau: f64, z_db: f64) -> f64 {
    let profile = if mean_ray_delay > 0.0 {
        (-relative_delay * (r_tau - 1.0) / mean_ray_delay).exp()
    } else {
        1.0
    };
    profile * 10f64.powf(-z_db / 10.0)
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Location and spread of one wrapped-Gaussian angle parameter, rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleDist {
    pub mean: f64,
    pub std: f64,
}

impl AngleDist {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let y: f64 = rng.sample(StandardNormal);
        wrap_angle(self.std * y + self.mean)
    }
}

/// Cluster mean angles: azimuth/elevation of arrival and of departure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleStats {
    pub arrival_azimuth: AngleDist,
    pub arrival_elevation: AngleDist,
    pub departure_azimuth: AngleDist,
    pub departure_elevation: AngleDist,
}

/// Mean and standard deviation of a positive distance, m. Sampled from a
/// Gamma law matching both moments (exponential when they coincide).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceDist {
    pub mean: f64,
    pub std: f64,
}

impl DistanceDist {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std <= 0.0 {
            return self.mean;
        }
        let shape = (self.mean / self.std).powi(2);
        let scale = self.std * self.std / self.mean;
        // shape and scale are positive here, construction cannot fail
        let g = Gamma::new(shape, scale).expect("valid gamma parameters");
        g.sample(rng).max(f64::MIN_POSITIVE)
    }
}

/// Sample the four cluster mean angles `(AoA az, AoA el, AoD az, AoD el)`.
/// Elevations are forced to zero in planar mode.
pub fn generate_cluster_angles<R: Rng + ?Sized>(
    stats: &AngleStats,
    planar: bool,
    rng: &mut R,
) -> [f64; 4] {
    let aa = stats.arrival_azimuth.sample(rng);
    let ae = stats.arrival_elevation.sample(rng);
    let da = stats.departure_azimuth.sample(rng);
    let de = stats.departure_elevation.sample(rng);
    if planar {
        [aa, 0.0, da, 0.0]
    } else {
        [aa, ae, da, de]
    }
}

/// Zero-mean Laplace sample with standard deviation `std`.
pub fn sample_laplace<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    let b = std / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 2pi]
    2.0 * PI * (1.0 - rng.random::<f64>())
}

/// One ray (sub-path) of a cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    /// Relative delay within the cluster, s.
    pub relative_delay: f64,
    /// Unnormalized mean power, linear.
    pub power: f64,
    /// `(arrival az, arrival el, departure az, departure el)` offsets, rad.
    pub angle_offsets: [f64; 4],
    /// Polarization phases `(VV, VH, HV, HH)` in `(0, 2pi]`.
    pub phases: [f64; 4],
    /// Last-bounce scatterer point reached via this ray (global frame).
    pub rx_point: Vector3,
    /// First-bounce scatterer point reached via this ray (global frame).
    pub tx_point: Vector3,
    /// Accumulated propagation phase towards each receive element, rad.
    pub rx_phase: Vec<f64>,
    /// Accumulated propagation phase towards each transmit element, rad.
    pub tx_phase: Vec<f64>,
}

impl Ray {
    pub fn draw_phases<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for p in &mut self.phases {
            *p = uniform_phase(rng);
        }
    }
}

/// Ray template produced by [`generate_ray_set`], before geometry is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct RayDraw {
    pub relative_delay: f64,
    pub power: f64,
    pub angle_offsets: [f64; 4],
    pub phases: [f64; 4],
}

/// Draw the rays of a new cluster. Powers are the unscaled per-ray values;
/// combine with [`scale_ray_powers`].
pub fn generate_ray_set<R: Rng + ?Sized>(
    count: RayCount,
    mean_ray_delay: f64,
    r_tau: f64,
    offset_std: f64,
    shadowing_std_db: f64,
    rng: &mut R,
    phase_rng: &mut R,
) -> Vec<RayDraw> {
    let n = match count {
        RayCount::Fixed(n) => n.max(1),
        RayCount::Poisson(mean) => sample_poisson(mean, rng).max(1),
    };
    let delay_law = (mean_ray_delay > 0.0).then(|| Exp::new(1.0 / mean_ray_delay).expect("positive rate"));
    (0..n)
        .map(|_| {
            let relative_delay = delay_law.map_or(0.0, |d| d.sample(rng));
            let z = shadowing_std_db * rng.sample::<f64, _>(StandardNormal);
            let power = ray_power(relative_delay, mean_ray_delay, r_tau, z);
            let mut angle_offsets = [0.0; 4];
            for o in &mut angle_offsets {
                *o = sample_laplace(offset_std, rng);
            }
            let mut phases = [0.0; 4];
            for p in &mut phases {
                *p = uniform_phase(phase_rng);
            }
            RayDraw {
                relative_delay,
                power,
                angle_offsets,
                phases,
            }
        })
        .collect()
}

pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let p = Poisson::new(mean).expect("positive mean");
    p.sample(rng) as usize
}

/// Scale ray powers so that they sum to `cluster_power`.
pub fn scale_ray_powers(cluster_power: f64, ray_powers: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = ray_powers.iter().sum();
    if !(total > 0.0) {
        return Err(GbsmError::ZeroPower);
    }
    Ok(ray_powers
        .iter()
        .map(|p| cluster_power * p / total)
        .collect())
}

/// Ray power after the cluster delay moved from `tau_prev` to `tau_next`,
/// first-order accurate for power falling off as `(delay)^-eta`. Negative
/// results (large jumps) are clamped to zero.
pub fn power_evolution(p_prev: f64, tau_prev: f64, tau_next: f64, tau_ray: f64, eta: f64) -> Result<f64> {
    let den = tau_prev + tau_ray;
    if den == 0.0 {
        return Err(invalid("tau_prev + tau_ray", "zero denominator"));
    }
    let num = (eta + 1.0) * tau_prev - eta * tau_next + tau_ray;
    Ok((p_prev * num / den).max(0.0))
}

/// Autoregressive virtual delay update with a fresh draw `fresh`.
pub fn update_virtual_delay(prev: f64, dt: f64, coherence: f64, fresh: f64) -> f64 {
    let a = (-dt / coherence).exp();
    a * prev + (1.0 - a) * fresh
}

/// Lifecycle stage. Appearing and disappearing clusters ramp their power
/// linearly over `fade_duration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lifecycle {
    Active,
    FadingIn { since: f64 },
    FadingOut { since: f64 },
}

// Slack on time comparisons accumulated from repeated `t += dt`.
pub(crate) const TIME_EPS: f64 = 1e-12;

impl Lifecycle {
    /// Multiplicative power ramp at time `t`.
    pub fn ramp(&self, t: f64, fade: f64) -> f64 {
        match *self {
            Lifecycle::Active => 1.0,
            Lifecycle::FadingIn { since } => {
                if fade <= 0.0 {
                    1.0
                } else {
                    ((t - since) / fade).clamp(0.0, 1.0)
                }
            }
            Lifecycle::FadingOut { since } => {
                if fade <= 0.0 {
                    0.0
                } else {
                    (1.0 - (t - since) / fade).clamp(0.0, 1.0)
                }
            }
        }
    }

    pub fn is_fading_out(&self) -> bool {
        matches!(self, Lifecycle::FadingOut { .. })
    }
}

/// An effective scatterer pair (first and last bounce) with its rays.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: ClusterId,
    pub rays: Vec<Ray>,
    /// `(azimuth, elevation)` of the cluster seen from the receive array.
    pub arrival: (f64, f64),
    /// `(azimuth, elevation)` of the cluster seen from the transmit array.
    pub departure: (f64, f64),
    /// Initial distances to the receive and transmit array centers, m.
    pub rx_distance: f64,
    pub tx_distance: f64,
    /// Last-bounce position in the global frame.
    pub rx_point: Vector3,
    /// First-bounce position in the global frame.
    pub tx_point: Vector3,
    pub virtual_delay: f64,
    /// Cluster delay `tau_n` at the current time, s.
    pub delay: f64,
    pub rx_velocity: Vector3,
    pub tx_velocity: Vector3,
    pub lifecycle: Lifecycle,
    pub birth_time: f64,
}

impl Cluster {
    /// Total unnormalized power of the cluster.
    pub fn power(&self) -> f64 {
        self.rays.iter().map(|r| r.power).sum()
    }
}

/// Per-antenna observable cluster sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VisibilitySet {
    pub rx: Vec<BTreeSet<ClusterId>>,
    pub tx: Vec<BTreeSet<ClusterId>>,
}

impl VisibilitySet {
    pub fn new(rx_elements: usize, tx_elements: usize) -> Self {
        Self {
            rx: vec![BTreeSet::new(); rx_elements],
            tx: vec![BTreeSet::new(); tx_elements],
        }
    }

    pub fn is_visible(&self, q: usize, p: usize, id: ClusterId) -> bool {
        self.rx[q].contains(&id) && self.tx[p].contains(&id)
    }

    /// Clusters observable by both receive element `q` and transmit element `p`.
    pub fn shared(&self, q: usize, p: usize) -> BTreeSet<ClusterId> {
        self.rx[q].intersection(&self.tx[p]).copied().collect()
    }

    /// Clusters observable by at least one antenna pair.
    pub fn observable(&self) -> BTreeSet<ClusterId> {
        let rx: BTreeSet<ClusterId> = self.rx.iter().flatten().copied().collect();
        let tx: BTreeSet<ClusterId> = self.tx.iter().flatten().copied().collect();
        rx.intersection(&tx).copied().collect()
    }

    pub fn observable_count(&self) -> usize {
        self.observable().len()
    }

    pub fn remove(&mut self, id: ClusterId) {
        for s in self.rx.iter_mut().chain(self.tx.iter_mut()) {
            s.remove(&id);
        }
    }
}

/// Antennas that observe a new cluster on one side of the link: a random
/// anchor element plus every element within an exponentially distributed
/// radius (rate `lambda_R / D_c^a`) of it. With `array_evolution` off every
/// element observes it.
pub fn visible_elements<R: Rng + ?Sized>(
    positions: &[Vector3],
    params: &EvolutionParams,
    array_evolution: bool,
    rng: &mut R,
) -> Vec<usize> {
    if !array_evolution || positions.len() == 1 {
        return (0..positions.len()).collect();
    }
    let anchor = rng.random_range(0..positions.len());
    let rate = params.recombination_rate / params.array_correlation_distance;
    let r = Exp::new(rate).expect("positive rate").sample(rng);
    positions
        .iter()
        .enumerate()
        .filter(|(_, a)| a.distance(&positions[anchor]) <= r)
        .map(|(i, _)| i)
        .collect()
}

/// `P[q][q']`: probability that elements `q` and `q'` both observe a new
/// cluster, averaged over the uniformly drawn anchor element.
pub fn pair_visibility_probability(positions: &[Vector3], params: &EvolutionParams, array_evolution: bool) -> Vec<Vec<f64>> {
    let m = positions.len();
    if !array_evolution || m == 1 {
        return vec![vec![1.0; m]; m];
    }
    let rate = params.recombination_rate / params.array_correlation_distance;
    let d: Vec<Vec<f64>> = positions
        .iter()
        .map(|a| positions.iter().map(|b| a.distance(b)).collect())
        .collect();
    (0..m)
        .map(|q| {
            (0..m)
                .map(|q2| (0..m).map(|a| (-rate * d[q][a].max(d[q2][a])).exp()).sum::<f64>() / m as f64)
                .collect()
        })
        .collect()
}

/// Add cluster `id` to the visibility sets of both arrays.
pub fn assign_visibility<R: Rng + ?Sized>(
    id: ClusterId,
    rx_positions: &[Vector3],
    tx_positions: &[Vector3],
    params: &EvolutionParams,
    array_evolution: bool,
    vis: &mut VisibilitySet,
    rng: &mut R,
) {
    for q in visible_elements(rx_positions, params, array_evolution, rng) {
        vis.rx[q].insert(id);
    }
    for p in visible_elements(tx_positions, params, array_evolution, rng) {
        vis.tx[p].insert(id);
    }
}

/// Velocity of one bounce of a cluster. Moving clusters travel at
/// `mean_speed / moving_fraction` in a uniformly random direction so the
/// population mean speed equals `mean_speed`.
pub fn sample_cluster_velocity<R: Rng + ?Sized>(
    mean_speed: f64,
    moving_fraction: f64,
    moving: bool,
    planar: bool,
    rng: &mut R,
) -> Vector3 {
    if !moving || mean_speed == 0.0 || moving_fraction == 0.0 {
        return Vector3::ZERO;
    }
    let speed = mean_speed / moving_fraction;
    let az = rng.random_range(-PI..PI);
    let el = if planar {
        0.0
    } else {
        (rng.random_range(-1.0..1.0f64)).asin()
    };
    Vector3::from_spherical(speed, az, el)
}

/// Draw a log-normal per-realization delay spread `sigma_tau`, s.
pub fn sample_delay_spread<R: Rng + ?Sized>(params: &EvolutionParams, rng: &mut R) -> f64 {
    let n = Normal::new(params.log_delay_spread_mean, params.log_delay_spread_std.max(0.0))
        .expect("finite std");
    10f64.powf(n.sample(rng))
}

/// Advance a realization by `dt`: move arrays and scatterers, update
/// delays and powers, kill clusters, and spawn new ones.
pub fn evolve_time_step(state: &mut ChannelState, dt: f64) -> Result<StepReport> {
    state.evolve(dt)
}
