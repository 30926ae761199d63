//! Evolving channel realization and impulse response assembly.
//!
//! All positions live in one global frame whose origin is the transmit
//! array center at `t = 0`; the receive array starts at `(D, 0, 0)`.
//! Scatterer points are stored in that frame and translate with their own
//! velocities, so every distance vector between an element and a scatterer
//! is recomputed exactly at the current time.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::clusters::{
    assign_visibility, generate_cluster_angles, generate_cluster_power, generate_ray_set,
    generate_virtual_delay, power_evolution, sample_cluster_velocity, sample_delay_spread,
    sample_poisson, scale_ray_powers, survival_probability, expected_new_clusters,
    update_virtual_delay, Cluster, ClusterId, Lifecycle, Ray, VisibilitySet, TIME_EPS,
};
use crate::error::{invalid, GbsmError, Result};
use crate::geometry::{AntennaArray, PolarizedField, Vector3};
use crate::rng::{stream, SimRng, STREAM_EVOLUTION, STREAM_PHASES, STREAM_VISIBILITY};
use crate::scenarios::ScenarioConfig;
use crate::SPEED_OF_LIGHT;

/// One resolvable multipath component between an antenna pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Propagation delay, s.
    pub delay: f64,
    pub gain: Complex64,
}

/// Delay and normalized mean power of one ray, independent of antennas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRecord {
    pub cluster_id: ClusterId,
    pub ray: u32,
    pub delay: f64,
    pub power: f64,
}

/// Impulse response of every antenna pair at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CirSnapshot {
    pub time: f64,
    pub rx_elements: usize,
    pub tx_elements: usize,
    /// Tap lists indexed by `q * tx_elements + p`. The LOS tap, when
    /// present, comes first.
    pub taps: Vec<Vec<Tap>>,
    /// Every NLOS ray with its normalized power (fade ramps applied).
    pub paths: Vec<PathRecord>,
}

impl CirSnapshot {
    pub fn pair(&self, q: usize, p: usize) -> &[Tap] {
        &self.taps[q * self.tx_elements + p]
    }

    /// Sum of normalized NLOS ray powers.
    pub fn total_path_power(&self) -> f64 {
        self.paths.iter().map(|p| p.power).sum()
    }
}

/// Counters describing what happened during one evolution step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Clusters subjected to the survival draw.
    pub survival_trials: usize,
    /// Clusters that failed the survival draw.
    pub survival_deaths: usize,
    pub births: usize,
    /// Clusters sent to fade-out because their evolved power went negative.
    pub clamped: usize,
    /// Clusters removed after completing their fade-out.
    pub removed: usize,
}

/// Doppler shift of a path along `distance` (pointing from the antenna to
/// the far end) for the given array and far-end velocities, Hz.
pub fn doppler_nlos(distance: Vector3, v_array: Vector3, v_cluster: Vector3, wavelength: f64) -> Result<f64> {
    let n = distance.norm();
    if n == 0.0 {
        return Err(GbsmError::CoincidentPoints);
    }
    Ok(distance.dot(&(v_array - v_cluster)) / n / wavelength)
}

/// Product `F_T^T M F_R` for a 2x2 polarization matrix given row-major.
fn polarize(ft: PolarizedField, m: [Complex64; 4], fr: PolarizedField) -> Complex64 {
    (m[0] * fr.vertical + m[1] * fr.horizontal) * ft.vertical
        + (m[2] * fr.vertical + m[3] * fr.horizontal) * ft.horizontal
}

fn field_or_zero(array: &AntennaArray, a: Vector3, b: Vector3) -> PolarizedField {
    array.field(a, b).unwrap_or(PolarizedField {
        vertical: 0.0,
        horizontal: 0.0,
    })
}

/// Global-frame distance vectors of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterVectors {
    /// Last-bounce position.
    pub rx_cluster: Vector3,
    /// First-bounce position.
    pub tx_cluster: Vector3,
    /// Per-ray last-bounce positions.
    pub rx_rays: Vec<Vector3>,
    /// Per-ray first-bounce positions.
    pub tx_rays: Vec<Vector3>,
    /// `[ray][q]` vectors from receive element `q` to the ray scatterer.
    pub rx_elements: Vec<Vec<Vector3>>,
    /// `[ray][p]` vectors from transmit element `p` to the ray scatterer.
    pub tx_elements: Vec<Vec<Vector3>>,
}

/// Full evolving state of one realization.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub config: ScenarioConfig,
    pub rx_array: AntennaArray,
    pub tx_array: AntennaArray,
    pub clusters: Vec<Cluster>,
    pub visibility: VisibilitySet,
    pub time: f64,
    pub wavelength: f64,
    /// LOS phase shared by every antenna pair.
    pub los_phase: f64,
    /// Delay spread drawn for this realization, s.
    pub sigma_tau: f64,
    next_id: ClusterId,
    rng_evolution: SimRng,
    rng_phases: SimRng,
    rng_visibility: SimRng,
}

impl ChannelState {
    /// Initial state: a Poisson number of clusters with mean
    /// `lambda_G / lambda_R`, all fully active at `t = 0`.
    pub fn new(config: &ScenarioConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let wavelength = config.wavelength();
        let rx_array = config.rx.build(Vector3::new(config.distance, 0.0, 0.0), wavelength)?;
        let tx_array = config.tx.build(Vector3::ZERO, wavelength)?;
        let mut rng_evolution = stream(seed, STREAM_EVOLUTION);
        let mut rng_phases = stream(seed, STREAM_PHASES);
        let sigma_tau = sample_delay_spread(&config.evolution, &mut rng_evolution);
        let los_phase = 2.0 * PI * (1.0 - rng_phases.random::<f64>());
        let visibility = VisibilitySet::new(rx_array.len(), tx_array.len());
        let mut state = Self {
            config: config.clone(),
            rx_array,
            tx_array,
            clusters: Vec::new(),
            visibility,
            time: 0.0,
            wavelength,
            los_phase,
            sigma_tau,
            next_id: 1,
            rng_evolution,
            rng_phases,
            rng_visibility: stream(seed, STREAM_VISIBILITY),
        };
        let n0 = sample_poisson(config.evolution.mean_cluster_count(), &mut state.rng_evolution);
        for _ in 0..n0 {
            state.spawn_cluster(Lifecycle::Active)?;
        }
        Ok(state)
    }

    pub fn rx_positions(&self) -> Vec<Vector3> {
        self.rx_array.positions_at(self.time)
    }

    pub fn tx_positions(&self) -> Vec<Vector3> {
        self.tx_array.positions_at(self.time)
    }

    /// `N(t)`: clusters that are not on their way out.
    pub fn cluster_count(&self) -> usize {
        self.clusters
            .iter()
            .filter(|c| !c.lifecycle.is_fading_out())
            .count()
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    fn spawn_cluster(&mut self, lifecycle: Lifecycle) -> Result<()> {
        let cfg = &self.config;
        let ev = &cfg.evolution;
        let rng = &mut self.rng_evolution;
        let t = self.time;
        let virtual_delay = generate_virtual_delay(ev.delay_scalar, self.sigma_tau, rng);
        let power = generate_cluster_power(
            virtual_delay,
            ev.delay_scalar,
            self.sigma_tau,
            ev.shadowing_std_db,
            rng,
        );
        let [aa, ae, da, de] = generate_cluster_angles(&cfg.angles, cfg.planar, rng);
        let draws = generate_ray_set(
            ev.ray_count,
            ev.mean_ray_delay,
            ev.delay_scalar,
            ev.ray_angle_offset_std,
            ev.shadowing_std_db,
            rng,
            &mut self.rng_phases,
        );
        let raw: Vec<f64> = draws.iter().map(|d| d.power).collect();
        let powers = scale_ray_powers(power, &raw)?;
        let d_rx = cfg.rx_cluster_distance.sample(rng);
        let d_tx = cfg.tx_cluster_distance.sample(rng);
        let moving = rng.random::<f64>() < ev.moving_fraction;
        let v_rx = sample_cluster_velocity(ev.rx_cluster_speed, ev.moving_fraction, moving, cfg.planar, rng);
        let v_tx = sample_cluster_velocity(ev.tx_cluster_speed, ev.moving_fraction, moving, cfg.planar, rng);

        let c_rx = self.rx_array.center_at(t);
        let c_tx = self.tx_array.center_at(t);
        let rx_pos = self.rx_array.positions_at(t);
        let tx_pos = self.tx_array.positions_at(t);
        let k = 2.0 * PI / self.wavelength;
        let spherical = cfg.spherical_phase;
        let rays = draws
            .into_iter()
            .zip(powers)
            .map(|(d, p)| {
                let mut off = d.angle_offsets;
                if cfg.planar {
                    off[1] = 0.0;
                    off[3] = 0.0;
                }
                let rx_point = c_rx + Vector3::from_spherical(d_rx, aa + off[0], ae + off[1]);
                let tx_point = c_tx + Vector3::from_spherical(d_tx, da + off[2], de + off[3]);
                let phase = |point: Vector3, pos: &[Vector3]| -> Vec<f64> {
                    pos.iter()
                        .map(|a| if spherical { -k * point.distance(a) } else { 0.0 })
                        .collect()
                };
                Ray {
                    relative_delay: d.relative_delay,
                    power: p,
                    angle_offsets: off,
                    phases: d.phases,
                    rx_phase: phase(rx_point, &rx_pos),
                    tx_phase: phase(tx_point, &tx_pos),
                    rx_point,
                    tx_point,
                }
            })
            .collect();
        let rx_point = c_rx + Vector3::from_spherical(d_rx, aa, ae);
        let tx_point = c_tx + Vector3::from_spherical(d_tx, da, de);
        let id = self.next_id;
        self.next_id += 1;
        let mut cluster = Cluster {
            id,
            rays,
            arrival: (aa, ae),
            departure: (da, de),
            rx_distance: d_rx,
            tx_distance: d_tx,
            rx_point,
            tx_point,
            virtual_delay,
            delay: 0.0,
            rx_velocity: v_rx,
            tx_velocity: v_tx,
            lifecycle,
            birth_time: t,
        };
        cluster.delay = self.nlos_delay(&cluster);
        assign_visibility(
            id,
            &rx_pos,
            &tx_pos,
            ev,
            cfg.array_evolution,
            &mut self.visibility,
            &mut self.rng_visibility,
        );
        self.clusters.push(cluster);
        Ok(())
    }

    /// Cluster delay: geometric two-hop delay from the current array
    /// centers plus the virtual delay.
    pub fn nlos_delay(&self, cluster: &Cluster) -> f64 {
        let c_rx = self.rx_array.center_at(self.time);
        let c_tx = self.tx_array.center_at(self.time);
        (cluster.rx_point.distance(&c_rx) + cluster.tx_point.distance(&c_tx)) / SPEED_OF_LIGHT
            + cluster.virtual_delay
    }

    /// Advance by `dt` seconds.
    pub fn evolve(&mut self, dt: f64) -> Result<StepReport> {
        if !(dt > 0.0) {
            return Err(invalid("dt", format!("must be > 0, got {dt}")));
        }
        let mut report = StepReport::default();
        self.accumulate_phases(dt);

        for c in &mut self.clusters {
            let (vr, vt) = (c.rx_velocity * dt, c.tx_velocity * dt);
            c.rx_point += vr;
            c.tx_point += vt;
            for r in &mut c.rays {
                r.rx_point += vr;
                r.tx_point += vt;
            }
        }
        self.time += dt;
        let t = self.time;

        let ev = self.config.evolution.clone();
        for i in 0..self.clusters.len() {
            let fresh = generate_virtual_delay(ev.delay_scalar, self.sigma_tau, &mut self.rng_evolution);
            let c = &mut self.clusters[i];
            c.virtual_delay = update_virtual_delay(c.virtual_delay, dt, ev.virtual_link_coherence, fresh);
            let tau_prev = c.delay;
            let tau_next = self.nlos_delay(&self.clusters[i]);
            let c = &mut self.clusters[i];
            let mut clamped = false;
            for r in &mut c.rays {
                let p = power_evolution(r.power, tau_prev, tau_next, r.relative_delay, ev.power_exponent)?;
                clamped |= p == 0.0 && r.power > 0.0;
                r.power = p;
            }
            c.delay = tau_next;
            if clamped && !c.lifecycle.is_fading_out() {
                c.lifecycle = Lifecycle::FadingOut { since: t };
                report.clamped += 1;
            }
        }

        let fade = ev.fade_duration;
        let before = self.clusters.len();
        let mut gone = Vec::new();
        self.clusters.retain(|c| match c.lifecycle {
            Lifecycle::FadingOut { since } if t - since >= fade - TIME_EPS && since < t => {
                gone.push(c.id);
                false
            }
            _ => true,
        });
        report.removed = before - self.clusters.len();
        for id in gone {
            self.visibility.remove(id);
        }

        let p_t = survival_probability(&ev, dt);
        for c in &mut self.clusters {
            if c.lifecycle.is_fading_out() {
                continue;
            }
            report.survival_trials += 1;
            // always consume one draw so the stream layout does not depend on p_t
            let u: f64 = self.rng_evolution.random();
            if u >= p_t {
                c.lifecycle = Lifecycle::FadingOut { since: t };
                report.survival_deaths += 1;
            }
        }

        let births = sample_poisson(expected_new_clusters(&ev, dt), &mut self.rng_evolution);
        for c in &mut self.clusters {
            if let Lifecycle::FadingIn { since } = c.lifecycle {
                if t - since >= fade - TIME_EPS {
                    c.lifecycle = Lifecycle::Active;
                }
            }
        }
        for _ in 0..births {
            self.spawn_cluster(Lifecycle::FadingIn { since: t })?;
        }
        report.births = births;
        Ok(report)
    }

    fn accumulate_phases(&mut self, dt: f64) {
        let rx_pos = self.rx_positions();
        let tx_pos = self.tx_positions();
        let (vr, vt) = (self.rx_array.velocity, self.tx_array.velocity);
        let w = 2.0 * PI * dt;
        let lambda = self.wavelength;
        for c in &mut self.clusters {
            for r in &mut c.rays {
                for (q, a) in rx_pos.iter().enumerate() {
                    if let Ok(f) = doppler_nlos(r.rx_point - *a, vr, c.rx_velocity, lambda) {
                        r.rx_phase[q] += w * f;
                    }
                }
                for (p, a) in tx_pos.iter().enumerate() {
                    if let Ok(f) = doppler_nlos(r.tx_point - *a, vt, c.tx_velocity, lambda) {
                        r.tx_phase[p] += w * f;
                    }
                }
            }
        }
    }

    /// `A_q^R(t) - A_p^T(t)`.
    pub fn los_distance(&self, q: usize, p: usize) -> Result<Vector3> {
        Ok(self.rx_array.element_position(q, self.time)? - self.tx_array.element_position(p, self.time)?)
    }

    /// LOS Doppler shift between receive element `q` and transmit element `p`.
    pub fn doppler_los(&self, q: usize, p: usize) -> Result<f64> {
        let d = self.los_distance(q, p)?;
        doppler_nlos(d, self.rx_array.velocity, self.tx_array.velocity, self.wavelength)
    }

    /// Unweighted LOS gain. The propagation phase follows the exact path
    /// length so that it stays consistent with the NLOS phases.
    pub fn los_gain(&self, q: usize, p: usize) -> Result<Complex64> {
        let a_r = self.rx_array.element_position(q, self.time)?;
        let a_t = self.tx_array.element_position(p, self.time)?;
        let ft = self.tx_array.field(a_r, a_t)?;
        let fr = self.rx_array.field(a_t, a_r)?;
        let e = Complex64::from_polar(1.0, self.los_phase);
        let pol = polarize(ft, [e, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), -e], fr);
        let d_now = a_r.distance(&a_t);
        let reference = if self.config.spherical_phase {
            0.0
        } else {
            self.rx_array
                .element_position(q, 0.0)?
                .distance(&self.tx_array.element_position(p, 0.0)?)
        };
        let phase = -2.0 * PI * (d_now - reference) / self.wavelength;
        Ok(pol * Complex64::from_polar(1.0, phase))
    }

    /// LOS delay from the array centers, s.
    pub fn los_delay(&self) -> f64 {
        self.rx_array
            .center_at(self.time)
            .distance(&self.tx_array.center_at(self.time))
            / SPEED_OF_LIGHT
    }

    pub fn cluster_vectors(&self, cluster: &Cluster) -> ClusterVectors {
        let rx_pos = self.rx_positions();
        let tx_pos = self.tx_positions();
        ClusterVectors {
            rx_cluster: cluster.rx_point,
            tx_cluster: cluster.tx_point,
            rx_rays: cluster.rays.iter().map(|r| r.rx_point).collect(),
            tx_rays: cluster.rays.iter().map(|r| r.tx_point).collect(),
            rx_elements: cluster
                .rays
                .iter()
                .map(|r| rx_pos.iter().map(|a| r.rx_point - *a).collect())
                .collect(),
            tx_elements: cluster
                .rays
                .iter()
                .map(|r| tx_pos.iter().map(|a| r.tx_point - *a).collect())
                .collect(),
        }
    }

    /// Sum of unnormalized ray powers of all clusters.
    pub fn total_power(&self) -> f64 {
        self.clusters.iter().map(Cluster::power).sum()
    }

    /// Normalized ray powers per cluster with fade ramps applied.
    fn normalized_powers(&self) -> Vec<Vec<f64>> {
        let total = self.total_power();
        let fade = self.config.evolution.fade_duration;
        self.clusters
            .iter()
            .map(|c| {
                let ramp = c.lifecycle.ramp(self.time, fade);
                c.rays
                    .iter()
                    .map(|r| if total > 0.0 { r.power / total * ramp } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Delay/power list of every ray, without antenna gains.
    pub fn paths(&self) -> Vec<PathRecord> {
        let powers = self.normalized_powers();
        let mut out = Vec::new();
        for (c, pw) in self.clusters.iter().zip(&powers) {
            for (m, (r, &p)) in c.rays.iter().zip(pw).enumerate() {
                out.push(PathRecord {
                    cluster_id: c.id,
                    ray: m as u32,
                    delay: c.delay + r.relative_delay,
                    power: p,
                });
            }
        }
        out
    }

    fn polarization_matrix(&self, r: &Ray) -> [Complex64; 4] {
        let s = self.config.cross_polarization.sqrt();
        let [vv, vh, hv, hh] = r.phases;
        [
            Complex64::from_polar(1.0, vv),
            Complex64::from_polar(s, vh),
            Complex64::from_polar(s, hv),
            Complex64::from_polar(1.0, hh),
        ]
    }

    fn ray_gain(
        &self,
        r: &Ray,
        power: f64,
        q: usize,
        p: usize,
        fr: PolarizedField,
        ft: PolarizedField,
    ) -> Complex64 {
        let pol = polarize(ft, self.polarization_matrix(r), fr);
        pol * power.sqrt() * Complex64::from_polar(1.0, r.rx_phase[q] + r.tx_phase[p])
    }

    /// Unweighted NLOS gain of ray `ray` of the cluster at `index`; zero when
    /// the cluster is not observable by the pair.
    pub fn nlos_gain(&self, q: usize, p: usize, index: usize, ray: usize) -> Result<Complex64> {
        let c = self
            .clusters
            .get(index)
            .ok_or(GbsmError::IndexOutOfRange { index, len: self.clusters.len() })?;
        let r = c
            .rays
            .get(ray)
            .ok_or(GbsmError::IndexOutOfRange { index: ray, len: c.rays.len() })?;
        if !self.visibility.is_visible(q, p, c.id) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let power = self.normalized_powers()[index][ray];
        let a_r = self.rx_array.element_position(q, self.time)?;
        let a_t = self.tx_array.element_position(p, self.time)?;
        let fr = field_or_zero(&self.rx_array, r.rx_point, a_r);
        let ft = field_or_zero(&self.tx_array, r.tx_point, a_t);
        Ok(self.ray_gain(r, power, q, p, fr, ft))
    }

    /// Normalized, ramped powers of the rays of the cluster at `index`.
    pub fn ray_powers(&self, index: usize) -> Vec<f64> {
        let total = self.total_power();
        let c = &self.clusters[index];
        let ramp = c.lifecycle.ramp(self.time, self.config.evolution.fade_duration);
        c.rays
            .iter()
            .map(|r| if total > 0.0 { r.power / total * ramp } else { 0.0 })
            .collect()
    }

    /// Phase-free parts of the weighted gain of each ray of a cluster, so
    /// that the gain is `sum_m sum_i terms[m][i] exp(j Phi_m,i)` over the
    /// VV, VH, HV, HH polarization phases.
    pub fn cluster_gain_terms(&self, q: usize, p: usize, id: ClusterId) -> Result<Vec<[Complex64; 4]>> {
        let index = self
            .clusters
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| invalid("cluster", format!("no cluster with id {id}")))?;
        let c = &self.clusters[index];
        if !self.visibility.is_visible(q, p, id) {
            return Ok(vec![[Complex64::new(0.0, 0.0); 4]; c.rays.len()]);
        }
        let a_r = self.rx_array.element_position(q, self.time)?;
        let a_t = self.tx_array.element_position(p, self.time)?;
        let w = (1.0 / (self.config.rician_k + 1.0)).sqrt();
        let s = self.config.cross_polarization.sqrt();
        Ok(c.rays
            .iter()
            .zip(self.ray_powers(index))
            .map(|(r, power)| {
                let fr = field_or_zero(&self.rx_array, r.rx_point, a_r);
                let ft = field_or_zero(&self.tx_array, r.tx_point, a_t);
                let common = Complex64::from_polar(w * power.sqrt(), r.rx_phase[q] + r.tx_phase[p]);
                [
                    common * (ft.vertical * fr.vertical),
                    common * (ft.vertical * fr.horizontal * s),
                    common * (ft.horizontal * fr.vertical * s),
                    common * (ft.horizontal * fr.horizontal),
                ]
            })
            .collect())
    }

    /// Sum of the weighted NLOS gains of one cluster for a pair.
    pub fn cluster_gain(&self, q: usize, p: usize, id: ClusterId) -> Result<Complex64> {
        let index = self
            .clusters
            .iter()
            .position(|c| c.id == id)
            .ok_or(GbsmError::IndexOutOfRange { index: id as usize, len: self.clusters.len() })?;
        let w = (1.0 / (self.config.rician_k + 1.0)).sqrt();
        let mut sum = Complex64::new(0.0, 0.0);
        for m in 0..self.clusters[index].rays.len() {
            sum += self.nlos_gain(q, p, index, m)?;
        }
        Ok(sum * w)
    }

    /// Redraw the polarization phases of the given clusters from a private
    /// stream; the realization's own streams are untouched.
    pub fn redraw_cluster_phases(&mut self, ids: &[ClusterId], seed: u64) {
        let mut rng = stream(seed, STREAM_PHASES);
        for &id in ids {
            if let Some(c) = self.clusters.iter_mut().find(|c| c.id == id) {
                for r in &mut c.rays {
                    r.draw_phases(&mut rng);
                }
            }
        }
    }

    /// Impulse response of every antenna pair.
    pub fn snapshot(&self) -> Result<CirSnapshot> {
        let m_r = self.rx_array.len();
        let m_t = self.tx_array.len();
        let rx_pos = self.rx_positions();
        let tx_pos = self.tx_positions();
        let k = self.config.rician_k;
        let w_nlos = (1.0 / (k + 1.0)).sqrt();
        let mut taps: Vec<Vec<Tap>> = vec![Vec::new(); m_r * m_t];
        if k > 0.0 {
            let w = (1.0 / (1.0 + 1.0 / k)).sqrt();
            let delay = self.los_delay();
            for q in 0..m_r {
                for p in 0..m_t {
                    taps[q * m_t + p].push(Tap {
                        delay,
                        gain: self.los_gain(q, p)? * w,
                    });
                }
            }
        }
        let powers = self.normalized_powers();
        let mut fr = vec![PolarizedField { vertical: 0.0, horizontal: 0.0 }; m_r];
        let mut ft = vec![PolarizedField { vertical: 0.0, horizontal: 0.0 }; m_t];
        for (c, pw) in self.clusters.iter().zip(&powers) {
            let rx_vis: Vec<bool> = (0..m_r).map(|q| self.visibility.rx[q].contains(&c.id)).collect();
            let tx_vis: Vec<bool> = (0..m_t).map(|p| self.visibility.tx[p].contains(&c.id)).collect();
            for (r, &power) in c.rays.iter().zip(pw) {
                for (q, a) in rx_pos.iter().enumerate() {
                    if rx_vis[q] {
                        fr[q] = field_or_zero(&self.rx_array, r.rx_point, *a);
                    }
                }
                for (p, a) in tx_pos.iter().enumerate() {
                    if tx_vis[p] {
                        ft[p] = field_or_zero(&self.tx_array, r.tx_point, *a);
                    }
                }
                let delay = c.delay + r.relative_delay;
                for q in (0..m_r).filter(|&q| rx_vis[q]) {
                    for p in (0..m_t).filter(|&p| tx_vis[p]) {
                        let gain = self.ray_gain(r, power, q, p, fr[q], ft[p]) * w_nlos;
                        taps[q * m_t + p].push(Tap { delay, gain });
                    }
                }
            }
        }
        Ok(CirSnapshot {
            time: self.time,
            rx_elements: m_r,
            tx_elements: m_t,
            taps,
            paths: self.paths(),
        })
    }

    /// Delay/power-only snapshot (empty tap lists); much cheaper when only
    /// PDP-based statistics are needed.
    pub fn path_snapshot(&self) -> CirSnapshot {
        CirSnapshot {
            time: self.time,
            rx_elements: self.rx_array.len(),
            tx_elements: self.tx_array.len(),
            taps: Vec::new(),
            paths: self.paths(),
        }
    }
}

/// Number of samples taken over `duration` with step `dt`.
pub fn sample_count(duration: f64, dt: f64) -> Result<usize> {
    if !(duration > 0.0) || !(dt > 0.0) {
        return Err(invalid("duration", "duration and dt must be > 0"));
    }
    Ok(((duration / dt).round() as usize).max(1))
}

/// Drive a realization, calling `visit` with the state at `t = k dt` for
/// every sample.
pub fn run_with<F>(config: &ScenarioConfig, duration: f64, dt: f64, seed: u64, mut visit: F) -> Result<()>
where
    F: FnMut(&ChannelState) -> Result<()>,
{
    let n = sample_count(duration, dt)?;
    let mut state = ChannelState::new(config, seed)?;
    for k in 0..n {
        if k > 0 {
            state.evolve(dt)?;
        }
        visit(&state)?;
    }
    Ok(())
}

/// Full impulse-response snapshots of one realization.
pub fn run_realization(config: &ScenarioConfig, duration: f64, dt: f64, seed: u64) -> Result<Vec<CirSnapshot>> {
    let mut out = Vec::new();
    run_with(config, duration, dt, seed, |s| {
        out.push(s.snapshot()?);
        Ok(())
    })?;
    Ok(out)
}

/// Delay/power-only snapshots of one realization.
pub fn run_paths(config: &ScenarioConfig, duration: f64, dt: f64, seed: u64) -> Result<Vec<CirSnapshot>> {
    let mut out = Vec::new();
    run_with(config, duration, dt, seed, |s| {
        out.push(s.path_snapshot());
        Ok(())
    })?;
    Ok(out)
}
