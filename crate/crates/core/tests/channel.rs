use gbsm::channel::{doppler_nlos, run_paths, run_realization, ChannelState};
use gbsm::clusters::RayCount;
use gbsm::scenarios::{apply_simplification, preset, PresetName, Simplification};
use gbsm::{Complex64, ScenarioConfig, Vector3, SPEED_OF_LIGHT};
use proptest::prelude::*;

fn small(name: PresetName) -> ScenarioConfig {
    let mut cfg = preset(name);
    cfg.rx.elements = cfg.rx.elements.min(4);
    cfg.tx.elements = cfg.tx.elements.min(2);
    cfg
}

fn any_preset() -> impl Strategy<Value = PresetName> {
    prop::sample::select(PresetName::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn path_powers_sum_to_one(name in any_preset(), seed in 0u64..10_000, steps in 0usize..40) {
        let cfg = small(name);
        let mut s = ChannelState::new(&cfg, seed).unwrap();
        for _ in 0..steps {
            s.evolve(1e-3).unwrap();
        }
        let total = s.path_snapshot().total_path_power();
        let fade = cfg.evolution.fade_duration;
        if s.clusters.iter().all(|c| c.lifecycle.ramp(s.time, fade) == 1.0) {
            prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
        } else {
            prop_assert!(total <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn doppler_within_relative_speed(name in any_preset(), seed in 0u64..10_000) {
        let cfg = small(name);
        let mut s = ChannelState::new(&cfg, seed).unwrap();
        s.evolve(1e-3).unwrap();
        let (rx, tx) = (s.rx_positions(), s.tx_positions());
        for c in &s.clusters {
            let bound_r = (s.rx_array.velocity - c.rx_velocity).norm() / s.wavelength;
            let bound_t = (s.tx_array.velocity - c.tx_velocity).norm() / s.wavelength;
            for r in &c.rays {
                for a in &rx {
                    let f = doppler_nlos(r.rx_point - *a, s.rx_array.velocity, c.rx_velocity, s.wavelength).unwrap();
                    prop_assert!(f.abs() <= bound_r * (1.0 + 1e-12));
                }
                for a in &tx {
                    let f = doppler_nlos(r.tx_point - *a, s.tx_array.velocity, c.tx_velocity, s.wavelength).unwrap();
                    prop_assert!(f.abs() <= bound_t * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn invisible_clusters_have_zero_gain(seed in 0u64..10_000) {
        let mut cfg = preset(PresetName::MassiveMimo3d);
        cfg.rx.elements = 16;
        cfg.tx.elements = 4;
        cfg.evolution.array_correlation_distance = 0.5;
        let s = ChannelState::new(&cfg, seed).unwrap();
        let snap = s.snapshot().unwrap();
        let mut hidden = 0;
        for q in 0..16 {
            for p in 0..4 {
                let mut visible_rays = 0;
                for (i, c) in s.clusters.iter().enumerate() {
                    let vis = s.visibility.is_visible(q, p, c.id);
                    if vis {
                        visible_rays += c.rays.len();
                    } else {
                        hidden += 1;
                        for m in 0..c.rays.len() {
                            prop_assert_eq!(s.nlos_gain(q, p, i, m).unwrap(), Complex64::new(0.0, 0.0));
                        }
                        prop_assert_eq!(s.cluster_gain(q, p, c.id).unwrap(), Complex64::new(0.0, 0.0));
                    }
                }
                prop_assert_eq!(snap.pair(q, p).len(), visible_rays);
            }
        }
        prop_assert!(hidden > 0);
    }

    #[test]
    fn planar_vectors_have_no_height(name in any_preset(), seed in 0u64..10_000) {
        let cfg = apply_simplification(&small(name), Simplification::Planar2d);
        let mut s = ChannelState::new(&cfg, seed).unwrap();
        for _ in 0..3 {
            s.evolve(1e-3).unwrap();
        }
        for c in &s.clusters {
            let v = s.cluster_vectors(c);
            prop_assert_eq!(v.rx_cluster.z, 0.0);
            prop_assert_eq!(v.tx_cluster.z, 0.0);
            let all = v.rx_rays.iter().chain(&v.tx_rays).chain(v.rx_elements.iter().flatten()).chain(v.tx_elements.iter().flatten());
            for d in all {
                prop_assert_eq!(d.z, 0.0);
            }
        }
    }

    #[test]
    fn zero_ray_delay_collapses_clusters(name in any_preset(), seed in 0u64..10_000) {
        let cfg = apply_simplification(&small(name), Simplification::ScmLike);
        let s = ChannelState::new(&cfg, seed).unwrap();
        for p in s.paths() {
            let c = s.cluster(p.cluster_id).unwrap();
            prop_assert_eq!(p.delay, c.delay);
        }
    }
}

#[test]
fn same_seed_same_snapshots() {
    let cfg = small(PresetName::Hst3d);
    let a = run_realization(&cfg, 0.02, 1e-3, 17).unwrap();
    let b = run_realization(&cfg, 0.02, 1e-3, 17).unwrap();
    let c = run_realization(&cfg, 0.02, 1e-3, 18).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn frozen_world_keeps_delays() {
    let mut cfg = small(PresetName::Hst3d);
    cfg.rx.velocity = Vector3::ZERO;
    cfg.evolution.rx_cluster_speed = 0.0;
    cfg.evolution.tx_cluster_speed = 0.0;
    cfg.evolution.virtual_link_coherence = f64::INFINITY;
    let snaps = run_paths(&cfg, 0.05, 1e-3, 3).unwrap();
    let delays = |i: usize| snaps[i].paths.iter().map(|p| p.delay).collect::<Vec<_>>();
    for i in 1..snaps.len() {
        assert_eq!(delays(i), delays(0));
    }
}

#[test]
fn los_delay_follows_the_train() {
    let mut cfg = small(PresetName::Hst3d);
    cfg.rician_k = 2.0;
    let dt = 1e-3;
    let mut s = ChannelState::new(&cfg, 5).unwrap();
    let v = cfg.rx.velocity.norm();
    for _ in 0..50 {
        let (before, d0) = (s.los_delay(), s.rx_array.center_at(s.time).norm());
        s.evolve(dt).unwrap();
        let (after, d1) = (s.los_delay(), s.rx_array.center_at(s.time).norm());
        assert!((after - before).abs() <= v * dt / SPEED_OF_LIGHT * (1.0 + 1e-9));
        assert!(((after - before) - (d1 - d0) / SPEED_OF_LIGHT).abs() < 1e-15);
    }
    let snap = s.snapshot().unwrap();
    assert_eq!(snap.pair(0, 0)[0].delay, s.los_delay());
}

#[test]
fn cluster_delay_steps_are_bounded() {
    let mut cfg = small(PresetName::V2v2d);
    cfg.evolution.virtual_link_coherence = f64::INFINITY;
    let dt = 1e-3;
    let mut s = ChannelState::new(&cfg, 9).unwrap();
    for _ in 0..100 {
        let before: Vec<(u64, f64)> = s.clusters.iter().map(|c| (c.id, c.delay)).collect();
        s.evolve(dt).unwrap();
        for (id, d0) in before {
            if let Some(c) = s.cluster(id) {
                let speed = (s.rx_array.velocity - c.rx_velocity).norm() + (s.tx_array.velocity - c.tx_velocity).norm();
                assert!((c.delay - d0).abs() <= speed * dt / SPEED_OF_LIGHT * (1.0 + 1e-9) + 1e-18);
            }
        }
    }
}

#[test]
fn rician_weights() {
    let mut cfg = small(PresetName::Hst3d);
    cfg.rician_k = 0.0;
    let s = ChannelState::new(&cfg, 2).unwrap();
    let snap = s.snapshot().unwrap();
    for q in 0..2 {
        for p in 0..2 {
            let rays: usize = s.clusters.iter().filter(|c| s.visibility.is_visible(q, p, c.id)).map(|c| c.rays.len()).sum();
            assert_eq!(snap.pair(q, p).len(), rays);
        }
    }

    cfg.rician_k = f64::INFINITY;
    let s = ChannelState::new(&cfg, 2).unwrap();
    let snap = s.snapshot().unwrap();
    let taps = snap.pair(0, 0);
    assert_eq!(taps[0].gain, s.los_gain(0, 0).unwrap());
    assert!(taps[1..].iter().all(|t| t.gain == Complex64::new(0.0, 0.0)));
}

// Omnidirectional elements with cross-polarization ratio one give every ray a
// phase-averaged gain equal to its power, so the NLOS energy of a pair is
// the visible power divided by K + 1.
#[test]
fn rician_power_split() {
    let mut cfg = small(PresetName::Hst3d);
    cfg.rician_k = 3.0;
    cfg.cross_polarization = 1.0;
    cfg.evolution.ray_count = RayCount::Fixed(4);
    let mut s = ChannelState::new(&cfg, 21).unwrap();
    let (q, p) = (1, 0);
    let k = cfg.rician_k;
    let snap = s.snapshot().unwrap();
    let los = snap.pair(q, p)[0].gain.norm_sqr() / s.los_gain(q, p).unwrap().norm_sqr();
    assert!((los - k / (k + 1.0)).abs() < 1e-12);

    let visible: f64 = snap
        .paths
        .iter()
        .filter(|r| s.visibility.is_visible(q, p, r.cluster_id))
        .map(|r| r.power)
        .sum();
    let ids: Vec<u64> = s.clusters.iter().map(|c| c.id).collect();
    let n = 20_000;
    let energies: Vec<f64> = (0..n)
        .map(|d| {
            s.redraw_cluster_phases(&ids, 5_000 + d);
            s.snapshot().unwrap().pair(q, p)[1..].iter().map(|t| t.gain.norm_sqr()).sum()
        })
        .collect();
    let mean = energies.iter().sum::<f64>() / n as f64;
    let sd = (energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let expected = visible / (k + 1.0);
    assert!((mean - expected).abs() <= 3.0 * sd / (n as f64).sqrt(), "mean {mean} expected {expected} sd {sd}");
}

#[test]
fn static_transmitter_sees_only_cluster_motion() {
    let mut cfg = apply_simplification(&small(PresetName::V2v2d), Simplification::F2m);
    cfg.evolution.moving_fraction = 1.0;
    let mut s = ChannelState::new(&cfg, 4).unwrap();
    assert_eq!(s.tx_array.velocity, Vector3::ZERO);
    let before: Vec<Vec<f64>> = s.clusters.iter().flat_map(|c| c.rays.iter().map(|r| r.tx_phase.clone())).collect();
    let expected: Vec<Vec<f64>> = s
        .clusters
        .iter()
        .flat_map(|c| {
            let tx = s.tx_positions();
            let lambda = s.wavelength;
            c.rays
                .iter()
                .map(move |r| {
                    tx.iter()
                        .map(|a| {
                            let d = r.tx_point - *a;
                            -d.dot(&c.tx_velocity) / d.norm() / lambda
                        })
                        .collect::<Vec<f64>>()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let dt = 1e-4;
    s.evolve(dt).unwrap();
    let after: Vec<Vec<f64>> = s.clusters.iter().flat_map(|c| c.rays.iter().map(|r| r.tx_phase.clone())).collect();
    for ((b, a), f) in before.iter().zip(&after).zip(&expected) {
        for p in 0..b.len() {
            let got = (a[p] - b[p]) / (2.0 * std::f64::consts::PI * dt);
            assert!((got - f[p]).abs() < 1e-6 * f[p].abs().max(1.0), "{got} vs {}", f[p]);
        }
    }
}

#[test]
fn mmwave_cluster_ray_counts() {
    let cfg = preset(PresetName::Mmwave3d);
    let (mut rays, mut clusters) = (0usize, 0usize);
    for seed in 1..=60 {
        let s = ChannelState::new(&cfg, seed).unwrap();
        for c in &s.clusters {
            clusters += 1;
            rays += c.rays.len();
            let mut d: Vec<f64> = c.rays.iter().map(|r| r.relative_delay).collect();
            d.sort_by(f64::total_cmp);
            d.dedup();
            assert_eq!(d.len(), c.rays.len());
        }
    }
    let mean = rays as f64 / clusters as f64;
    assert!((mean - 15.0).abs() < 0.5, "mean rays per cluster {mean}");
}

#[test]
fn virtual_delays_keep_their_mean() {
    let mut cfg = small(PresetName::V2v2d);
    cfg.rx.velocity = Vector3::ZERO;
    cfg.tx.velocity = Vector3::ZERO;
    cfg.evolution.rx_cluster_speed = 0.0;
    cfg.evolution.tx_cluster_speed = 0.0;
    cfg.evolution.log_delay_spread_std = 0.0;
    let mut s = ChannelState::new(&cfg, 8).unwrap();
    let target = cfg.evolution.delay_scalar * s.sigma_tau;
    let (mut sum, mut n) = (0.0, 0usize);
    for _ in 0..20_000 {
        s.evolve(1.0).unwrap();
        for c in &s.clusters {
            sum += c.virtual_delay;
            n += 1;
        }
    }
    let mean = sum / n as f64;
    assert!((mean / target - 1.0).abs() < 0.03, "mean {mean} target {target}");
}
