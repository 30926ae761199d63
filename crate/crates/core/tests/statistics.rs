use std::f64::consts::PI;

use gbsm::channel::{run_realization, CirSnapshot, Tap};
use gbsm::experiments::{sample_states, simulate_coherence_bandwidths, Sampling};
use gbsm::scenarios::{preset, PresetName};
use gbsm::stats::correlation::{stfcf, transfer_function, StfcfQuery};
use gbsm::stats::music::find_peaks;
use gbsm::{Complex64, Vector3};
use proptest::prelude::*;

fn one_pair(taps: Vec<Tap>) -> CirSnapshot {
    CirSnapshot { time: 0.0, rx_elements: 1, tx_elements: 1, taps: vec![taps], paths: Vec::new() }
}

fn idft(h: &[Complex64]) -> Vec<f64> {
    let n = h.len();
    (0..n)
        .map(|m| {
            h.iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, 2.0 * PI * (k * m) as f64 / n as f64))
                .sum::<Complex64>()
                .norm()
                / n as f64
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inverse_transform_finds_tap_delays(
        bins in prop::collection::btree_set(4usize..120, 3),
        offsets in prop::collection::vec(-0.3f64..0.3, 3),
        phases in prop::collection::vec(0.0f64..2.0 * PI, 3),
    ) {
        let n = 128;
        let res = 10e-9;
        let bins: Vec<usize> = bins.into_iter().collect();
        prop_assume!(bins.windows(2).all(|w| w[1] - w[0] >= 6));
        let taps: Vec<Tap> = bins
            .iter()
            .zip(&offsets)
            .zip(&phases)
            .map(|((&b, &o), &ph)| Tap { delay: (b as f64 + o) * res, gain: Complex64::from_polar(1.0, ph) })
            .collect();
        let freqs: Vec<f64> = (0..n).map(|k| k as f64 / (n as f64 * res)).collect();
        let h = &transfer_function(&one_pair(taps), &freqs).unwrap()[0];
        let impulse = idft(h);
        let mut peaks = find_peaks(&impulse, 0.4);
        peaks.sort_by(|a, b| impulse[*b].total_cmp(&impulse[*a]));
        peaks.truncate(3);
        peaks.sort();
        prop_assert_eq!(peaks.len(), 3);
        for (p, b) in peaks.iter().zip(&bins) {
            prop_assert!(p.abs_diff(*b) <= 1, "peak {} tap bin {}", p, b);
        }
    }
}

#[test]
fn stfcf_is_hermitian() {
    let mut cfg = preset(PresetName::ConventionalMimo3d);
    cfg.rx.elements = 2;
    cfg.tx.elements = 2;
    let ensemble: Vec<Vec<CirSnapshot>> =
        (1..=6).map(|s| run_realization(&cfg, 0.01, 1e-3, s).unwrap()).collect();
    let q = StfcfQuery { q: 0, p: 1, q2: 1, p2: 0, xi: 2e6, dxi: 3e5, t_index: 2, lag: 0 };
    let swapped = StfcfQuery { q: 1, p: 0, q2: 0, p2: 1, xi: q.xi + q.dxi, dxi: -q.dxi, ..q };
    let a = stfcf(&ensemble, q).unwrap();
    let b = stfcf(&ensemble, swapped).unwrap();
    assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0), "{a} {b}");
}

// Paired comparison of the ensemble correlation at two start times.
#[test]
fn conventional_channel_is_stationary_in_time() {
    let mut cfg = preset(PresetName::ConventionalMimo3d);
    cfg.rx.elements = 2;
    cfg.tx.elements = 2;
    let (t0, t1, lag) = (0usize, 40usize, 5usize);
    let h = |s: &CirSnapshot| s.pair(0, 1).iter().map(|t| t.gain).sum::<Complex64>();
    let diffs: Vec<(f64, f64)> = (1..=300u64)
        .map(|seed| {
            let r = run_realization(&cfg, 0.05, 1e-3, seed).unwrap();
            let c0 = h(&r[t0]).conj() * h(&r[t0 + lag]);
            let c1 = h(&r[t1]).conj() * h(&r[t1 + lag]);
            (c1.re - c0.re, h(&r[t1]).norm_sqr() - h(&r[t0]).norm_sqr())
        })
        .collect();
    let n = diffs.len() as f64;
    for pick in [|d: &(f64, f64)| d.0, |d: &(f64, f64)| d.1] {
        let x: Vec<f64> = diffs.iter().map(pick).collect();
        let mean = x.iter().sum::<f64>() / n;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() <= 4.0 * sd / n.sqrt(), "mean {mean} sd {sd}");
    }
}

#[test]
fn coherence_bandwidth_varies_only_when_things_move() {
    let cfg = preset(PresetName::V2v2d);
    let sampling = Sampling::new(0.3, 1e-3, 25);
    let moving = simulate_coherence_bandwidths(&cfg, &[3], sampling).unwrap();
    let values: Vec<f64> = moving.iter().map(|c| c.value).collect();
    let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 1e-3 * values[0], "spread {spread}");

    let mut frozen = cfg.clone();
    frozen.rx.velocity = Vector3::ZERO;
    frozen.tx.velocity = Vector3::ZERO;
    frozen.evolution.rx_cluster_speed = 0.0;
    frozen.evolution.tx_cluster_speed = 0.0;
    frozen.evolution.virtual_link_coherence = f64::INFINITY;
    let still = simulate_coherence_bandwidths(&frozen, &[3], sampling).unwrap();
    assert!(still.iter().all(|c| (c.value / still[0].value - 1.0).abs() < 1e-12), "{still:?}");

    let counts = sample_states(&frozen, sampling, 3, |s| Ok(s.clusters.len())).unwrap();
    assert!(counts.iter().all(|&n| n == counts[0]));
}
