//! Power delay profile, its correlation across time, the stationary
//! interval and the RMS delay spread.

use crate::channel::CirSnapshot;
use crate::error::{invalid, GbsmError, Result};

/// Discrete power delay profile, sorted by delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Pdp {
    pub time: f64,
    /// `(delay s, power)` pairs.
    pub entries: Vec<(f64, f64)>,
}

impl Pdp {
    pub fn new(time: f64, mut entries: Vec<(f64, f64)>) -> Self {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { time, entries }
    }

    pub fn total_power(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Power accumulated on a delay grid of width `resolution`, each entry
    /// assigned to its nearest bin.
    pub fn binned(&self, resolution: f64) -> BinnedPdp {
        let mut bins: Vec<(i64, f64)> = Vec::with_capacity(self.entries.len());
        for &(d, p) in &self.entries {
            let k = (d / resolution).round() as i64;
            match bins.last_mut() {
                Some(last) if last.0 == k => last.1 += p,
                _ => bins.push((k, p)),
            }
        }
        let energy = bins.iter().map(|b| b.1 * b.1).sum();
        BinnedPdp { bins, energy }
    }
}

/// PDP of a snapshot: every ray with its normalized power.
pub fn pdp(snapshot: &CirSnapshot) -> Pdp {
    Pdp::new(
        snapshot.time,
        snapshot.paths.iter().map(|p| (p.delay, p.power)).collect(),
    )
}

/// PDP on an integer delay grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedPdp {
    /// `(bin index, power)` sorted by bin.
    pub bins: Vec<(i64, f64)>,
    /// Sum of squared bin powers.
    pub energy: f64,
}

impl BinnedPdp {
    pub fn inner(&self, other: &BinnedPdp) -> f64 {
        let (a, b) = (&self.bins, &other.bins);
        let (mut i, mut j, mut s) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }

    /// Normalized correlation with `other`; both must carry energy.
    pub fn correlation(&self, other: &BinnedPdp) -> Result<f64> {
        let den = self.energy.max(other.energy);
        if !(self.energy > 0.0) || !(other.energy > 0.0) {
            return Err(GbsmError::ZeroPower);
        }
        Ok((self.inner(other) / den).clamp(0.0, 1.0))
    }
}

/// Normalized PDP correlation between two instants.
pub fn pdp_acf(a: &Pdp, b: &Pdp, resolution: f64) -> Result<f64> {
    if !(resolution > 0.0) {
        return Err(invalid("resolution", "must be > 0"));
    }
    if a.entries.is_empty() || b.entries.is_empty() {
        return Err(GbsmError::EmptyInput("pdp"));
    }
    a.binned(resolution).correlation(&b.binned(resolution))
}

/// A measured quantity that may have been cut off by the observation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Censored {
    pub value: f64,
    /// True when the defining event was never observed and `value` is the
    /// window length.
    pub censored: bool,
}

/// Smallest sampled lag after `t_index` at which the PDP correlation drops
/// to `threshold` or below.
pub fn stationary_interval(pdps: &[Pdp], t_index: usize, threshold: f64, resolution: f64) -> Result<Censored> {
    let binned: Vec<BinnedPdp> = pdps.iter().map(|p| p.binned(resolution)).collect();
    let times: Vec<f64> = pdps.iter().map(|p| p.time).collect();
    stationary_interval_binned(&binned, &times, t_index, threshold)
}

pub fn stationary_interval_binned(
    binned: &[BinnedPdp],
    times: &[f64],
    t_index: usize,
    threshold: f64,
) -> Result<Censored> {
    if binned.len() < 2 {
        return Err(invalid("pdps", "need at least two snapshots"));
    }
    if t_index + 1 >= binned.len() {
        return Err(GbsmError::IndexOutOfRange { index: t_index, len: binned.len() - 1 });
    }
    let base = &binned[t_index];
    for k in t_index + 1..binned.len() {
        if base.correlation(&binned[k])? <= threshold {
            return Ok(Censored {
                value: times[k] - times[t_index],
                censored: false,
            });
        }
    }
    Ok(Censored {
        value: times[binned.len() - 1] - times[t_index],
        censored: true,
    })
}

/// Power-weighted standard deviation of the delays.
pub fn rms_delay_spread(pdp: &Pdp) -> Result<f64> {
    let total = pdp.total_power();
    if !(total > 0.0) {
        return Err(GbsmError::ZeroPower);
    }
    let mean = pdp.entries.iter().map(|(d, p)| d * p).sum::<f64>() / total;
    let var = pdp.entries.iter().map(|(d, p)| p * (d - mean).powi(2)).sum::<f64>() / total;
    Ok(var.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(t: f64, e: &[(f64, f64)]) -> Pdp {
        Pdp::new(t, e.to_vec())
    }

    #[test]
    fn self_correlation_is_one() {
        let a = p(0.0, &[(1e-7, 0.5), (2e-7, 0.3), (3.3e-7, 0.2)]);
        assert_eq!(pdp_acf(&a, &a, 5e-9).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_support() {
        let a = p(0.0, &[(1e-7, 1.0)]);
        let b = p(0.0, &[(2e-7, 1.0)]);
        assert_eq!(pdp_acf(&a, &b, 5e-9).unwrap(), 0.0);
    }

    #[test]
    fn zero_energy_errors() {
        let a = p(0.0, &[(1e-7, 0.0)]);
        assert!(matches!(pdp_acf(&a, &a, 5e-9), Err(GbsmError::ZeroPower)));
        assert!(pdp_acf(&p(0.0, &[]), &a, 5e-9).is_err());
    }

    #[test]
    fn drifting_tap_correlation_is_non_increasing() {
        // a strong fixed tap and a weak tap drifting away one bin per step
        let base = p(0.0, &[(0.0, 1.0), (1e-7, 0.5)]);
        let mut prev = 1.0;
        for k in 0..6 {
            let d = 1e-7 + k as f64 * 5e-9;
            let r = pdp_acf(&base, &p(0.0, &[(0.0, 1.0), (d, 0.5)]), 5e-9).unwrap();
            assert!(r <= prev + 1e-15);
            prev = r;
        }
        assert!((prev - 1.0 / 1.25).abs() < 1e-12);
    }

    #[test]
    fn stationary_interval_first_crossing() {
        // correlation sequence 1, 0.9, 0.7, 0.95, 0.5 against the first PDP
        let make = |x: f64| {
            // two equal-energy bins; moving power x->(1-x) tunes the overlap
            vec![(0.0, x), (1e-6, (1.0 - x * x).sqrt())]
        };
        let corr = |x: f64| x; // inner product with (1, 0)
        let seq = [1.0, 0.9, 0.7, 0.95, 0.5];
        let mut pdps = vec![p(0.0, &[(0.0, 1.0)])];
        for (k, &c) in seq.iter().enumerate().skip(1) {
            pdps.push(p(k as f64 * 1e-3, &make(corr(c))));
        }
        let r = stationary_interval(&pdps, 0, 0.8, 5e-9).unwrap();
        assert!(!r.censored);
        assert!((r.value - 2e-3).abs() < 1e-15);
    }

    #[test]
    fn time_invariant_pdp_is_censored() {
        let pdps: Vec<Pdp> = (0..10).map(|k| p(k as f64 * 1e-3, &[(1e-7, 1.0)])).collect();
        let r = stationary_interval(&pdps, 0, 0.8, 5e-9).unwrap();
        assert!(r.censored);
        assert!((r.value - 9e-3).abs() < 1e-15);
        assert!(stationary_interval(&pdps[..1], 0, 0.8, 5e-9).is_err());
    }

    #[test]
    fn rms_delay_examples() {
        assert_eq!(rms_delay_spread(&p(0.0, &[(3e-7, 2.0)])).unwrap(), 0.0);
        let two = p(0.0, &[(0.0, 0.5), (100e-9, 0.5)]);
        assert!((rms_delay_spread(&two).unwrap() - 50e-9).abs() < 1e-20);
        assert!(rms_delay_spread(&p(0.0, &[(0.0, 0.0)])).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_pdp() -> impl Strategy<Value = Pdp> {
            proptest::collection::vec((0.0..2e-6f64, 1e-6..1.0f64), 1..30).prop_map(|e| Pdp::new(0.0, e))
        }

        proptest! {
            #[test]
            fn correlation_in_unit_interval(a in arb_pdp(), b in arb_pdp(), res in 1e-9..2e-8f64) {
                let r = pdp_acf(&a, &b, res).unwrap();
                prop_assert!((0.0..=1.0).contains(&r));
                prop_assert_eq!(pdp_acf(&a, &a, res).unwrap(), 1.0);
            }
        }
    }
}
