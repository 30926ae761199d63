//! Empirical distributions.

use crate::error::{GbsmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionMode {
    Cdf,
    Ccdf,
}

/// Sorted sample set evaluable as a CDF or CCDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
    pub mode: DistributionMode,
}

impl EmpiricalDistribution {
    pub fn new(samples: &[f64], mode: DistributionMode) -> Result<Self> {
        if samples.is_empty() {
            return Err(GbsmError::EmptyInput("samples"));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(GbsmError::InvalidParameter { name: "samples", reason: "NaN sample".into() });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted, mode })
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// CDF or CCDF according to `mode`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.mode {
            DistributionMode::Cdf => self.cdf(x),
            DistributionMode::Ccdf => self.ccdf(x),
        }
    }

    /// Continuous CDF that rises linearly between consecutive order
    /// statistics and reaches `(i + 1) / n` at the `i`-th one.
    pub fn cdf_interpolated(&self, x: f64) -> f64 {
        let s = &self.sorted;
        let n = s.len() as f64;
        if x < s[0] {
            return 0.0;
        }
        if x >= s[s.len() - 1] {
            return 1.0;
        }
        let i = s.partition_point(|&v| v <= x) - 1;
        let (a, b) = (s[i], s[i + 1]);
        let frac = if b > a { (x - a) / (b - a) } else { 1.0 };
        (i as f64 + 1.0 + frac) / n
    }

    pub fn eval_interpolated(&self, x: f64) -> f64 {
        match self.mode {
            DistributionMode::Cdf => self.cdf_interpolated(x),
            DistributionMode::Ccdf => 1.0 - self.cdf_interpolated(x),
        }
    }

    /// Sample quantile with linear interpolation between order statistics.
    pub fn quantile(&self, p: f64) -> f64 {
        let s = &self.sorted;
        let h = p.clamp(0.0, 1.0) * (s.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(s.len() - 1);
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }
}

/// Empirical distribution of `samples`.
pub fn empirical_distribution(samples: &[f64], mode: DistributionMode) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::new(samples, mode)
}
