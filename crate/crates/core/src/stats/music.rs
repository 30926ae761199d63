//! Angle-of-arrival power spectrum by MUSIC with forward spatial smoothing.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, GbsmError, Result};

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues (ascending) and matching unit eigenvectors of a Hermitian
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` pairs with `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.n;
    let mut a = m.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        if a.off_diagonal_norm() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // unit phase that makes the pivot real, then a real rotation
                let ph = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // W: columns p, q of the unitary update
                let wpp = Complex64::new(c, 0.0);
                let wpq = Complex64::new(s, 0.0);
                let wqp = -ph.conj() * s;
                let wqq = ph.conj() * c;
                // A <- A W (columns)
                for i in 0..n {
                    let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = aip * wpp + aiq * wqp;
                    a[(i, q)] = aip * wpq + aiq * wqq;
                    let (vip, viq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = vip * wpp + viq * wqp;
                    v[(i, q)] = vip * wpq + viq * wqq;
                }
                // A <- W^H A (rows)
                for j in 0..n {
                    let (apj, aqj) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = wpp.conj() * apj + wqp.conj() * aqj;
                    a[(q, j)] = wpq.conj() * apj + wqq.conj() * aqj;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    HermitianEigen {
        values: order.iter().map(|&i| a[(i, i)].re).collect(),
        vectors: order.iter().map(|&k| (0..n).map(|i| v[(i, k)]).collect()).collect(),
    }
}

/// Sample covariance `(1/K) sum x x^H` of array snapshots.
pub fn sample_covariance(samples: &[Vec<Complex64>]) -> Result<CMatrix> {
    let first = samples.first().ok_or(GbsmError::EmptyInput("array samples"))?;
    let n = first.len();
    let mut r = CMatrix::zeros(n);
    for x in samples {
        if x.len() != n {
            return Err(invalid("samples", "all snapshots must have the same length"));
        }
        for i in 0..n {
            for j in 0..n {
                r[(i, j)] += x[i] * x[j].conj();
            }
        }
    }
    let k = samples.len() as f64;
    r.data.iter_mut().for_each(|v| *v /= k);
    Ok(r)
}

/// Average of the `l x l` diagonal sub-blocks of `r` over all sliding
/// windows.
pub fn forward_smoothing(r: &CMatrix, l: usize) -> Result<CMatrix> {
    if l == 0 || l > r.n {
        return Err(invalid("subarray_size", format!("must lie in 1..={}", r.n)));
    }
    let windows = r.n - l + 1;
    let mut s = CMatrix::zeros(l);
    for w in 0..windows {
        for i in 0..l {
            for j in 0..l {
                s[(i, j)] += r[(w + i, w + j)];
            }
        }
    }
    s.data.iter_mut().for_each(|v| *v /= windows as f64);
    Ok(s)
}

/// Half-wavelength ULA steering vector for an angle from broadside.
pub fn steering_vector(l: usize, theta: f64) -> Vec<Complex64> {
    (0..l)
        .map(|k| Complex64::from_polar(1.0, PI * k as f64 * theta.sin()))
        .collect()
}

/// Number of eigenvalues above ten times the smallest, at most `l - 1`.
pub fn estimate_sources(values: &[f64]) -> usize {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
    let floor = if min > 0.0 { 10.0 * min } else { 1e-12 * values.iter().cloned().fold(0.0, f64::max) };
    values.iter().filter(|&&v| v > floor).count().min(values.len().saturating_sub(1))
}

/// MUSIC pseudo-spectrum of the smoothed covariance over `angles` (rad
/// from broadside), normalized to a peak of one.
pub fn smooth_music_aps(
    samples: &[Vec<Complex64>],
    subarray: usize,
    angles: &[f64],
    sources: Option<usize>,
) -> Result<Vec<f64>> {
    let m = samples.first().map_or(0, Vec::len);
    if m < subarray {
        return Err(invalid("samples", format!("need at least {subarray} antennas, got {m}")));
    }
    let r = forward_smoothing(&sample_covariance(samples)?, subarray)?;
    music_spectrum(&r, angles, sources)
}

/// MUSIC pseudo-spectrum of a given covariance matrix.
pub fn music_spectrum(r: &CMatrix, angles: &[f64], sources: Option<usize>) -> Result<Vec<f64>> {
    if angles.is_empty() {
        return Err(GbsmError::EmptyInput("angle grid"));
    }
    let eig = hermitian_eigen(r);
    let d = sources
        .unwrap_or_else(|| estimate_sources(&eig.values))
        .min(r.n.saturating_sub(1));
    let noise = &eig.vectors[..r.n - d];
    let raw: Vec<f64> = angles
        .iter()
        .map(|&th| {
            let a = steering_vector(r.n, th);
            let den: f64 = noise
                .iter()
                .map(|e| e.iter().zip(&a).map(|(ei, ai)| ei.conj() * ai).sum::<Complex64>().norm_sqr())
                .sum();
            1.0 / den.max(1e-300)
        })
        .collect();
    let peak = raw.iter().cloned().fold(0.0, f64::max);
    Ok(raw.into_iter().map(|v| v / peak).collect())
}

/// Indices of local maxima whose value is at least `min_level`.
pub fn find_peaks(spectrum: &[f64], min_level: f64) -> Vec<usize> {
    let n = spectrum.len();
    (0..n)
        .filter(|&i| {
            let v = spectrum[i];
            v >= min_level
                && (i == 0 || spectrum[i - 1] < v)
                && (i + 1 == n || spectrum[i + 1] <= v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reconstruct(e: &HermitianEigen) -> CMatrix {
        let n = e.values.len();
        let mut r = CMatrix::zeros(n);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                for j in 0..n {
                    r[(i, j)] += v[i] * v[j].conj() * *lam;
                }
            }
        }
        r
    }

    #[test]
    fn eigen_of_known_matrix() {
        let mut m = CMatrix::zeros(3);
        m.data = vec![
            c(2.0, 0.0), c(0.0, 1.0), c(0.0, 0.0),
            c(0.0, -1.0), c(2.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(5.0, 0.0),
        ];
        let e = hermitian_eigen(&m);
        for (got, want) in e.values.iter().zip([1.0, 3.0, 5.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let back = reconstruct(&e);
        for (a, b) in back.data.iter().zip(&m.data) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_plane_wave_recovered() {
        let angles: Vec<f64> = (-900..=900).map(|k| (k as f64 / 10.0).to_radians()).collect();
        let mut rng = stream(42, 0);
        for trial in 0..100 {
            let truth = rng.random_range(-60.0..60.0f64).to_radians();
            let a = steering_vector(8, truth);
            let samples: Vec<Vec<Complex64>> = (0..50)
                .map(|_| {
                    let s = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
                    a.iter()
                        .map(|ai| {
                            let n = c(rng.sample(StandardNormal), rng.sample(StandardNormal)) * 0.05;
                            ai * s + n
                        })
                        .collect()
                })
                .collect();
            let spec = smooth_music_aps(&samples, 3, &angles, None).unwrap();
            let best = spec.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            let err = (angles[best] - truth).abs().to_degrees();
            assert!(err <= 1.0, "trial {trial}: err {err}");
        }
    }

    #[test]
    fn white_noise_is_flat() {
        let mut rng = stream(7, 0);
        let samples: Vec<Vec<Complex64>> = (0..20_000)
            .map(|_| (0..8).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect())
            .collect();
        let angles: Vec<f64> = (-89..=89).map(|k| (k as f64).to_radians()).collect();
        let spec = smooth_music_aps(&samples, 3, &angles, None).unwrap();
        let min = spec.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(10.0 * (1.0 / min).log10() < 3.0);
    }

    #[test]
    fn too_few_antennas() {
        let samples = vec![vec![c(1.0, 0.0); 2]];
        assert!(smooth_music_aps(&samples, 3, &[0.0], None).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn eigenpairs_reconstruct_3x3(v in proptest::collection::vec(-3.0..3.0f64, 18)) {
                // B^H B is Hermitian positive semidefinite
                let mut b = CMatrix::zeros(3);
                for i in 0..9 {
                    b.data[i] = c(v[2 * i], v[2 * i + 1]);
                }
                let mut m = CMatrix::zeros(3);
                for i in 0..3 {
                    for j in 0..3 {
                        m[(i, j)] = (0..3).map(|k| b[(k, i)].conj() * b[(k, j)]).sum();
                    }
                }
                let e = hermitian_eigen(&m);
                let back = reconstruct(&e);
                for (x, y) in back.data.iter().zip(&m.data) {
                    prop_assert!((x - y).norm() < 1e-8);
                }
            }
        }
    }
}
