//! Sample summaries, run fingerprints, two-sample KS and least squares.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, sqrt};

/// Mean and standard error of a replica batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation over `√n`; zero for a single replica.
    pub std_error: f64,
    pub n: usize,
}

impl Summary {
    /// Two-pass summary; summation runs in slice order so the result is a
    /// deterministic function of the ordered sample.
    pub fn of(sample: &[f64]) -> Result<Self> {
        let n = sample.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mean = sample.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = sample.iter().map(|v| (v - mean) * (v - mean)).sum();
            sqrt(ss / (n - 1) as f64 / n as f64)
        } else {
            0.0
        };
        Ok(Self { mean, std_error, n })
    }

    /// `|mean − target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_error
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the little-endian encodings of `(seed, dt, eps, horizon)`
/// followed by the estimator id bytes.
pub fn config_fingerprint(seed: u64, dt: f64, eps: f64, horizon: f64, estimator: &str) -> u64 {
    let mut h = FNV_OFFSET;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    feed(&seed.to_le_bytes());
    feed(&dt.to_bits().to_le_bytes());
    feed(&eps.to_bits().to_le_bytes());
    feed(&horizon.to_bits().to_le_bytes());
    feed(estimator.as_bytes());
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorResult {
    pub value: f64,
    pub std_error: f64,
    pub n_replicas: usize,
    pub config_fingerprint: u64,
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let sorted = |s: &[f64]| {
        let mut v = s.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let root = sqrt(ne);
    let lambda = (root + 0.12 + 0.11 / root) * d;
    Ok(KsTest {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    })
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub mean_x: f64,
    /// `Σ (x − x̄)²`.
    pub sxx: f64,
}

impl LinearFit {
    /// Coefficients `c_i` with `slope = Σ c_i y_i`.
    pub fn slope_weights(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|x| (x - self.mean_x) / self.sxx).collect()
    }
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: "least squares needs at least two paired points".into(),
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: "abscissae are all equal".into(),
        });
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: mean_y - slope * mean_x,
        mean_x,
        sxx,
    })
}

/// Linear-interpolation quantile of an ascending sample.
pub fn quantile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = crate::math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_sample() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        // sd = √(5/3)
        assert!((s.std_error - sqrt(5.0 / 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(Summary::of(&[7.0]).unwrap().std_error, 0.0);
        assert_eq!(Summary::of(&[]), Err(Error::EmptySample));
    }

    #[test]
    fn fingerprint_separates_fields() {
        let a = config_fingerprint(1, 0.01, 0.08, 1.0, "beta");
        assert_eq!(a, config_fingerprint(1, 0.01, 0.08, 1.0, "beta"));
        assert_ne!(a, config_fingerprint(2, 0.01, 0.08, 1.0, "beta"));
        assert_ne!(a, config_fingerprint(1, 0.01, 0.08, 1.0, "alpha"));
        assert_ne!(a, config_fingerprint(1, 0.01, 0.08, 2.0, "beta"));
    }

    #[test]
    fn kolmogorov_q_reference_points() {
        // Q(1.36) ≈ 0.0495, Q(1.63) ≈ 0.0098
        assert!((kolmogorov_q(1.36) - 0.0495).abs() < 5e-4);
        assert!((kolmogorov_q(1.63) - 0.0098).abs() < 2e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let same = ks_two_sample(&a, &a).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        let b: Vec<f64> = (0..100).map(|i| 1000.0 + i as f64).collect();
        let apart = ks_two_sample(&a, &b).unwrap();
        assert_eq!(apart.statistic, 1.0);
        assert!(apart.p_value < 1e-10);
    }

    #[test]
    fn ols_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let fit = ols(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-15);
        assert!((fit.intercept - 2.0).abs() < 1e-15);
        let c = fit.slope_weights(&xs);
        let s: f64 = c.iter().zip(&ys).map(|(c, y)| c * y).sum();
        assert!((s - fit.slope).abs() < 1e-15);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5).unwrap(), 3.0);
        assert_eq!(quantile(&v, 0.25).unwrap(), 2.0);
        assert_eq!(quantile(&v, 0.1).unwrap(), 1.4);
    }
}
