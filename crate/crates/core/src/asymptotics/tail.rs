//! Empirical survival curves and their log-linear slope fits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln, powf, sqrt, TAU};
use crate::stats::ols;

/// Thresholds with fewer exceedances are excluded from every fit.
pub const MIN_EXCEEDANCES: u64 = 50;

const Z_95: f64 = 1.959_963_984_540_054;

/// Least-squares slope of `log Ŝ(t)` against `t` with a delta-method CI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Exceedance counts `#{X ≥ t_k}` on ascending thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    pub thresholds: Vec<f64>,
    pub exceed_counts: Vec<u64>,
    pub n_replicas: u64,
    /// Threshold range of the reported slope fit.
    pub fit_window: (f64, f64),
    /// `None` when fewer than two thresholds qualify for the window.
    pub slope_fit: Option<SlopeFit>,
}

impl TailCurve {
    /// Counts exceedances of `sample` at each threshold and fits the slope
    /// over `window`. Errors when the smallest threshold has no exceedance.
    pub fn from_sample(sample: &[f64], thresholds: Vec<f64>, window: (f64, f64)) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if thresholds.is_empty()
            || thresholds.iter().any(|t| !t.is_finite())
            || thresholds.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidParameter {
                name: "thresholds",
                reason: "must be finite and strictly ascending".into(),
            });
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let exceed_counts: Vec<u64> = thresholds
            .iter()
            .map(|&t| (n - sorted.partition_point(|&v| v < t)) as u64)
            .collect();
        if exceed_counts[0] == 0 {
            return Err(Error::DegenerateTail {
                threshold: thresholds[0],
            });
        }
        let mut curve = Self {
            thresholds,
            exceed_counts,
            n_replicas: n as u64,
            fit_window: window,
            slope_fit: None,
        };
        curve.slope_fit = match curve.window_slope(window) {
            Ok(fit) => Some(fit),
            Err(Error::InvalidParameter { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(curve)
    }

    /// `log(count/n)`, `None` where the count is zero.
    pub fn log_survival(&self) -> Vec<Option<f64>> {
        let n = self.n_replicas as f64;
        self.exceed_counts
            .iter()
            .map(|&c| (c > 0).then(|| ln(c as f64 / n)))
            .collect()
    }

    fn qualifies(&self, k: usize, window: (f64, f64)) -> bool {
        let t = self.thresholds[k];
        t >= window.0 && t <= window.1 && self.exceed_counts[k] >= MIN_EXCEEDANCES
    }

    /// Whether each threshold takes part in the reported slope fit.
    pub fn in_fit_window(&self) -> Vec<bool> {
        (0..self.thresholds.len())
            .map(|k| self.qualifies(k, self.fit_window))
            .collect()
    }

    /// Threshold range where the empirical survival lies in
    /// `[p_low, p_high]`, for comparing curves at equal rarity. `None` when
    /// no threshold falls in the band.
    pub fn survival_band(&self, p_high: f64, p_low: f64) -> Option<(f64, f64)> {
        let n = self.n_replicas as f64;
        let inside: Vec<f64> = self
            .thresholds
            .iter()
            .zip(&self.exceed_counts)
            .filter(|(_, &c)| {
                let s = c as f64 / n;
                s <= p_high && s >= p_low
            })
            .map(|(&t, _)| t)
            .collect();
        Some((*inside.first()?, *inside.last()?))
    }

    /// Refits the reported slope over a new window.
    pub fn with_window(mut self, window: (f64, f64)) -> Result<Self> {
        self.fit_window = window;
        self.slope_fit = Some(self.window_slope(window)?);
        Ok(self)
    }

    /// OLS slope of `log Ŝ` over the qualifying thresholds in `window`.
    ///
    /// For `t_i ≤ t_j`, `Cov(log Ŝ_i, log Ŝ_j) ≈ (1 − S_i)/(n·S_i)`, so the
    /// slope `Σ c_k log Ŝ_k` has variance `cᵀΣc`.
    pub fn window_slope(&self, window: (f64, f64)) -> Result<SlopeFit> {
        let idx: Vec<usize> = (0..self.thresholds.len())
            .filter(|&k| self.qualifies(k, window))
            .collect();
        if idx.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: alloc::format!(
                    "only {} thresholds in [{}, {}] have at least {} exceedances",
                    idx.len(),
                    window.0,
                    window.1,
                    MIN_EXCEEDANCES
                ),
            });
        }
        let n = self.n_replicas as f64;
        let xs: Vec<f64> = idx.iter().map(|&k| self.thresholds[k]).collect();
        let surv: Vec<f64> = idx.iter().map(|&k| self.exceed_counts[k] as f64 / n).collect();
        let ys: Vec<f64> = surv.iter().map(|&s| ln(s)).collect();
        let fit = ols(&xs, &ys)?;
        let c = fit.slope_weights(&xs);
        let mut var = 0.0;
        for a in 0..c.len() {
            for b in 0..c.len() {
                // thresholds ascend, so the lower index has the larger survival
                let s = surv[a.min(b)];
                var += c[a] * c[b] * (1.0 - s) / (n * s);
            }
        }
        let std_error = sqrt(var.max(0.0));
        Ok(SlopeFit {
            slope: fit.slope,
            intercept: fit.intercept,
            std_error,
            ci_low: fit.slope - Z_95 * std_error,
            ci_high: fit.slope + Z_95 * std_error,
            window,
            n_points: idx.len(),
        })
    }
}

impl SlopeFit {
    /// Whether two independent slope estimates differ by less than the
    /// 95% half-width of their difference.
    pub fn agrees_with(&self, other: &SlopeFit) -> bool {
        let se = sqrt(self.std_error * self.std_error + other.std_error * other.std_error);
        (self.slope - other.slope).abs() <= Z_95 * se
    }
}

/// `n` thresholds geometrically spaced from `lo` to `hi` inclusive.
pub fn geometric_thresholds(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::InvalidParameter {
            name: "thresholds",
            reason: "geometric spacing needs 0 < lo < hi and at least two points".into(),
        });
    }
    let ratio = hi / lo;
    Ok((0..n)
        .map(|k| lo * powf(ratio, k as f64 / (n - 1) as f64))
        .collect())
}

/// Lower-tail proxy `−e^{−2πℓ}·log P(−β̂₁ ≥ ℓ)` at each level, reported as a
/// curve.
pub fn l_proxy(curve: &TailCurve) -> Vec<Option<f64>> {
    curve
        .thresholds
        .iter()
        .zip(curve.log_survival())
        .map(|(&l, ls)| ls.map(|v| -exp(-TAU * l) * v))
        .collect()
}
