//! Monte Carlo batch drivers: replica samples of `α̂` and `β̂`, tail curves,
//! LIL trajectory explorers and the dyadic occupation statistic.
//!
//! A replica is a pure function of `(base_seed, index)`. Drivers hand the
//! index range to a [`ReplicaExecutor`], which must return results in index
//! order; all reductions then run sequentially over that ordered vector, so
//! the output does not depend on how the executor schedules work.

mod lil;
mod occupation;
mod tail;

pub use lil::{
    checkpoint_indices, lil_summary, lil_trace, lil_trace_audited, loglog, logloglog, LilSummary, LilTrace,
    Quartiles,
};
pub use occupation::{
    dyadic_scales, expected_occupation_at_start, occupation_in_ball, occupation_sup_stat,
};
pub use tail::{
    geometric_thresholds, l_proxy, SlopeFit, TailCurve, MIN_EXCEEDANCES,
};

use alloc::vec::Vec;

use crate::error::{ensure_positive, Error, Result};
use crate::estimators::{alpha_hat, MollifierScale};
use crate::math::round;
use crate::path::{generate_path, independent_pair, replica_seed};
use crate::silt::{beta_hat, c_n_prefix};
use crate::stats::{config_fingerprint, EstimatorResult, Summary};

/// Runs `n` indexed tasks and returns their results in index order.
pub trait ReplicaExecutor {
    fn map_indexed<T, F>(&self, n: u64, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

/// Runs every task on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ReplicaExecutor for Sequential {
    fn map_indexed<T, F>(&self, n: u64, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..n).map(task).collect()
    }
}

/// Shared parameters of a replica batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSpec {
    pub base_seed: u64,
    pub n_replicas: u64,
    pub dt: f64,
    pub eps: MollifierScale,
}

impl BatchSpec {
    pub fn new(base_seed: u64, n_replicas: u64, dt: f64, eps: MollifierScale) -> Result<Self> {
        ensure_positive("dt", dt)?;
        if n_replicas == 0 {
            return Err(Error::InvalidParameter {
                name: "n_replicas",
                reason: "need at least one replica".into(),
            });
        }
        Ok(Self {
            base_seed,
            n_replicas,
            dt,
            eps,
        })
    }

    pub fn seed(&self, index: u64) -> u64 {
        replica_seed(self.base_seed, index)
    }

    pub fn fingerprint(&self, horizon: f64, estimator: &str) -> u64 {
        config_fingerprint(self.base_seed, self.dt, self.eps.eps(), horizon, estimator)
    }

    /// Mean, standard error and fingerprint of a sample drawn from this
    /// batch.
    pub fn summarize(&self, sample: &[f64], horizon: f64, estimator: &str) -> Result<EstimatorResult> {
        let s = Summary::of(sample)?;
        Ok(EstimatorResult {
            value: s.mean,
            std_error: s.std_error,
            n_replicas: s.n,
            config_fingerprint: self.fingerprint(horizon, estimator),
        })
    }
}

/// Number of grid steps covering `t`, which must be a multiple of `dt`.
pub fn steps_for(t: f64, dt: f64) -> Result<u64> {
    ensure_positive("dt", dt)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "time",
            reason: alloc::format!("must be finite and nonnegative, got {t}"),
        });
    }
    let k = round(t / dt);
    if (k * dt - t).abs() > 1e-9 * dt.max(t) {
        return Err(Error::NotGridAligned { time: t, dt });
    }
    Ok(k as u64)
}

/// `α̂(s, t)` for the independent pair of replica seed `seed`.
pub fn alpha_replica(seed: u64, dt: f64, eps: MollifierScale, s: f64, t: f64) -> Result<f64> {
    let (x, y) = independent_pair(seed, dt, steps_for(s, dt)?, steps_for(t, dt)?)?;
    alpha_hat(&x, &y, eps, s, t)
}

/// `β̂` over `[0, horizon]` for the path of replica seed `seed`.
pub fn beta_replica(seed: u64, dt: f64, eps: MollifierScale, horizon: f64) -> Result<f64> {
    let path = generate_path(seed, dt, steps_for(horizon, dt)?)?;
    Ok(beta_hat(&path, path.full(), eps)?.value)
}

/// `Ĉ_1, …, Ĉ_n` for the path of replica seed `seed`.
pub fn c_n_replica(seed: u64, dt: f64, eps: MollifierScale, n: usize) -> Result<Vec<f64>> {
    let path = generate_path(seed, dt, steps_for(n as f64, dt)?)?;
    c_n_prefix(&path, n, eps)
}

fn collect<E: ReplicaExecutor, T: Send>(
    exec: &E,
    spec: &BatchSpec,
    task: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    exec.map_indexed(spec.n_replicas, |i| task(spec.seed(i)))
        .into_iter()
        .collect()
}

/// Replica values of `α̂(s, t)` in index order.
pub fn sample_alpha<E: ReplicaExecutor>(exec: &E, spec: &BatchSpec, s: f64, t: f64) -> Result<Vec<f64>> {
    steps_for(s, spec.dt)?;
    steps_for(t, spec.dt)?;
    collect(exec, spec, |seed| alpha_replica(seed, spec.dt, spec.eps, s, t))
}

/// Replica values of `β̂` over `[0, horizon]` in index order.
pub fn sample_beta<E: ReplicaExecutor>(exec: &E, spec: &BatchSpec, horizon: f64) -> Result<Vec<f64>> {
    steps_for(horizon, spec.dt)?;
    collect(exec, spec, |seed| beta_replica(seed, spec.dt, spec.eps, horizon))
}

/// Replica prefixes `Ĉ_1..Ĉ_n` in index order.
pub fn sample_c_n<E: ReplicaExecutor>(exec: &E, spec: &BatchSpec, n: usize) -> Result<Vec<Vec<f64>>> {
    steps_for(n as f64, spec.dt)?;
    collect(exec, spec, |seed| c_n_replica(seed, spec.dt, spec.eps, n))
}

/// Replica values of the dyadic occupation statistic over `[0, 1]`.
pub fn sample_occupation_sup<E: ReplicaExecutor>(exec: &E, spec: &BatchSpec) -> Result<Vec<f64>> {
    let n = steps_for(1.0, spec.dt)?;
    collect(exec, spec, |seed| {
        let path = generate_path(seed, spec.dt, n)?;
        occupation_sup_stat(&path, 1.0)
    })
}

/// Upper-tail curve of `α̂(1,1)`.
pub fn tail_curve_alpha<E: ReplicaExecutor>(
    exec: &E,
    spec: &BatchSpec,
    thresholds: Vec<f64>,
    window: (f64, f64),
) -> Result<TailCurve> {
    TailCurve::from_sample(&sample_alpha(exec, spec, 1.0, 1.0)?, thresholds, window)
}

/// Upper-tail curve of `β̂₁`.
pub fn tail_curve_beta_upper<E: ReplicaExecutor>(
    exec: &E,
    spec: &BatchSpec,
    thresholds: Vec<f64>,
    window: (f64, f64),
) -> Result<TailCurve> {
    TailCurve::from_sample(&sample_beta(exec, spec, 1.0)?, thresholds, window)
}

/// Curve of `P(−β̂₁ ≥ ℓ)` over the levels `ℓ`.
pub fn tail_curve_beta_lower<E: ReplicaExecutor>(
    exec: &E,
    spec: &BatchSpec,
    levels: Vec<f64>,
    window: (f64, f64),
) -> Result<TailCurve> {
    let d: Vec<f64> = sample_beta(exec, spec, 1.0)?.iter().map(|b| -b).collect();
    TailCurve::from_sample(&d, levels, window)
}

/// Curve of `P(α̂(1, a) ≥ λ)`.
pub fn alpha_small_a_tail<E: ReplicaExecutor>(
    exec: &E,
    spec: &BatchSpec,
    a: f64,
    lambdas: Vec<f64>,
    window: (f64, f64),
) -> Result<TailCurve> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: alloc::format!("must lie in (0, 1), got {a}"),
        });
    }
    TailCurve::from_sample(&sample_alpha(exec, spec, 1.0, a)?, lambdas, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spec(n: u64, dt: f64, e: f64) -> BatchSpec {
        BatchSpec::new(99, n, dt, MollifierScale::new(e).unwrap()).unwrap()
    }

    #[test]
    fn samples_are_reproducible_per_replica() {
        let s = spec(6, 1.0 / 64.0, 1.0 / 8.0);
        let a = sample_beta(&Sequential, &s, 1.0).unwrap();
        let b = sample_beta(&Sequential, &s, 1.0).unwrap();
        assert_eq!(a, b);
        let third = beta_replica(s.seed(3), s.dt, s.eps, 1.0).unwrap();
        assert_eq!(a[3].to_bits(), third.to_bits());
        assert!(a.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn off_grid_horizon_is_rejected() {
        let s = spec(2, 0.3, 2.0);
        assert!(matches!(
            sample_beta(&Sequential, &s, 1.0),
            Err(Error::NotGridAligned { .. })
        ));
        assert!(matches!(
            alpha_small_a_tail(&Sequential, &spec(2, 0.25, 1.0), 1.5, vec![1.0], (0.0, 1.0)),
            Err(Error::InvalidParameter { name: "a", .. })
        ));
    }

    #[test]
    fn summary_carries_fingerprint() {
        let s = spec(4, 1.0 / 32.0, 1.0 / 4.0);
        let sample = sample_alpha(&Sequential, &s, 1.0, 1.0).unwrap();
        let r = s.summarize(&sample, 1.0, "alpha").unwrap();
        assert_eq!(r.n_replicas, 4);
        assert!(r.std_error >= 0.0);
        assert_eq!(r.config_fingerprint, s.fingerprint(1.0, "alpha"));
        assert_ne!(r.config_fingerprint, s.fingerprint(1.0, "beta"));
    }

    #[test]
    fn c_n_samples_have_prefix_shape() {
        let s = spec(3, 1.0 / 16.0, 0.5);
        let c = sample_c_n(&Sequential, &s, 3).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|p| p.len() == 3 && p[0] == 0.0));
    }
}
