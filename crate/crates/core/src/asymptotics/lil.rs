//! Law-of-the-iterated-logarithm explorers along geometric checkpoints.
//!
//! `β̂` over `[0, t_n]` is extended from `[0, t_{n−1}]` by one new piece and
//! one centered cross term, so a trace costs about one evaluation of `β̂`
//! over the final horizon instead of one per checkpoint.

use alloc::vec::Vec;

use crate::error::{ensure_positive, Error, Result};
use crate::estimators::{cross_ilt, MollifierScale};
use crate::math::{ln, powf, round, TAU};
use crate::path::{generate_path, Interval, PlanarPath};
use crate::silt::{beta_hat, expected_cross};
use crate::stats::quantile;

/// Longest path a trace may allocate.
pub const LIL_MAX_STEPS: u64 = 1 << 23;

#[derive(Debug, Clone, PartialEq)]
pub struct LilTrace {
    pub seed: u64,
    /// Grid-aligned `t_n ≈ q^n`.
    pub checkpoints: Vec<f64>,
    /// Incrementally accumulated `β̂_{t_n}`.
    pub values: Vec<f64>,
    /// `β̂_{t_n}` recomputed from scratch, when audited.
    pub audit: Option<Vec<f64>>,
    /// `β̂/(t·log log t)` where `log log t > 0`.
    pub normalized_up: Vec<Option<f64>>,
    /// `−β̂/(t·log log log t)` where `log log log t > 0`.
    pub normalized_down: Vec<Option<f64>>,
}

impl LilTrace {
    /// Largest relative gap between incremental and batch values.
    pub fn max_audit_gap(&self) -> Option<f64> {
        self.audit.as_ref().map(|batch| {
            self.values
                .iter()
                .zip(batch)
                .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        })
    }

    pub fn max_up(&self) -> Option<f64> {
        max_defined(&self.normalized_up)
    }

    pub fn max_down(&self) -> Option<f64> {
        max_defined(&self.normalized_down)
    }
}

fn max_defined(v: &[Option<f64>]) -> Option<f64> {
    v.iter().flatten().copied().reduce(f64::max)
}

/// `log log t` when positive.
pub fn loglog(t: f64) -> Option<f64> {
    (t > 1.0).then(|| ln(ln(t))).filter(|v| *v > 0.0)
}

/// `log log log t` when positive.
pub fn logloglog(t: f64) -> Option<f64> {
    loglog(t).filter(|v| *v > 1.0).map(ln)
}

/// Grid indices of `q^1, …, q^n` rounded to the `dt` grid.
pub fn checkpoint_indices(q: f64, n_checkpoints: usize, dt: f64) -> Result<Vec<usize>> {
    ensure_positive("dt", dt)?;
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: alloc::format!("ratio must exceed 1, got {q}"),
        });
    }
    if n_checkpoints == 0 {
        return Err(Error::InvalidParameter {
            name: "n_checkpoints",
            reason: "need at least one checkpoint".into(),
        });
    }
    let last = round(powf(q, n_checkpoints as f64) / dt);
    if last >= LIL_MAX_STEPS as f64 {
        return Err(Error::StepOverflow {
            n_steps: if last.is_finite() { last as u64 } else { u64::MAX },
        });
    }
    let idx: Vec<usize> = (1..=n_checkpoints)
        .map(|n| round(powf(q, n as f64) / dt) as usize)
        .collect();
    if idx[0] == 0 || idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "grid too coarse to separate the checkpoints".into(),
        });
    }
    Ok(idx)
}

fn incremental(path: &PlanarPath, idx: &[usize], eps: MollifierScale) -> Result<Vec<f64>> {
    let dt = path.dt();
    let mut out = Vec::with_capacity(idx.len());
    let mut acc = 0.0;
    let mut prev = 0usize;
    for &k in idx {
        let piece = Interval::new(prev, k)?;
        acc += beta_hat(path, piece, eps)?.value;
        if prev > 0 {
            let head = Interval::new(0, prev)?;
            let (s, t) = (prev as f64 * dt, k as f64 * dt);
            acc += cross_ilt(path, head, piece, eps)? - expected_cross(0.0, s, s, t, eps);
        }
        out.push(acc);
        prev = k;
    }
    Ok(out)
}

fn build(seed: u64, q: f64, n_checkpoints: usize, eps: MollifierScale, dt: f64, audit: bool) -> Result<LilTrace> {
    let idx = checkpoint_indices(q, n_checkpoints, dt)?;
    let path = generate_path(seed, dt, *idx.last().unwrap_or(&0) as u64)?;
    let values = incremental(&path, &idx, eps)?;
    let audit = if audit {
        Some(
            idx.iter()
                .map(|&k| Ok(beta_hat(&path, Interval::new(0, k)?, eps)?.value))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let checkpoints: Vec<f64> = idx.iter().map(|&k| k as f64 * dt).collect();
    let normalized_up = checkpoints
        .iter()
        .zip(&values)
        .map(|(&t, &b)| loglog(t).map(|l| b / (t * l)))
        .collect();
    let normalized_down = checkpoints
        .iter()
        .zip(&values)
        .map(|(&t, &b)| logloglog(t).map(|l| -b / (t * l)))
        .collect();
    Ok(LilTrace {
        seed,
        checkpoints,
        values,
        audit,
        normalized_up,
        normalized_down,
    })
}

/// One trajectory of `β̂` at the checkpoints `q^n`, `n = 1..=n_checkpoints`.
pub fn lil_trace(seed: u64, q: f64, n_checkpoints: usize, eps: MollifierScale, dt: f64) -> Result<LilTrace> {
    build(seed, q, n_checkpoints, eps, dt, false)
}

/// [`lil_trace`] plus a from-scratch recomputation at every checkpoint.
pub fn lil_trace_audited(
    seed: u64,
    q: f64,
    n_checkpoints: usize,
    eps: MollifierScale,
    dt: f64,
) -> Result<LilTrace> {
    build(seed, q, n_checkpoints, eps, dt, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    fn of(mut v: Vec<f64>) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Self {
            q1: quantile(&v, 0.25).ok()?,
            median: quantile(&v, 0.5).ok()?,
            q3: quantile(&v, 0.75).ok()?,
        })
    }
}

/// Across-replica spread of the per-trace maxima, with the limiting
/// reference levels for comparison. Exploratory: finite horizons say
/// nothing definite about the limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LilSummary {
    pub n_replicas: usize,
    pub max_up: Option<Quartiles>,
    pub max_down: Option<Quartiles>,
    /// `1/γ_β`.
    pub reference_up: f64,
    /// `1/(2π)`.
    pub reference_down: f64,
}

pub fn lil_summary(traces: &[LilTrace], gamma_beta: f64) -> Result<LilSummary> {
    ensure_positive("gamma_beta", gamma_beta)?;
    if traces.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(LilSummary {
        n_replicas: traces.len(),
        max_up: Quartiles::of(traces.iter().filter_map(LilTrace::max_up).collect()),
        max_down: Quartiles::of(traces.iter().filter_map(LilTrace::max_down).collect()),
        reference_up: 1.0 / gamma_beta,
        reference_down: 1.0 / TAU,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    #[test]
    fn domains_of_the_normalizations() {
        assert_eq!(loglog(exp(1.0) * 0.999), None);
        assert!(loglog(exp(1.0) * 1.001).is_some());
        assert_eq!(logloglog(15.0), None);
        assert!(logloglog(16.0).is_some());
    }

    #[test]
    fn checkpoints_are_on_grid_and_increasing() {
        let idx = checkpoint_indices(crate::math::sqrt(10.0), 8, 0.5).unwrap();
        assert_eq!(idx.len(), 8);
        assert_eq!(*idx.last().unwrap(), 20_000);
        assert!(checkpoint_indices(1.0, 3, 0.1).is_err());
        assert!(checkpoint_indices(1.01, 3, 1.0).is_err());
        assert!(matches!(
            checkpoint_indices(10.0, 12, 0.5),
            Err(Error::StepOverflow { .. })
        ));
    }

    #[test]
    fn incremental_matches_batch() {
        let eps = MollifierScale::new(0.4).unwrap();
        let trace = lil_trace_audited(11, 2.0, 6, eps, 0.05).unwrap();
        assert!(trace.max_audit_gap().unwrap() < 1e-10);
        for (t, up) in trace.checkpoints.iter().zip(&trace.normalized_up) {
            assert_eq!(up.is_some(), *t > exp(1.0));
        }
        for (t, down) in trace.checkpoints.iter().zip(&trace.normalized_down) {
            assert_eq!(down.is_some(), *t > exp(exp(1.0)));
        }
        let plain = lil_trace(11, 2.0, 6, eps, 0.05).unwrap();
        assert_eq!(plain.values, trace.values);
        assert!(plain.audit.is_none());
    }

    #[test]
    fn summary_quartiles() {
        let eps = MollifierScale::new(0.4).unwrap();
        let traces: Vec<_> = (0..5)
            .map(|s| lil_trace(s, 2.0, 5, eps, 0.1).unwrap())
            .collect();
        let s = lil_summary(&traces, 5.85).unwrap();
        let up = s.max_up.unwrap();
        assert!(up.q1 <= up.median && up.median <= up.q3);
        assert!(s.max_down.is_some());
        assert!((s.reference_down - 1.0 / TAU).abs() < 1e-16);
        assert!(lil_summary(&[], 5.85).is_err());
    }
}
