//! Renormalized self-intersection local time with exact centering.
//!
//! With the heat-kernel mollifier, `E p_ε(X_t − X_s) = p_{|t−s|+ε}(0) =
//! 1/(2π(|t−s|+ε))`, so every centering term is an elementary integral of
//! `1/(2π(τ+ε))`. Closed forms below use `F(x) = x·ln x` with `F(0) = 0`.
//!
//! The raw functional is the triangle quadrature described in
//! [`crate::estimators`]: strict upper triangle of the trapezoid product
//! rule plus half of its diagonal. The same convention is used for every
//! piece of a decomposition, which is what makes the decomposition identity
//! an algebraic regrouping of one sum.

use alloc::vec::Vec;

use crate::error::{ensure_positive, Error, Result};
use crate::estimators::{cross_ilt, pairwise_functional, MollifierScale};
use crate::math::{exp, ln, xlogx, TAU};
use crate::path::{Interval, PlanarPath};
use crate::quad;

/// `∫₀ᵀ ∫₀ˢ 1/(2π(s−u+ε)) du ds`, the exact mean of the mollified
/// self-intersection functional over `[0, T]`.
pub fn centering_term(horizon: f64, eps: MollifierScale) -> Result<f64> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "T",
            reason: alloc::format!("horizon must be finite and nonnegative, got {horizon}"),
        });
    }
    if horizon == 0.0 {
        return Ok(0.0);
    }
    let e = eps.eps();
    let t = horizon;
    Ok((xlogx(t + e) - xlogx(e) - t * ln(e) - t) / TAU)
}

/// Exact mean of `∫_a^b ∫_c^d p_ε(X_t − X_s) dt ds` for `a ≤ b ≤ c ≤ d`.
pub fn expected_cross(a: f64, b: f64, c: f64, d: f64, eps: MollifierScale) -> f64 {
    debug_assert!(a <= b && b <= c && c <= d);
    let e = eps.eps();
    (xlogx(d - a + e) - xlogx(c - a + e) - xlogx(d - b + e) + xlogx(c - b + e)) / TAU
}

/// Finite-ε mean of `α̂(s, t)` for two motions from a common point:
/// `(1/2π)[F(s+t+ε) − F(s+ε) − F(t+ε) + F(ε)]`.
pub fn expected_alpha_eps(s: f64, t: f64, eps: MollifierScale) -> Result<f64> {
    check_times(s, t)?;
    let e = eps.eps();
    Ok((xlogx(s + t + e) - xlogx(s + e) - xlogx(t + e) + xlogx(e)) / TAU)
}

fn check_times(s: f64, t: f64) -> Result<()> {
    for (name, v) in [("s", s), ("t", t)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter {
                name,
                reason: alloc::format!("must be finite and nonnegative, got {v}"),
            });
        }
    }
    Ok(())
}

/// `E α(s, t)` for motions started at `x0` and `y0`.
///
/// Equal starting points use the closed form
/// `(1/2π)[(s+t)ln(s+t) − s ln s − t ln t]`. Otherwise the double integral
/// of `exp(−|x0−y0|²/(2(r+u))) / (2π(r+u))` over `[0,s]×[0,t]` is reduced to
/// one dimension along `v = r + u`, where the rectangle's cross-section has
/// length `min(v, s, t, s+t−v)`, and integrated adaptively.
pub fn expected_alpha(s: f64, t: f64, x0: [f64; 2], y0: [f64; 2]) -> Result<f64> {
    check_times(s, t)?;
    let dx = x0[0] - y0[0];
    let dy = x0[1] - y0[1];
    let d2 = dx * dx + dy * dy;
    if d2 == 0.0 {
        return Ok((xlogx(s + t) - xlogx(s) - xlogx(t)) / TAU);
    }
    if s == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    let total = s + t;
    let f = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let width = v.min(lo).min(total - v).max(0.0);
        width * exp(-d2 / (2.0 * v)) / (TAU * v)
    };
    let tol = 1e-13;
    let mut sum = 0.0;
    for (a, b) in [(0.0, lo), (lo, hi), (hi, total)] {
        sum += quad::integrate(f, a, b, tol, tol, 2000)?.value;
    }
    Ok(sum)
}

/// Exact mean of the trapezoid-grid self-intersection functional on
/// `n_steps` steps of size `dt` (as opposed to [`centering_term`], the
/// continuum integral). The difference is the quadrature bias.
pub fn grid_centering(n_steps: usize, dt: f64, eps: MollifierScale) -> Result<f64> {
    ensure_positive("dt", dt)?;
    if n_steps == 0 {
        return Ok(0.0);
    }
    let n_points = n_steps + 1;
    let g = |lag: usize| 1.0 / (TAU * (lag as f64 * dt + eps.eps()));
    // Σ_i c_i c_{i+lag} for trapezoid coefficients c = (½, 1, …, 1, ½)
    let lag_weight = |lag: usize| -> f64 {
        let m = n_points - lag;
        match (lag, m) {
            (0, _) => (n_points - 2) as f64 + 0.5,
            (_, 1) => 0.25,
            _ => (m - 1) as f64,
        }
    };
    let mut sum = 0.5 * lag_weight(0) * g(0);
    for lag in 1..n_points {
        sum += lag_weight(lag) * g(lag);
    }
    Ok(dt * dt * sum)
}

/// A centered self-intersection estimate on one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteredSilt {
    /// Triangle quadrature of `p_ε(X_s − X_u)` over `u ≤ s` in the interval.
    pub raw: f64,
    /// Exact expectation of `raw` in the continuum.
    pub centering: f64,
    /// `raw − centering`.
    pub value: f64,
    pub eps: MollifierScale,
    /// Interval length in time units.
    pub horizon: f64,
}

/// `B̂(I)`: mollified, centered self-intersection local time of the piece
/// `I`. Depends on the path restricted to `I` only.
pub fn beta_hat(path: &PlanarPath, i: Interval, eps: MollifierScale) -> Result<CenteredSilt> {
    let raw = pairwise_functional(path, i, eps)?;
    let horizon = i.duration(path.dt());
    let centering = centering_term(horizon, eps)?;
    Ok(CenteredSilt {
        raw,
        centering,
        value: raw - centering,
        eps,
        horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTerm {
    /// Indices into the partition, `i < j`.
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Sub-path decomposition of `β̂` on the union of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub pieces: Vec<CenteredSilt>,
    pub cross_terms: Vec<CrossTerm>,
    /// Exact mean of the summed cross terms.
    pub cross_centering: f64,
    /// `Σ pieces + Σ cross_terms − cross_centering`.
    pub total: f64,
}

/// Checks that `partition` is a contiguous, ordered cover of one interval
/// and returns that interval.
pub fn partition_span(path: &PlanarPath, partition: &[Interval]) -> Result<Interval> {
    let first = partition.first().ok_or(Error::EmptyPartition)?;
    let last = partition[partition.len() - 1];
    for iv in partition {
        iv.check(path)?;
    }
    for w in partition.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.lo < a.hi {
            return Err(Error::OverlappingIntervals {
                a_lo: a.lo,
                a_hi: a.hi,
                b_lo: b.lo,
                b_hi: b.hi,
            });
        }
        if b.lo > a.hi {
            return Err(Error::PartitionGap {
                end: a.hi,
                next_start: b.lo,
            });
        }
    }
    Interval::new(first.lo, last.hi)
}

/// Splits `β̂` on the span of `partition` into per-piece terms, pairwise
/// cross terms and their exact centering.
pub fn decompose(
    path: &PlanarPath,
    partition: &[Interval],
    eps: MollifierScale,
) -> Result<Decomposition> {
    partition_span(path, partition)?;
    let dt = path.dt();
    let pieces = partition
        .iter()
        .map(|&iv| beta_hat(path, iv, eps))
        .collect::<Result<Vec<_>>>()?;
    let mut cross_terms = Vec::new();
    let mut cross_centering = 0.0;
    for (i, a) in partition.iter().enumerate() {
        for (j, b) in partition.iter().enumerate().skip(i + 1) {
            let value = cross_ilt(path, *a, *b, eps)?;
            cross_terms.push(CrossTerm { i, j, value });
            cross_centering += expected_cross(
                a.lo as f64 * dt,
                a.hi as f64 * dt,
                b.lo as f64 * dt,
                b.hi as f64 * dt,
                eps,
            );
        }
    }
    let piece_sum: f64 = pieces.iter().map(|p| p.value).sum();
    let cross_sum: f64 = cross_terms.iter().map(|c| c.value).sum();
    Ok(Decomposition {
        total: piece_sum + cross_sum - cross_centering,
        pieces,
        cross_terms,
        cross_centering,
    })
}

/// `C_1, …, C_n` where `C_m = Σ_{k=1}^{m−1} Â([0,k]; [k,k+1])` on unit time
/// blocks. The first entry is the empty sum.
pub fn c_n_prefix(path: &PlanarPath, n: usize, eps: MollifierScale) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "n must be at least 1".into(),
        });
    }
    if path.horizon() + 1e-9 * path.dt() < n as f64 {
        return Err(Error::HorizonTooShort {
            need: n as f64,
            have: path.horizon(),
        });
    }
    let unit = path.index_of(1.0)?;
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..n {
        let head = Interval::new(0, k * unit)?;
        let next = Interval::new(k * unit, (k + 1) * unit)?;
        acc += cross_ilt(path, head, next, eps)?;
        out.push(acc);
    }
    Ok(out)
}

/// `Ĉ_n = Σ_{k=1}^{n−1} Â([0,k]; [k,k+1])`.
pub fn c_n_hat(path: &PlanarPath, n: usize, eps: MollifierScale) -> Result<f64> {
    Ok(*c_n_prefix(path, n, eps)?.last().unwrap_or(&0.0))
}

/// Exact finite-ε mean of `Ĉ_n`. Tends to `n ln n / (2π)` as `ε → 0`.
pub fn expected_c_n(n: usize, eps: Option<MollifierScale>) -> f64 {
    match eps {
        None => xlogx(n as f64) / TAU,
        Some(e) => (1..n)
            .map(|k| {
                let k = k as f64;
                expected_cross(0.0, k, k, k + 1.0, e)
            })
            .fold(0.0, |acc, v| acc + v),
    }
}
