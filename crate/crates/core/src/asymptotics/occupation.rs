//! Ball occupation times `U_t(x, r) = ∫₀ᵗ 1{|X_s − x| < r} ds` and their
//! dyadic supremum.

use alloc::vec::Vec;

use crate::error::{ensure_positive, Result};
use crate::math::{ceil, exp, floor, ln, sqrt, LN_2};
use crate::pairwise::trapezoid;
use crate::path::{Interval, PlanarPath};
use crate::quad;

/// Centers are restricted to the open ball of this radius.
const CENTER_RADIUS: f64 = 4.0;

fn weights(path: &PlanarPath, horizon: f64) -> Result<(Interval, Vec<f64>)> {
    let iv = Interval::new(0, path.index_of(horizon)?)?;
    let dt = path.dt();
    let w = trapezoid(iv.hi + 1).into_iter().map(|c| c * dt).collect();
    Ok((iv, w))
}

/// Trapezoid approximation of `U_horizon(center, r)`.
pub fn occupation_in_ball(path: &PlanarPath, center: [f64; 2], r: f64, horizon: f64) -> Result<f64> {
    ensure_positive("r", r)?;
    let (_, w) = weights(path, horizon)?;
    let r2 = r * r;
    Ok(w.iter()
        .zip(path.positions())
        .filter(|(_, p)| {
            let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
            dx * dx + dy * dy < r2
        })
        .map(|(w, _)| w)
        .sum())
}

/// `(−1, k_max)` with `k_max = ⌈log₂(1/(4√dt))⌉`, never below −1.
pub fn dyadic_scales(dt: f64) -> Result<(i32, i32)> {
    ensure_positive("dt", dt)?;
    // exact powers of two must not round up to the next scale
    let k_max = ceil(ln(1.0 / (4.0 * sqrt(dt))) / LN_2 - 1e-9) as i32;
    Ok((-1, k_max.max(-1)))
}

/// `sup_k sup_{x ∈ 2^{−k}ℤ² ∩ B(0,4)} U(x, 2^{−k}) / 2^{−k}` over
/// `k = −1..=k_max`, with occupation measured on `[0, horizon]`.
///
/// Each path vertex is within `r` of at most nine lattice points of spacing
/// `r`, so every scale costs one pass over the path.
pub fn occupation_sup_stat(path: &PlanarPath, horizon: f64) -> Result<f64> {
    let (k_min, k_max) = dyadic_scales(path.dt())?;
    let (iv, w) = weights(path, horizon)?;
    let xs = &path.xs()[..=iv.hi];
    let ys = &path.ys()[..=iv.hi];
    let mut best: f64 = 0.0;
    for k in k_min..=k_max {
        let r = crate::math::powf(2.0, -f64::from(k));
        let r2 = r * r;
        // lattice indices m with |m·r| < 4
        let m = ceil(CENTER_RADIUS / r) as i64 - 1;
        let side = (2 * m + 1) as usize;
        let mut acc = alloc::vec![0.0f64; side * side];
        for ((&x, &y), &wi) in xs.iter().zip(ys).zip(&w) {
            let (ix_lo, ix_hi) = (ceil(x / r - 1.0) as i64, floor(x / r + 1.0) as i64);
            let (iy_lo, iy_hi) = (ceil(y / r - 1.0) as i64, floor(y / r + 1.0) as i64);
            for ix in ix_lo.max(-m)..=ix_hi.min(m) {
                for iy in iy_lo.max(-m)..=iy_hi.min(m) {
                    let (cx, cy) = (ix as f64 * r, iy as f64 * r);
                    if cx * cx + cy * cy >= CENTER_RADIUS * CENTER_RADIUS {
                        continue;
                    }
                    let (dx, dy) = (x - cx, y - cy);
                    if dx * dx + dy * dy < r2 {
                        acc[(ix + m) as usize * side + (iy + m) as usize] += wi;
                    }
                }
            }
        }
        let top = acc.iter().copied().fold(0.0, f64::max);
        best = best.max(top / r);
    }
    Ok(best)
}

/// `E U₁(X₀, r) = ∫₀¹ (1 − e^{−r²/(2s)}) ds` for planar Brownian motion.
pub fn expected_occupation_at_start(r: f64) -> Result<f64> {
    ensure_positive("r", r)?;
    let r2 = r * r;
    let f = |s: f64| if s <= 0.0 { 1.0 } else { 1.0 - exp(-r2 / (2.0 * s)) };
    Ok(quad::integrate(f, 0.0, 1.0, 1e-14, 1e-12, 2000)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::generate_path;

    #[test]
    fn scales_follow_resolution() {
        assert_eq!(dyadic_scales(1.0 / 1024.0).unwrap(), (-1, 3));
        assert_eq!(dyadic_scales(1.0 / 64.0).unwrap(), (-1, 1));
        assert_eq!(dyadic_scales(100.0).unwrap(), (-1, -1));
    }

    #[test]
    fn stationary_path_fills_the_origin_ball() {
        let p = PlanarPath::from_positions(0.01, &[[0.0, 0.0]; 101]).unwrap();
        assert!((occupation_in_ball(&p, [0.0, 0.0], 0.1, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(occupation_in_ball(&p, [1.0, 0.0], 0.5, 1.0).unwrap(), 0.0);
        // the smallest ball at the origin wins: 1 / 2^{−k_max}
        let (_, k_max) = dyadic_scales(0.01).unwrap();
        let s = occupation_sup_stat(&p, 1.0).unwrap();
        assert!((s - crate::math::powf(2.0, f64::from(k_max))).abs() < 1e-12);
    }

    #[test]
    fn statistic_matches_brute_force() {
        let p = generate_path(8, 1.0 / 256.0, 256).unwrap();
        let (k0, k1) = dyadic_scales(p.dt()).unwrap();
        let mut brute: f64 = 0.0;
        for k in k0..=k1 {
            let r = crate::math::powf(2.0, -f64::from(k));
            let m = (4.0 / r) as i64 + 1;
            for ix in -m..=m {
                for iy in -m..=m {
                    let c = [ix as f64 * r, iy as f64 * r];
                    if c[0] * c[0] + c[1] * c[1] < 16.0 {
                        brute = brute.max(occupation_in_ball(&p, c, r, 1.0).unwrap() / r);
                    }
                }
            }
        }
        let fast = occupation_sup_stat(&p, 1.0).unwrap();
        assert!((fast - brute).abs() < 1e-12, "{fast} {brute}");
        let cap = crate::math::powf(2.0, f64::from(k1));
        assert!(fast <= cap + 1e-12);
    }

    #[test]
    fn expected_occupation_oracle() {
        // large r: almost all of [0,1] is spent inside
        assert!(expected_occupation_at_start(20.0).unwrap() > 0.999);
        // small r: ≈ (r²/2)(ln(2/r²) + 1 − γ_E)
        let r: f64 = 1e-3;
        let approx = r * r / 2.0 * (ln(2.0 / (r * r)) + 1.0 - 0.577_215_664_901_532_9);
        let v = expected_occupation_at_start(r).unwrap();
        assert!((v / approx - 1.0).abs() < 1e-4, "{v} {approx}");
    }
}
