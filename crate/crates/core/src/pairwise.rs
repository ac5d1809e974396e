//! Blocked double sums of a truncated Gaussian kernel over point sets.
//!
//! The index square is cut into `TILE × TILE` blocks. A block whose bounding
//! boxes are further apart than the kernel cutoff radius contributes exactly
//! zero (the truncated kernel vanishes there) and is skipped. Summation
//! order is fixed for a given tile size: rows within a block, blocks in
//! row-major order, eight accumulator lanes per row.

use alloc::vec::Vec;

use crate::math::{kernel_exp, KERNEL_CUTOFF};

pub(crate) const TILE: usize = 64;

/// `exp(-|d|² / (2·var))`, set to zero where the exponent is below
/// `-KERNEL_CUTOFF`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    neg_inv_two_var: f64,
}

impl Kernel {
    pub(crate) fn new(var: f64) -> Self {
        Self {
            neg_inv_two_var: -0.5 / var,
        }
    }

    #[inline(always)]
    pub(crate) fn eval(&self, dx: f64, dy: f64) -> f64 {
        kernel_exp((dx * dx + dy * dy) * self.neg_inv_two_var)
    }

    fn skips(&self, gap2: f64) -> bool {
        gap2 * self.neg_inv_two_var < -KERNEL_CUTOFF
    }
}

/// Trapezoid coefficients on `n` consecutive grid vertices: ½ at both ends,
/// 1 inside. A single vertex spans zero time and gets 0.
pub(crate) fn trapezoid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => {
            let mut w = alloc::vec![1.0; n];
            w[0] = 0.5;
            w[n - 1] = 0.5;
            w
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BBox {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl BBox {
    fn of(xs: &[f64], ys: &[f64]) -> Self {
        let mut b = BBox {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (&x, &y) in xs.iter().zip(ys) {
            b.x0 = b.x0.min(x);
            b.x1 = b.x1.max(x);
            b.y0 = b.y0.min(y);
            b.y1 = b.y1.max(y);
        }
        b
    }

    fn gap2(&self, o: &BBox) -> f64 {
        let dx = (self.x0 - o.x1).max(o.x0 - self.x1).max(0.0);
        let dy = (self.y0 - o.y1).max(o.y0 - self.y1).max(0.0);
        dx * dx + dy * dy
    }
}

/// A weighted point set: coordinates borrowed from a path, trapezoid
/// coefficients owned.
pub(crate) struct Points<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    w: Vec<f64>,
    boxes: Vec<BBox>,
}

impl<'a> Points<'a> {
    pub(crate) fn trapezoid(xs: &'a [f64], ys: &'a [f64]) -> Self {
        Self::weighted(xs, ys, trapezoid(xs.len()))
    }

    pub(crate) fn weighted(xs: &'a [f64], ys: &'a [f64], w: Vec<f64>) -> Self {
        debug_assert_eq!(xs.len(), ys.len());
        debug_assert_eq!(xs.len(), w.len());
        let boxes = xs
            .chunks(TILE)
            .zip(ys.chunks(TILE))
            .map(|(x, y)| BBox::of(x, y))
            .collect();
        Self { xs, ys, w, boxes }
    }

    fn len(&self) -> usize {
        self.xs.len()
    }

    fn tile(&self, t: usize) -> (usize, usize) {
        let lo = t * TILE;
        (lo, (lo + TILE).min(self.len()))
    }
}

#[inline(always)]
fn row(px: f64, py: f64, xs: &[f64], ys: &[f64], ws: &[f64], k: &Kernel) -> f64 {
    let n = xs.len().min(ys.len()).min(ws.len());
    let (xs, ys, ws) = (&xs[..n], &ys[..n], &ws[..n]);
    let mut acc = [0.0f64; 8];
    let full = n - n % 8;
    let mut j = 0;
    while j < full {
        let x8: &[f64; 8] = xs[j..j + 8].try_into().unwrap();
        let y8: &[f64; 8] = ys[j..j + 8].try_into().unwrap();
        let w8: &[f64; 8] = ws[j..j + 8].try_into().unwrap();
        for l in 0..8 {
            acc[l] += w8[l] * k.eval(px - x8[l], py - y8[l]);
        }
        j += 8;
    }
    let mut tail = 0.0;
    for j in full..n {
        tail += ws[j] * k.eval(px - xs[j], py - ys[j]);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// `Σ_i Σ_j a.w_i · b.w_j · k(a_i − b_j)`.
pub(crate) fn cross_sum(a: &Points<'_>, b: &Points<'_>, k: &Kernel) -> f64 {
    let mut total = 0.0;
    for (ta, box_a) in a.boxes.iter().enumerate() {
        let (a0, a1) = a.tile(ta);
        for (tb, box_b) in b.boxes.iter().enumerate() {
            if k.skips(box_a.gap2(box_b)) {
                continue;
            }
            let (b0, b1) = b.tile(tb);
            let (bx, by, bw) = (&b.xs[b0..b1], &b.ys[b0..b1], &b.w[b0..b1]);
            let mut block = 0.0;
            for i in a0..a1 {
                block += a.w[i] * row(a.xs[i], a.ys[i], bx, by, bw, k);
            }
            total += block;
        }
    }
    total
}

/// `½ Σ_i Σ_j w_i w_j k(p_i − p_j)`, evaluated as the strict upper triangle
/// plus half the diagonal (where the kernel is 1).
pub(crate) fn self_sum(a: &Points<'_>, k: &Kernel) -> f64 {
    let mut total = 0.0;
    for (ta, box_a) in a.boxes.iter().enumerate() {
        let (a0, a1) = a.tile(ta);
        let mut block = 0.0;
        for i in a0..a1 {
            let w = a.w[i];
            block += 0.5 * w * w;
            let j0 = i + 1;
            block += w * row(
                a.xs[i],
                a.ys[i],
                &a.xs[j0..a1],
                &a.ys[j0..a1],
                &a.w[j0..a1],
                k,
            );
        }
        total += block;
        for (tb, box_b) in a.boxes.iter().enumerate().skip(ta + 1) {
            if k.skips(box_a.gap2(box_b)) {
                continue;
            }
            let (b0, b1) = a.tile(tb);
            let (bx, by, bw) = (&a.xs[b0..b1], &a.ys[b0..b1], &a.w[b0..b1]);
            let mut block = 0.0;
            for i in a0..a1 {
                block += a.w[i] * row(a.xs[i], a.ys[i], bx, by, bw, k);
            }
            total += block;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    fn cloud(n: usize, spread: f64) -> (Vec<f64>, Vec<f64>) {
        let mut s: u64 = 0x1234_5678;
        let mut next = || {
            s = s
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            ((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * spread
        };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let (mut x, mut y) = (0.0, 0.0);
        for _ in 0..n {
            xs.push(x);
            ys.push(y);
            x += next();
            y += next();
        }
        (xs, ys)
    }

    fn naive_cross(a: &Points<'_>, b: &Points<'_>, var: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            for j in 0..b.len() {
                let dx = a.xs[i] - b.xs[j];
                let dy = a.ys[i] - b.ys[j];
                s += a.w[i] * b.w[j] * exp(-(dx * dx + dy * dy) / (2.0 * var));
            }
        }
        s
    }

    #[test]
    fn blocked_sums_match_naive_loops() {
        let (xs, ys) = cloud(301, 0.8);
        let (us, vs) = cloud(157, 0.5);
        for var in [0.001, 0.05, 3.0] {
            let k = Kernel::new(var);
            let a = Points::trapezoid(&xs, &ys);
            let b = Points::trapezoid(&us, &vs);
            let fast = cross_sum(&a, &b, &k);
            let slow = naive_cross(&a, &b, var);
            assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0), "{fast} {slow}");
            let fast_self = self_sum(&a, &k);
            let slow_self = 0.5 * naive_cross(&a, &a, var);
            assert!((fast_self - slow_self).abs() <= 1e-12 * slow_self.abs().max(1.0));
        }
    }

    #[test]
    fn far_tiles_are_skipped_exactly() {
        // two clusters far apart: every block is skipped, result is 0
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 1e-3).collect();
        let ys = alloc::vec![0.0; 100];
        let us: Vec<f64> = xs.iter().map(|x| x + 50.0).collect();
        let a = Points::trapezoid(&xs, &ys);
        let b = Points::trapezoid(&us, &ys);
        assert_eq!(cross_sum(&a, &b, &Kernel::new(1.0)), 0.0);
    }

    #[test]
    fn trapezoid_coefficients() {
        assert!(trapezoid(0).is_empty());
        assert_eq!(trapezoid(1), alloc::vec![0.0]);
        assert_eq!(trapezoid(2), alloc::vec![0.5, 0.5]);
        assert_eq!(trapezoid(4), alloc::vec![0.5, 1.0, 1.0, 0.5]);
    }
}
