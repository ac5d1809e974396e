//! Heat-kernel mollified intersection functionals.
//!
//! All time integrals are trapezoid sums on the path grid. With weights
//! `w_i = dt` inside and `dt/2` at interval ends, any double sum over a
//! rectangle equals the sum over a grid-aligned partition of that rectangle
//! in exact arithmetic. The self-intersection functional over the ordered
//! triangle `{u ≤ s}` is half of the square sum, which puts weight ½ on the
//! diagonal cells.
//!
//! Pairwise sums use a kernel truncated where `|x|²/(2ε) > 36`; see
//! [`crate::math::KERNEL_CUTOFF`].

use alloc::vec::Vec;

use crate::error::{ensure_positive, Error, Result};
use crate::math::{ceil, exp, floor, kernel_exp, sqrt, TAU};
use crate::pairwise::{cross_sum, self_sum, Kernel, Points};
use crate::path::{Interval, PlanarPath};

/// Default `ε / dt`: keeps the double-sum quadrature bias near 1%.
pub const DEFAULT_EPS_PER_DT: f64 = 8.0;

/// Below this `ε / dt` the grid under-resolves the mollifier.
pub const MIN_EPS_PER_DT: f64 = 4.0;

/// Occupation grids evaluate the kernel within this many `√ε` of a vertex.
pub const OCCUPATION_RADIUS: f64 = 5.0;

/// Occupation grids must extend at least this many `√ε` past the path.
pub const OCCUPATION_MARGIN: f64 = 4.0;

/// Heat-kernel bandwidth ε, in time units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MollifierScale(f64);

impl MollifierScale {
    pub fn new(eps: f64) -> Result<Self> {
        ensure_positive("eps", eps).map(Self)
    }

    /// The default coupling `ε = 8·dt`.
    pub fn coupled(dt: f64) -> Result<Self> {
        ensure_positive("dt", dt)?;
        Self::new(DEFAULT_EPS_PER_DT * dt)
    }

    pub fn eps(self) -> f64 {
        self.0
    }

    /// Same scale in a time frame stretched by `c`.
    pub fn scaled(self, c: f64) -> Result<Self> {
        ensure_positive("c", c)?;
        Self::new(self.0 * c)
    }

    /// True when `ε < 4·dt`, where the quadrature bias stops being small.
    pub fn under_resolves(self, dt: f64) -> bool {
        self.0 < MIN_EPS_PER_DT * dt
    }

    pub(crate) fn kernel(self) -> Kernel {
        Kernel::new(self.0)
    }

    /// Peak value `1 / (2πε)`.
    pub(crate) fn peak(self) -> f64 {
        1.0 / (TAU * self.0)
    }
}

/// `p_ε(x) = exp(−|x|²/(2ε)) / (2πε)`, the density of planar Brownian motion
/// at time ε.
pub fn heat_kernel(eps: MollifierScale, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    eps.peak() * exp(-r2 / (2.0 * eps.0))
}

fn same_dt(a: &PlanarPath, b: &PlanarPath) -> Result<f64> {
    if (a.dt() - b.dt()).abs() > 1e-12 * a.dt() {
        return Err(Error::MismatchedStep {
            left: a.dt(),
            right: b.dt(),
        });
    }
    Ok(a.dt())
}

fn points<'a>(path: &'a PlanarPath, iv: Interval) -> Points<'a> {
    Points::trapezoid(&path.xs()[iv.lo..=iv.hi], &path.ys()[iv.lo..=iv.hi])
}

/// Mollified mutual intersection local time of two independent paths over
/// `[0,s] × [0,t]`.
pub fn alpha_hat(
    x_path: &PlanarPath,
    y_path: &PlanarPath,
    eps: MollifierScale,
    s: f64,
    t: f64,
) -> Result<f64> {
    let i = Interval::new(0, x_path.index_of(s)?)?;
    let j = Interval::new(0, y_path.index_of(t)?)?;
    alpha_hat_on(x_path, i, y_path, j, eps)
}

/// [`alpha_hat`] on an arbitrary grid rectangle `I × J`.
pub fn alpha_hat_on(
    x_path: &PlanarPath,
    i: Interval,
    y_path: &PlanarPath,
    j: Interval,
    eps: MollifierScale,
) -> Result<f64> {
    let dt = same_dt(x_path, y_path)?;
    i.check(x_path)?;
    j.check(y_path)?;
    if i.is_degenerate() || j.is_degenerate() {
        return Ok(0.0);
    }
    let sum = cross_sum(&points(x_path, i), &points(y_path, j), &eps.kernel());
    Ok(dt * dt * eps.peak() * sum)
}

/// Mollified intersection local time `Â(I;J)` between two pieces of one
/// path whose interiors are disjoint.
///
/// The intervals are put in a canonical order before summing, so the result
/// is bit-identical under swapping `I` and `J`.
pub fn cross_ilt(path: &PlanarPath, i: Interval, j: Interval, eps: MollifierScale) -> Result<f64> {
    i.check(path)?;
    j.check(path)?;
    if !i.interiors_disjoint(&j) {
        return Err(Error::OverlappingIntervals {
            a_lo: i.lo,
            a_hi: i.hi,
            b_lo: j.lo,
            b_hi: j.hi,
        });
    }
    let (first, second) = if (i.lo, i.hi) <= (j.lo, j.hi) { (i, j) } else { (j, i) };
    if first.is_degenerate() || second.is_degenerate() {
        return Ok(0.0);
    }
    let dt = path.dt();
    let sum = cross_sum(&points(path, first), &points(path, second), &eps.kernel());
    Ok(dt * dt * eps.peak() * sum)
}

/// `∬_{s<t, s,t∈I} p_ε(X_t − X_s) ds dt` on the grid: the uncentered
/// self-intersection functional of the piece `I`.
pub fn pairwise_functional(path: &PlanarPath, i: Interval, eps: MollifierScale) -> Result<f64> {
    i.check(path)?;
    if i.is_degenerate() {
        return Ok(0.0);
    }
    let dt = path.dt();
    Ok(dt * dt * eps.peak() * self_sum(&points(path, i), &eps.kernel()))
}

/// Axis-aligned cell grid for occupation densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub cell_size: f64,
    pub x_min: f64,
    pub y_min: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Smallest grid of the given cell size covering `path` with a
    /// `5√ε` margin, so no truncated kernel mass falls off the grid.
    pub fn covering(path: &PlanarPath, eps: MollifierScale, cell_size: f64) -> Result<Self> {
        ensure_positive("cell_size", cell_size)?;
        let (x0, x1, y0, y1) = extent(path);
        let m = OCCUPATION_RADIUS * sqrt(eps.eps());
        let x_min = floor((x0 - m) / cell_size) * cell_size;
        let y_min = floor((y0 - m) / cell_size) * cell_size;
        let nx = ceil((x1 + m - x_min) / cell_size) as usize;
        let ny = ceil((y1 + m - y_min) / cell_size) as usize;
        Ok(Self {
            cell_size,
            x_min,
            y_min,
            nx: nx.max(1),
            ny: ny.max(1),
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.nx as f64 * self.cell_size
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + self.ny as f64 * self.cell_size
    }

    pub fn center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.x_min + (ix as f64 + 0.5) * self.cell_size,
            self.y_min + (iy as f64 + 0.5) * self.cell_size,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }
}

fn extent(path: &PlanarPath) -> (f64, f64, f64, f64) {
    let fold = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let (x0, x1) = fold(path.xs());
    let (y0, y1) = fold(path.ys());
    (x0, x1, y0, y1)
}

/// Smoothed occupation density `L(t, x, ε) = ∫₀ᵗ p_ε(X_s − x) ds` sampled at
/// cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationGrid {
    pub spec: GridSpec,
    /// Time horizon `t` the density integrates over.
    pub horizon: f64,
    /// Row-major, `values[iy * nx + ix]`.
    pub values: Vec<f64>,
}

impl OccupationGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.spec.nx + ix]
    }

    /// `Σ L · cell_area`, which approximates `t`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_area()
    }

    /// `∫ L² dx` by the cell-center rule.
    pub fn l2_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.spec.cell_area()
    }
}

/// Occupation density of the whole path on `spec`.
pub fn occupation_density(
    path: &PlanarPath,
    eps: MollifierScale,
    spec: GridSpec,
) -> Result<OccupationGrid> {
    ensure_positive("cell_size", spec.cell_size)?;
    let (x0, x1, y0, y1) = extent(path);
    let margin = OCCUPATION_MARGIN * sqrt(eps.eps());
    if x0 - margin < spec.x_min
        || x1 + margin > spec.x_max()
        || y0 - margin < spec.y_min
        || y1 + margin > spec.y_max()
    {
        return Err(Error::GridTooSmall {
            need_x_min: x0 - margin,
            need_x_max: x1 + margin,
            need_y_min: y0 - margin,
            need_y_max: y1 + margin,
        });
    }
    let h = spec.cell_size;
    let radius = OCCUPATION_RADIUS * sqrt(eps.eps());
    let r2 = radius * radius;
    let neg_inv_two_eps = -0.5 / eps.eps();
    let peak = eps.peak();
    let weights = crate::pairwise::trapezoid(path.n_points());
    let dt = path.dt();
    let mut values = alloc::vec![0.0; spec.nx * spec.ny];
    let clamp = |v: f64, n: usize| -> usize {
        if v <= 0.0 {
            0
        } else {
            (v as usize).min(n)
        }
    };
    for ((&px, &py), &w) in path.xs().iter().zip(path.ys()).zip(&weights) {
        if w == 0.0 {
            continue;
        }
        let ix0 = clamp(floor((px - radius - spec.x_min) / h), spec.nx);
        let ix1 = clamp(ceil((px + radius - spec.x_min) / h), spec.nx);
        let iy0 = clamp(floor((py - radius - spec.y_min) / h), spec.ny);
        let iy1 = clamp(ceil((py + radius - spec.y_min) / h), spec.ny);
        let mass = w * dt * peak;
        for iy in iy0..iy1 {
            let cy = spec.y_min + (iy as f64 + 0.5) * h;
            let dy = py - cy;
            let row = &mut values[iy * spec.nx..(iy + 1) * spec.nx];
            for (ix, cell) in row.iter_mut().enumerate().take(ix1).skip(ix0) {
                let cx = spec.x_min + (ix as f64 + 0.5) * h;
                let dx = px - cx;
                let d2 = dx * dx + dy * dy;
                if d2 <= r2 {
                    *cell += mass * kernel_exp(d2 * neg_inv_two_eps);
                }
            }
        }
    }
    Ok(OccupationGrid {
        spec,
        horizon: path.horizon(),
        values,
    })
}

/// Both sides of the semigroup identity
/// `∬_{0≤s≤t≤T} p_{2ε}(X_s − X_t) ds dt = ½ ∫ L(T, x, ε)² dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub pairwise: f64,
    pub half_l2: f64,
}

impl IdentityCheck {
    pub fn rel_gap(&self) -> f64 {
        (self.pairwise - self.half_l2).abs() / self.pairwise.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn identity_check(
    path: &PlanarPath,
    eps: MollifierScale,
    horizon: f64,
    cell_size: f64,
) -> Result<IdentityCheck> {
    let head = path.shifted(Interval::new(0, path.index_of(horizon)?)?)?;
    let pairwise = pairwise_functional(&head, head.full(), eps.scaled(2.0)?)?;
    let spec = GridSpec::covering(&head, eps, cell_size)?;
    let grid = occupation_density(&head, eps, spec)?;
    Ok(IdentityCheck {
        pairwise,
        half_l2: 0.5 * grid.l2_sq(),
    })
}
