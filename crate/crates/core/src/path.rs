//! Seeded planar Brownian paths on a uniform time grid.
//!
//! Gaussian increments come from ChaCha20 keyed by a 64-bit seed, with a
//! separate ChaCha stream per sub-path. A path is the vector of grid
//! vertices `X_0, X_dt, …, X_{n·dt}`; nothing between vertices is modelled.

use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure_positive, Error, Result};
use crate::math::{round, sqrt};

/// Identifier of the increment generator. Bumped whenever the mapping from
/// `(seed, stream)` to positions changes.
pub const GENERATOR_ID: &str = "chacha20-stream/standard-normal-ziggurat/v1";

/// Largest supported step count. Keeps `n_steps + 1` points addressable
/// with room for index arithmetic on pairs.
pub const MAX_STEPS: u64 = 1 << 32;

/// A discretized planar Brownian trajectory.
///
/// Coordinates are stored as two separate vectors because every hot loop in
/// the crate walks them in lockstep.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPath {
    dt: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    seed: u64,
    origin_start: bool,
}

impl PlanarPath {
    /// Builds a path from explicit vertices. Intended for test harnesses and
    /// degenerate configurations; simulated paths come from
    /// [`generate_path`].
    pub fn from_positions(dt: f64, positions: &[[f64; 2]]) -> Result<Self> {
        ensure_positive("dt", dt)?;
        if positions.is_empty() {
            return Err(Error::InvalidParameter {
                name: "positions",
                reason: "a path needs at least one vertex".into(),
            });
        }
        let xs: Vec<f64> = positions.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = positions.iter().map(|p| p[1]).collect();
        let origin_start = xs[0] == 0.0 && ys[0] == 0.0;
        Ok(Self {
            dt,
            xs,
            ys,
            seed: 0,
            origin_start,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn n_points(&self) -> usize {
        self.xs.len()
    }

    /// Total time covered, `n_steps · dt`.
    pub fn horizon(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn origin_start(&self) -> bool {
        self.origin_start
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn point(&self, index: usize) -> [f64; 2] {
        [self.xs[index], self.ys[index]]
    }

    pub fn positions(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.xs.iter().zip(&self.ys).map(|(&x, &y)| [x, y])
    }

    /// The whole path as an interval.
    pub fn full(&self) -> Interval {
        Interval {
            lo: 0,
            hi: self.n_steps(),
        }
    }

    /// Grid index of time `t`, rejecting times that are off the grid or past
    /// the horizon.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::OutOfHorizon {
                what: "time",
                value: t,
                horizon: self.horizon(),
            });
        }
        let k = round(t / self.dt);
        if (k * self.dt - t).abs() > 1e-9 * self.dt.max(t) {
            return Err(Error::NotGridAligned { time: t, dt: self.dt });
        }
        let k = k as usize;
        if k > self.n_steps() {
            return Err(Error::OutOfHorizon {
                what: "time",
                value: t,
                horizon: self.horizon(),
            });
        }
        Ok(k)
    }

    /// Vertices of `interval` as a new path, without translation. This is
    /// the time shift `X ∘ θ_s`; since every estimator only sees position
    /// differences, translating would only add rounding noise.
    pub fn shifted(&self, interval: Interval) -> Result<Self> {
        interval.check(self)?;
        Ok(Self {
            dt: self.dt,
            xs: self.xs[interval.lo..=interval.hi].to_vec(),
            ys: self.ys[interval.lo..=interval.hi].to_vec(),
            seed: self.seed,
            origin_start: self.xs[interval.lo] == 0.0 && self.ys[interval.lo] == 0.0,
        })
    }
}

/// A grid-aligned time interval `[lo·dt, hi·dt]` of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::BadInterval {
                lo,
                hi,
                n_points: 0,
            });
        }
        Ok(Self { lo, hi })
    }

    /// Interval between two grid-aligned times of `path`.
    pub fn from_times(path: &PlanarPath, start: f64, end: f64) -> Result<Self> {
        let lo = path.index_of(start)?;
        let hi = path.index_of(end)?;
        Self::new(lo, hi)
    }

    pub fn len_steps(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Length in time units.
    pub fn duration(&self, dt: f64) -> f64 {
        self.len_steps() as f64 * dt
    }

    pub(crate) fn check(&self, path: &PlanarPath) -> Result<()> {
        if self.lo > self.hi || self.hi > path.n_steps() {
            return Err(Error::BadInterval {
                lo: self.lo,
                hi: self.hi,
                n_points: path.n_points(),
            });
        }
        Ok(())
    }

    /// Interiors are disjoint when the intervals meet in at most one point.
    pub fn interiors_disjoint(&self, other: &Interval) -> bool {
        self.hi <= other.lo || other.hi <= self.lo || self.is_degenerate() || other.is_degenerate()
    }
}

fn checked_len(n_steps: u64) -> Result<usize> {
    if n_steps >= MAX_STEPS {
        return Err(Error::StepOverflow { n_steps });
    }
    usize::try_from(n_steps)
        .ok()
        .and_then(|n| n.checked_add(1))
        .ok_or(Error::StepOverflow { n_steps })
}

/// The generator for sub-stream `stream` of `seed`: the ChaCha20 key is
/// expanded from `seed`, the 64-bit ChaCha stream id is `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn walk(seed: u64, stream: u64, dt: f64, n_steps: u64) -> Result<PlanarPath> {
    ensure_positive("dt", dt)?;
    let len = checked_len(n_steps)?;
    let sigma = sqrt(dt);
    let mut rng = stream_rng(seed, stream);
    let mut xs = Vec::with_capacity(len);
    let mut ys = Vec::with_capacity(len);
    let (mut x, mut y) = (0.0f64, 0.0f64);
    xs.push(x);
    ys.push(y);
    for _ in 1..len {
        let dx: f64 = StandardNormal.sample(&mut rng);
        let dy: f64 = StandardNormal.sample(&mut rng);
        x += sigma * dx;
        y += sigma * dy;
        xs.push(x);
        ys.push(y);
    }
    Ok(PlanarPath {
        dt,
        xs,
        ys,
        seed,
        origin_start: true,
    })
}

/// A planar Brownian path started at the origin, drawn from stream 0 of
/// `seed`.
pub fn generate_path(seed: u64, dt: f64, n_steps: u64) -> Result<PlanarPath> {
    walk(seed, 0, dt, n_steps)
}

/// Two independent paths from streams 0 and 1 of `seed`.
pub fn independent_pair(
    seed: u64,
    dt: f64,
    n_steps_x: u64,
    n_steps_y: u64,
) -> Result<(PlanarPath, PlanarPath)> {
    Ok((walk(seed, 0, dt, n_steps_x)?, walk(seed, 1, dt, n_steps_y)?))
}

/// Brownian rescaling: time stretched by `c`, space by `√c`.
pub fn rescale(path: &PlanarPath, c: f64) -> Result<PlanarPath> {
    ensure_positive("c", c)?;
    if c == 1.0 {
        return Ok(path.clone());
    }
    let s = sqrt(c);
    Ok(PlanarPath {
        dt: path.dt * c,
        xs: path.xs.iter().map(|x| x * s).collect(),
        ys: path.ys.iter().map(|y| y * s).collect(),
        seed: path.seed,
        origin_start: path.origin_start,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `index` in a batch keyed by `base`. Each replica can be
/// regenerated in isolation from `(base, index)`.
pub fn replica_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}
