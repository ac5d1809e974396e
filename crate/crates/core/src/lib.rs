//! Numerical laboratory for the renormalized self-intersection local time of
//! planar Brownian motion.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computations:
//!
//! * [`path`]: seeded planar Brownian paths on a uniform grid, sub-stream
//!   derivation and Brownian rescaling.
//! * [`estimators`]: the heat-kernel mollifier, mutual intersection local time
//!   `α̂(s,t)`, cross terms `Â(I;J)` and the occupation-density route.
//! * [`silt`]: the renormalized self-intersection local time `β̂` with exact
//!   analytic centering, sub-path decomposition and closed-form expectations.
//! * [`gn`]: shooting solver for the radial ground state and the sharp
//!   Gagliardo–Nirenberg constants derived from it.
//! * [`asymptotics`]: Monte Carlo tail curves, LIL trajectory explorers and the
//!   dyadic occupation statistic.
//!
//! Parallel execution is never started here. Batch drivers accept a
//! [`asymptotics::ReplicaExecutor`] so the caller owns the worker pool.

#![no_std]

extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod gn;
pub mod math;
pub mod path;
pub mod quad;
pub mod silt;
pub mod stats;

mod ode;
mod pairwise;

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use estimators::MollifierScale;
pub use path::{Interval, PlanarPath};
