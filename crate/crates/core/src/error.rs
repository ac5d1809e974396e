use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong in the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step count {n_steps} overflows index arithmetic")]
    StepOverflow { n_steps: u64 },

    #[error("paths use different time steps ({left} vs {right})")]
    MismatchedStep { left: f64, right: f64 },

    #[error("{what} {value} is outside the path horizon {horizon}")]
    OutOfHorizon {
        what: &'static str,
        value: f64,
        horizon: f64,
    },

    #[error("time {time} is not aligned to the grid step {dt}")]
    NotGridAligned { time: f64, dt: f64 },

    #[error("interval [{lo}, {hi}] is invalid for a path with {n_points} points")]
    BadInterval {
        lo: usize,
        hi: usize,
        n_points: usize,
    },

    #[error("intervals [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}] have overlapping interiors")]
    OverlappingIntervals {
        a_lo: usize,
        a_hi: usize,
        b_lo: usize,
        b_hi: usize,
    },

    #[error("partition is not contiguous: piece ends at {end} but next starts at {next_start}")]
    PartitionGap { end: usize, next_start: usize },

    #[error("partition is empty")]
    EmptyPartition,

    #[error(
        "grid does not cover the path: need x in [{need_x_min}, {need_x_max}], y in [{need_y_min}, {need_y_max}]"
    )]
    GridTooSmall {
        need_x_min: f64,
        need_x_max: f64,
        need_y_min: f64,
        need_y_max: f64,
    },

    #[error("path horizon {have} is shorter than the required {need}")]
    HorizonTooShort { need: f64, have: f64 },

    #[error("quadrature did not converge: achieved error estimate {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("shooting bracket not found in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("integrator step underflow at r = {r}")]
    StepUnderflow { r: f64 },

    #[error("profile is not square integrable on its grid")]
    NotSquareIntegrable,

    #[error("tail curve is degenerate: no exceedances at threshold {threshold}")]
    DegenerateTail { threshold: f64 },

    #[error("sample is empty")]
    EmptySample,
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::BracketNotFound { .. }
                | Error::StepUnderflow { .. }
                | Error::NotSquareIntegrable
                | Error::DegenerateTail { .. }
                | Error::EmptySample
        )
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}
