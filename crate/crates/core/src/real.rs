//! Scalar abstraction for the numeric stack.
//!
//! Image filtering runs in `f64`; network training runs in `f32` but the
//! gradient checks re-run every layer in `f64`, so all numeric code is generic
//! over [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar usable across the filter and network stack.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only for values outside the
    /// target type's range (never the case for the constants used here).
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    /// Converts a count to the scalar type; exact for counts below 2^24 in
    /// `f32` and 2^53 in `f64`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy narrowing to `f64` for logging and metrics.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
