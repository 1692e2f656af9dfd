use core::fmt;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the analytic layer is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances documented elsewhere in the
/// crate are stated for `f64`; the `f32` instantiation keeps the same
/// algorithms but accepts correspondingly coarser slack where noted.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Convert an `f64` constant. Exact for `f64`, rounded for `f32`.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant must convert to scalar")
    }

    /// Convert an index. Indices in this crate stay far below 2^24, so the
    /// conversion is exact even for `f32`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("index must convert to scalar")
    }

    /// Slack accepted when checking that probabilities sum to one.
    fn normalization_slack() -> Self;

    /// Default bound on the probability mass a truncated PMF may leave
    /// unrepresented.
    fn default_tail_tolerance() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn normalization_slack() -> f64 {
        1e-12
    }

    #[inline]
    fn default_tail_tolerance() -> f64 {
        1e-14
    }
}

impl Scalar for f32 {
    #[inline]
    fn normalization_slack() -> f32 {
        1e-4
    }

    #[inline]
    fn default_tail_tolerance() -> f32 {
        1e-6
    }
}
