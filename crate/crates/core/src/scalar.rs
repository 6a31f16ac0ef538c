use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance for comparisons that are exact in real arithmetic
    /// but go through rounded products (ratio thresholds, interval endpoints).
    fn rel_tol() -> Self {
        Self::of(1e-10).max(Self::epsilon() * Self::of(64.0))
    }

    /// Absolute tolerance for quantities that are sums of O(1) terms equal to one.
    fn unit_tol() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(16.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
