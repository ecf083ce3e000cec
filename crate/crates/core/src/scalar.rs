//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the numerical core is written against.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded)
    /// in the supported scalar types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `2π`
    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// Reduces `x` to the fundamental domain `[0, 1)` of the circle.
    #[inline]
    fn wrap_unit(x: Self) -> Self {
        let r = x - x.floor();
        // `x - floor(x)` can round up to exactly 1 for tiny negative x
        if r >= Self::one() {
            Self::zero()
        } else {
            r
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
