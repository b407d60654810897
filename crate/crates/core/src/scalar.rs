//! Floating-point scalar abstraction shared by the numeric kernels.
//!
//! Kernels that do not depend on table data (summation, quadrature rules,
//! Bessel functions, bounded values) are written against [`Scalar`] so they
//! can be exercised in both `f32` and `f64`. Pipeline code that talks to the
//! count tables works in [`crate::Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot hold it,
    /// which never happens for the finite constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count fits in a float")
    }

    /// Unit roundoff (half the machine epsilon).
    #[inline]
    fn unit_roundoff() -> Self {
        Self::epsilon() / Self::lit(2.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn third<T: Scalar>() -> T {
        T::one() / T::lit(3.0)
    }

    #[test]
    fn literals_round_trip_in_both_widths() {
        assert_eq!(third::<f64>(), 1.0 / 3.0);
        assert_eq!(third::<f32>(), 1.0f32 / 3.0);
        assert_eq!(f64::from_count(1 << 40), (1u64 << 40) as f64);
        assert!(f32::unit_roundoff() > f64::unit_roundoff() as f32);
    }
}
