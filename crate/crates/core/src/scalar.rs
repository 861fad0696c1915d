//! Scalar abstraction shared by every model in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real number type the geometry is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Tolerance used when validating rotations and other manifold invariants.
    ///
    /// `1e-9` for `f64`; looser for types with coarser precision.
    #[inline]
    fn manifold_tol() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(1e4))
    }

    /// Two pi.
    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut w = a - two_pi * ((a + T::PI()) / two_pi).floor();
    // floor maps the representable value -pi to -pi; push it to +pi.
    if w <= -T::PI() {
        w = w + two_pi;
    }
    if w > T::PI() {
        w = w - two_pi;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.0_f64), 0.0);
        assert!((wrap_angle(PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(-7.0 * PI) - PI).abs() < 1e-12);
        for k in -20..20 {
            let a = 0.3 + k as f64 * 2.0 * PI;
            assert!((wrap_angle(a) - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn manifold_tol_per_type() {
        assert_eq!(f64::manifold_tol(), 1e-9);
        assert!(f32::manifold_tol() > 1e-4);
    }
}
