//! Floating-point abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the geometry and the solver are written against: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("literal representable in scalar type")
}

/// Lossy conversion to `f64`, used for diagnostics and serialization.
#[inline]
pub fn to_f64<T: Scalar>(value: T) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Scalar>(angle: T) -> T {
    let two_pi = T::TAU();
    let mut a = angle % two_pi;
    if a <= -T::PI() {
        a = a + two_pi;
    } else if a > T::PI() {
        a = a - two_pi;
    }
    a
}

/// Distance between two headings on the circle, in `[0, pi]`.
pub fn angle_distance<T: Scalar>(a: T, b: T) -> T {
    wrap_angle(a - b).abs()
}
