//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All vectors and operators carry complex entries `Complex<T>` over a real
//! field `T`. The library is exercised with `f64`; `f32` builds as well, but
//! the default tolerances are tuned for double precision.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real field underlying the complex scalars.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Display + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal (tolerances, thresholds) into `Self`.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal representable in the scalar type")
    }

    /// Lossy conversion used for reporting and serialization.
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Largest finite value that still counts as a sane state norm.
    fn divergence_threshold() -> Self {
        let guard = 1e150_f64;
        let max = ToPrimitive::to_f64(&Self::max_value().unwrap_or_else(Self::one))
            .unwrap_or(f64::MAX);
        Self::lit(guard.min(max * 1e-4))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Builds a complex scalar from its real and imaginary parts.
#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Embeds a real scalar.
#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Modulus `|z|`.
#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub(crate) fn is_finite<T: Real>(z: &Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
