//! Real scalar abstraction.
//!
//! All numerical routines are written against [`Real`], which is implemented
//! for `f32` and `f64`. Complex entries are `num_complex::Complex<T>`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type usable as the real part of dictionary entries.
pub trait Real: RealField + Copy + Default + ToPrimitive + Serialize + DeserializeOwned + 'static {
    /// Tolerance used when validating unit-norm columns of constructed dictionaries.
    fn unit_tol() -> Self;

    /// Tolerance used when validating columns of dictionaries read from text.
    fn load_tol() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        nalgebra::convert(n as f64)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn unit_tol() -> Self {
        1e-5
    }
    fn load_tol() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn unit_tol() -> Self {
        1e-10
    }
    fn load_tol() -> Self {
        1e-8
    }
}

/// `r * e^{i theta}`.
#[inline]
pub fn polar<T: Real>(r: T, theta: T) -> Complex<T> {
    Complex::new(r * theta.cos(), r * theta.sin())
}

#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}
