//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Floating point scalar usable by the grid, ODE, linear-algebra and
/// spectral code: `f32` or `f64`.
///
/// Tolerances inside the library are expressed through [`Real::epsilon`]
/// so the same code runs in single precision, but all published accuracy
/// targets assume `f64`.
pub trait Real:
    Float + FloatConst + FftNum + Default + Debug + Display + LowerExp + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal. Lossy for `f32`, exact for `f64`.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Complex scalar over a [`Real`].
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// Imaginary unit.
#[inline]
pub(crate) fn i_unit<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

/// Principal square root without the polar detour, so values next to the
/// negative real axis keep an accurate real part.
pub fn csqrt<T: Real>(z: Cx<T>) -> Cx<T> {
    if z.re == T::zero() && z.im == T::zero() {
        return z;
    }
    let t = ((z.norm() + z.re.abs()) / T::lit(2.0)).sqrt();
    if z.re >= T::zero() {
        Complex::new(t, z.im / (t + t))
    } else {
        Complex::new(z.im.abs() / (t + t), if z.im < T::zero() { -t } else { t })
    }
}
