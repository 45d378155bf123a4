//! Scalar abstraction for the closed-form layers.
//!
//! Everything that is pure arithmetic (normal-model risks, thresholds,
//! distances between normal densities, bisection) is written against
//! [`Scalar`] so it runs in `f32` as well as `f64`. Quadrature, mixing-law
//! expectations and Monte Carlo stay in `f64`.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    /// Square of the euclidean norm.
    fn norm2(v: &[Self]) -> Self {
        v.iter().map(|&x| x * x).sum()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Standard `p`-variate normal density evaluated at a point with squared norm `norm2`.
#[inline]
pub fn std_normal_pdf<T: Scalar>(norm2: T, p: usize) -> T {
    let two_pi = T::two() * T::PI();
    two_pi.powf(-T::from_usize_lossy(p) * T::half()) * (-norm2 * T::half()).exp()
}
