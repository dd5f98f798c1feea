// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Real scalars that additionally support nalgebra's dense decompositions.
pub trait LinalgReal: Real + nalgebra::RealField {}

impl LinalgReal for f32 {}
impl LinalgReal for f64 {}

pub type C<T> = Complex<T>;

/// `e^{iθ}`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> C<T> {
    let (s, c) = Float::sin_cos(theta);
    Complex::new(c, s)
}
