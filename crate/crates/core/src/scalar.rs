//! Real scalar abstraction shared by every numeric routine in the crate.
//!
//! All state vectors and operators are `Complex<T>` for some `T: Real`.
//! `f64` is the working precision; `f32` is supported with a looser default
//! tolerance.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Default numeric tolerance for norm, unitarity and support checks.
    const DEFAULT_TOL: f64;

    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn default_tol() -> Self {
        Self::lit(Self::DEFAULT_TOL)
    }

    fn to_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar converts to f64")
    }
}

impl Real for f32 {
    const DEFAULT_TOL: f64 = 1e-5;
}

impl Real for f64 {
    const DEFAULT_TOL: f64 = 1e-10;
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn im<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

/// `sin(x t) / x`, continued to `t` at `x = 0`.
#[inline]
pub fn sinc_t<T: Real>(x: T, t: T) -> T {
    if x == T::zero() {
        t
    } else {
        (x * t).sin() / x
    }
}
