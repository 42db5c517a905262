//! Scalar abstractions.
//!
//! Continuous computations (meshes, energies, solvers, barriers, the ODE oracle) are generic over
//! [`Real`], implemented for `f32` and `f64`. The crystalline set functionals of the rearrangement
//! lab are generic over [`ExactScalar`], which additionally covers arbitrary-precision rationals so
//! that their identities and inequalities can be checked without rounding.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Floating point scalar used by all continuous modules.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + AddAssign + SubAssign + MulAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Machine epsilon scaled tolerances are expressed through this.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for `T::lit(x)`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Ordered-field scalar for the crystalline functionals.
///
/// Face weights are always produced in `f64`; `from_weight` must convert them without loss for
/// exact implementations.
pub trait ExactScalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_weight(w: f64) -> Self;
    fn from_count(c: i64) -> Self;
    /// `num / den` for `den > 0`, exact for exact implementations.
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_value(&self) -> Self;
}

impl ExactScalar for f64 {
    fn from_weight(w: f64) -> Self {
        w
    }
    fn from_count(c: i64) -> Self {
        c as f64
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

impl ExactScalar for BigRational {
    fn from_weight(w: f64) -> Self {
        BigRational::from_float(w).expect("finite weight")
    }
    fn from_count(c: i64) -> Self {
        BigRational::from_integer(BigInt::from(c))
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

/// Kahan-free but order-fixed summation; callers rely on the iteration order being deterministic.
pub fn ordered_sum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    it.into_iter().fold(T::zero(), |a, b| a + b)
}
