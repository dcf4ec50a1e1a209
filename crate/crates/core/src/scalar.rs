//! Real scalar abstraction shared by the matrix, schedule and noise code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use crate::dd::DoubleDouble;

/// A real floating-point field the numerical core can run over.
///
/// `num_traits::Float::epsilon` is not usable as a convergence scale for every
/// implementor (double-double reports the smallest positive normal there), so
/// the unit roundoff is carried separately.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Unit roundoff `u` of the arithmetic: relative spacing of representable
    /// numbers near one, halved.
    fn unit_roundoff() -> Self;

    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize is representable")
    }
}

impl Scalar for f32 {
    fn unit_roundoff() -> Self {
        f32::EPSILON / 2.0
    }
}

impl Scalar for f64 {
    fn unit_roundoff() -> Self {
        f64::EPSILON / 2.0
    }
}

impl Scalar for DoubleDouble {
    fn unit_roundoff() -> Self {
        // 2^-104: two 53-bit mantissas minus the sign overlap.
        DoubleDouble::new(2f64.powi(-104))
    }
}
