//! Double-double real built on [`twofloat::TwoFloat`].
//!
//! `TwoFloat` 0.8 divides by a double-double (and takes reciprocals) with a
//! residual computed in plain `f64`, so quotients are only accurate to about
//! `1e-16`. This wrapper forwards everything else and corrects the quotient
//! with one Newton step, restoring roughly 32 significant digits.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use twofloat::TwoFloat;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    pub fn new(x: f64) -> Self {
        Self(<TwoFloat as From<f64>>::from(x))
    }

    /// Leading and trailing `f64` components.
    pub fn parts(self) -> (f64, f64) {
        (self.0.hi(), self.0.lo())
    }

    fn accurate_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
        let bh = b.hi();
        if bh == 0.0 || !bh.is_finite() || !a.is_valid() {
            // IEEE semantics for the degenerate cases.
            return <TwoFloat as From<f64>>::from(a.hi() / bh);
        }
        // Division by an f64 is correctly implemented upstream.
        let q = a / bh;
        if !q.is_valid() {
            return a / b;
        }
        let r = a - q * b;
        q + r / bh
    }
}

/// Lexicographic on `(hi, lo)`; the upstream ordering misreports infinities.
impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (a, b) = (self.parts(), other.parts());
        match a.0.partial_cmp(&b.0)? {
            Ordering::Equal if a.0.is_finite() => a.1.partial_cmp(&b.1),
            ord => Some(ord),
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl From<TwoFloat> for DoubleDouble {
    fn from(x: TwoFloat) -> Self {
        Self(x)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr for DoubleDouble {
            type Output = Self;
            #[inline]
            fn $m(self, rhs: Self) -> Self {
                Self($tr::$m(self.0, rhs.0))
            }
        }
        impl $atr for DoubleDouble {
            #[inline]
            fn $am(&mut self, rhs: Self) {
                *self = $tr::$m(*self, rhs);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        Self(Self::accurate_div(self.0, rhs.0))
    }
}

impl DivAssign for DoubleDouble {
    #[inline]
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        self - (self / rhs).trunc() * rhs
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self(<TwoFloat as From<f64>>::from(0.0))
    }
    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self(<TwoFloat as From<f64>>::from(1.0))
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = <TwoFloat as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        TwoFloat::from_str_radix(s, radix).map(Self)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        self.0.to_f64()
    }
}

impl NumCast for DoubleDouble {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        <TwoFloat as NumCast>::from(n).map(Self)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        TwoFloat::from_i64(n).map(Self)
    }
    fn from_u64(n: u64) -> Option<Self> {
        TwoFloat::from_u64(n).map(Self)
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Self::new(n))
    }
}

macro_rules! forward_consts {
    ($($name:ident),*) => {
        impl FloatConst for DoubleDouble {
            $(fn $name() -> Self { Self(<TwoFloat as FloatConst>::$name()) })*
        }
    };
}

forward_consts!(
    E, FRAC_1_PI, FRAC_1_SQRT_2, FRAC_2_PI, FRAC_2_SQRT_PI, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4,
    FRAC_PI_6, FRAC_PI_8, LN_10, LN_2, LOG10_E, LOG2_E, PI, SQRT_2, TAU, LOG10_2, LOG2_10
);

macro_rules! forward_nullary {
    ($($name:ident),*) => { $(fn $name() -> Self { Self(<TwoFloat as Float>::$name()) })* };
}
macro_rules! forward_unary {
    ($($name:ident),*) => { $(fn $name(self) -> Self { Self(<TwoFloat as Float>::$name(self.0)) })* };
}
macro_rules! forward_pred {
    ($($name:ident),*) => { $(fn $name(self) -> bool { <TwoFloat as Float>::$name(self.0) })* };
}
macro_rules! forward_binary {
    ($($name:ident),*) => { $(fn $name(self, o: Self) -> Self { Self(<TwoFloat as Float>::$name(self.0, o.0)) })* };
}

impl Float for DoubleDouble {
    forward_nullary!(infinity, neg_infinity, nan, neg_zero, min_value, min_positive_value, epsilon, max_value);
    forward_unary!(
        to_degrees, to_radians, floor, ceil, round, trunc, fract, abs, signum, sqrt, exp, exp2, ln,
        log2, log10, cbrt, sin, cos, tan, asin, acos, atan, exp_m1, ln_1p, sinh, cosh, tanh, asinh,
        acosh, atanh
    );
    forward_pred!(is_nan, is_infinite, is_finite, is_normal, is_sign_positive, is_sign_negative);
    forward_binary!(powf, log, abs_sub, hypot, atan2);

    fn min(self, o: Self) -> Self {
        match self.partial_cmp(&o) {
            Some(Ordering::Greater) => o,
            Some(_) => self,
            None if self.is_nan() => o,
            None => self,
        }
    }

    fn max(self, o: Self) -> Self {
        match self.partial_cmp(&o) {
            Some(Ordering::Less) => o,
            Some(_) => self,
            None if self.is_nan() => o,
            None => self,
        }
    }

    fn classify(self) -> FpCategory {
        <TwoFloat as Float>::classify(self.0)
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        <TwoFloat as Float>::integer_decode(self.0)
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn powi(self, n: i32) -> Self {
        let p = Self(<TwoFloat as Float>::powi(self.0, n.unsigned_abs() as i32));
        if n < 0 {
            p.recip()
        } else {
            p
        }
    }

    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }

    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = <TwoFloat as Float>::sin_cos(self.0);
        (Self(s), Self(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(x: f64) -> DoubleDouble {
        DoubleDouble::new(x)
    }

    #[test]
    fn division_is_double_double_accurate() {
        let third = dd(1.0) / dd(3.0);
        assert!((third * dd(3.0) - dd(1.0)).abs() < dd(1e-31));
        let b = DoubleDouble(TwoFloat::new_add(0.7, 1e-18));
        let q = dd(2.0) / b;
        assert!((q * b - dd(2.0)).abs() < dd(1e-31));
        assert!((b.recip() * b - dd(1.0)).abs() < dd(1e-31));
        assert!((b.powi(-3) * b.powi(3) - dd(1.0)).abs() < dd(1e-30));
    }

    #[test]
    fn special_values_pass_through() {
        assert!((dd(1.0) / dd(0.0)).is_infinite());
        assert!((dd(0.0) / dd(0.0)).is_nan());
        assert_eq!(dd(3.0).max(dd(2.0)), dd(3.0));
        assert_eq!(dd(3.0).min(dd(2.0)), dd(2.0));
        assert_eq!((dd(7.0) % dd(3.0)), dd(1.0));
        let ninf = DoubleDouble::neg_infinity();
        assert_eq!(ninf.max(dd(1.0)), dd(1.0));
        assert!(ninf < dd(-1e300) && DoubleDouble::infinity() > dd(1e300));
        let tiny = DoubleDouble(TwoFloat::new_add(1.0, 1e-25));
        assert!(tiny > dd(1.0));
    }
}
