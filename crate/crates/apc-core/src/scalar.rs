//! Numeric backends for density/counting quantities.
//!
//! Every inequality the crate certifies is stated over a [`Scalar`]: `f64`
//! for the fast path and [`BigRational`] for the exact path (groups of order
//! ≤ 4096). Certified checks avoid k-th roots entirely — norms are compared
//! through their k-th powers — so the rational backend never needs to leave
//! the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact (no rounding anywhere).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_bigint_ratio(num: BigInt, den: BigInt) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    /// Nonnegative integer power by repeated squaring.
    fn powu(&self, k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    fn is_nonnegative(&self) -> bool {
        *self >= Self::zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_bigint_ratio(num: BigInt, den: BigInt) -> Self {
        let r = BigRational::new(num, den);
        ToPrimitive::to_f64(&r).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as num_traits::One>::one()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_bigint_ratio(num: BigInt, den: BigInt) -> Self {
        BigRational::new(num, den)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// Margin of `lhs ≤ rhs`: positive means the inequality holds with room.
pub fn le_margin<S: Scalar>(lhs: &S, rhs: &S) -> S {
    rhs.clone() - lhs.clone()
}

/// Inequality verdict under the crate's tolerance policy: exact in rational
/// mode, `margin ≥ −1e−9` in float mode.
pub fn margin_ok<S: Scalar>(margin: &S) -> bool {
    if S::EXACT {
        margin.is_nonnegative()
    } else {
        margin.to_f64() >= -crate::FLOAT_TOL
    }
}
