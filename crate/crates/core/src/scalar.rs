//! Scalar abstraction shared by every probability and revenue computation.
//!
//! Distributions, revenue and learners are generic over [`Scalar`]. The exact
//! instantiation ([`BigRational`]) gives rational equality for oracle
//! cross-checks and lemma verification; `f64` is used where instance sizes make
//! big-integer arithmetic too slow (large-`n` closed forms, learning sweeps).

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Field-like numeric type used for masses, CDF values and revenues.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    /// Whether arithmetic is exact (no rounding).
    const EXACT: bool;
    /// Allowed deviation of a mass total from one at construction.
    const SUM_TOLERANCE: f64;

    fn from_ratio(num: u64, den: u64) -> Self;
    fn from_big_ratio(r: &BigRational) -> Self;
    /// Exact rational value of `self`; floats expand to their binary fraction.
    fn to_big_ratio(&self) -> BigRational;
    fn to_f64(&self) -> f64;
    /// Floats convert losslessly into rationals, so this never rounds for the
    /// exact type.
    fn from_f64(x: f64) -> Self;

    fn from_usize(k: usize) -> Self {
        Self::from_ratio(k as u64, 1)
    }

    fn abs_diff(&self, other: &Self) -> Self {
        if self >= other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const SUM_TOLERANCE: f64 = 0.0;

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_big_ratio(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_big_ratio(&self) -> BigRational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }

    fn abs_diff(&self, other: &Self) -> Self {
        (self - other).abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const SUM_TOLERANCE: f64 = 1e-9;

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_big_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }

    fn to_big_ratio(&self) -> BigRational {
        BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    const SUM_TOLERANCE: f64 = 1e-5;

    fn from_ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_big_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r) as f32
    }

    fn to_big_ratio(&self) -> BigRational {
        BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn from_f64(x: f64) -> Self {
        x as f32
    }
}

/// Converts a big rational to the nearest-ish `f64` without overflowing on
/// very large numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both sides down so they fit in a double.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0) as usize;
    let shift_d = (db - 60).max(0) as usize;
    let n = (r.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi(shift_n as i32 - shift_d as i32)
}

/// Exact rational from an integer pair.
pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::from_ratio(num, den)
}

/// `1 - x`.
pub fn complement<T: Scalar>(x: &T) -> T {
    T::one() - x.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trips_through_f64_exactly() {
        let x = 0.1f64;
        let r = <BigRational as Scalar>::from_f64(x);
        assert_eq!(Scalar::to_f64(&r), x);
        assert_eq!(<f64 as Scalar>::from_big_ratio(&r), x);
    }

    #[test]
    fn huge_ratio_converts() {
        let num = BigInt::from(3u32).pow(2000);
        let den = BigInt::from(3u32).pow(2000) * BigInt::from(4u32);
        let r = BigRational::new_raw(num, den);
        assert!((ratio_to_f64(&r) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn abs_diff_is_symmetric() {
        let a = ratio(1, 3);
        let b = ratio(1, 2);
        assert_eq!(a.abs_diff(&b), b.abs_diff(&a));
        assert_eq!(Scalar::abs_diff(&0.25f64, &0.5), 0.25);
    }
}
