//! Scalar abstraction shared by the exact and floating backends.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Ordered field used for lengths, points and suspension data.
///
/// `f32`/`f64` compare with a relative tolerance, `BigRational` compares exactly.
pub trait Scalar:
    Clone + Debug + Display + FromStr + PartialOrd + Signed + Send + Sync + 'static
{
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;
    fn from_int(v: i64) -> Self;
    fn as_f64(&self) -> f64;

    /// Absolute tolerance for values of magnitude `scale`.
    fn tolerance(scale: &Self) -> Self;

    fn approx_eq(&self, other: &Self, scale: &Self) -> bool {
        let diff = self.clone() - other.clone();
        diff.abs() <= Self::tolerance(scale)
    }

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn tolerance(scale: &Self) -> Self {
        64.0 * f64::EPSILON * scale.abs().max(1.0)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r) as f32
    }
    fn from_int(v: i64) -> Self {
        v as f32
    }
    fn as_f64(&self) -> f64 {
        *self as f64
    }
    fn tolerance(scale: &Self) -> Self {
        64.0 * f32::EPSILON * scale.abs().max(1.0)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn tolerance(_scale: &Self) -> Self {
        BigRational::zero()
    }
}

/// Nearest-ish f64 for an arbitrary rational, robust to huge numerators/denominators.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    // bring the quotient into [2^52, 2^54) before dividing
    let k = 53 - shift;
    let q = if k >= 0 {
        (n << (k as usize)) / d
    } else {
        n / (d << ((-k) as usize))
    };
    q.to_f64().unwrap_or(0.0) * 2f64.powi(-(k as i32))
}

pub fn bigint_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(if v.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Natural logarithm of a positive integer of any size.
pub fn ln_bigint(x: &BigInt) -> f64 {
    let shift = x.bits().saturating_sub(60);
    let top = (x >> shift as usize).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact rational for a finite f64.
pub fn f64_to_rational(v: f64) -> Option<BigRational> {
    BigRational::from_f64(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip_through_f64() {
        let r = BigRational::new(BigInt::from(7), BigInt::from(3));
        assert!((rational_to_f64(&r) - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigInt::from(3) << 2000usize;
        let r = BigRational::new(big.clone() + 1, big);
        assert!((rational_to_f64(&r) - 1.0).abs() < 1e-15);
        let tiny = BigRational::new(BigInt::from(1), BigInt::from(1) << 1100usize);
        assert_eq!(rational_to_f64(&tiny), 0.0);
    }

    #[test]
    fn log_of_huge_integer() {
        let x = BigInt::from(5) << 3000usize;
        assert!((ln_bigint(&x) - (5f64.ln() + 3000.0 * 2f64.ln())).abs() < 1e-9);
        assert!((ln_bigint(&BigInt::from(7)) - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn exact_tolerance_is_zero() {
        let a = <BigRational as Scalar>::from_int(5);
        let b = BigRational::new(BigInt::from(10), BigInt::from(2));
        assert!(a.approx_eq(&b, &a));
        assert!(!(a.clone() + BigRational::new(1.into(), 1000.into())).approx_eq(&b, &a));
    }
}
