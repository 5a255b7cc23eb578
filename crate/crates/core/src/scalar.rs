//! Scalar types the numerical core is generic over.
//!
//! Everything that evaluates a series or solves a linear system is written
//! against [`Scalar`], so the same code runs in `f32`, `f64`, or exactly in
//! [`BigRational`]. Floating types report their unit roundoff so that error
//! bounds can include rounding; exact types report zero and their bounds
//! reduce to truncation remainders.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// A real number type usable by the series, linear algebra and constants code.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Relative rounding error of a single arithmetic operation (zero when exact).
    fn unit_roundoff() -> Self;

    /// Largest absolute error a single operation can introduce through
    /// underflow (zero when exact).
    fn underflow_unit() -> Self;

    /// Converts a decimal literal such as `"3.14159"`. Returns the value and a
    /// bound on the conversion error.
    fn from_decimal(literal: &str) -> (Self, Self);

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer is representable")
    }

    fn from_bigint(v: &BigInt) -> Self;

    /// Converts an exact rational, returning the value and a conversion error bound.
    fn from_rational(r: &BigRational) -> (Self, Self);

    fn is_exact() -> bool {
        Self::unit_roundoff().is_zero()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn unit_roundoff() -> Self {
                <$t>::EPSILON / 2.0
            }

            fn underflow_unit() -> Self {
                // smallest positive subnormal
                <$t>::from_bits(1)
            }

            fn from_decimal(literal: &str) -> (Self, Self) {
                let v: $t = literal.parse().expect("valid decimal literal");
                (v, v.abs() * Self::unit_roundoff())
            }

            fn from_bigint(v: &BigInt) -> Self {
                v.to_string().parse().unwrap_or(<$t>::NAN)
            }

            fn from_rational(r: &BigRational) -> (Self, Self) {
                let v = r.to_f64().map_or(<$t>::NAN, |x| x as $t);
                // f64 rounding, then possibly a second rounding to $t
                (v, v.abs() * <$t>::EPSILON * 2.0 + Self::underflow_unit())
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    fn unit_roundoff() -> Self {
        BigRational::zero()
    }

    fn underflow_unit() -> Self {
        BigRational::zero()
    }

    fn from_decimal(literal: &str) -> (Self, Self) {
        let (neg, digits) = match literal.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, literal),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        let mantissa: BigInt = format!("{int_part}{frac_part}")
            .parse()
            .expect("valid decimal literal");
        let scale = num_traits::pow(BigInt::from(10), frac_part.len());
        let mut v = BigRational::new(mantissa, scale);
        if neg {
            v = -v;
        }
        (v, BigRational::zero())
    }

    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }

    fn from_rational(r: &BigRational) -> (Self, Self) {
        (r.clone(), BigRational::zero())
    }
}

/// `1 / n!` in the scalar type, with the rounding error of computing it.
pub(crate) fn inv_factorial<S: Scalar>(n: u32) -> (S, S) {
    let mut v = S::one();
    for k in 2..=n {
        v = v / S::from_int(i64::from(k));
    }
    let err = v.abs() * S::unit_roundoff() * S::from_int(i64::from(n) + 1) + S::underflow_unit();
    (v, err)
}

/// `10^-k` as an exact or correctly rounded scalar.
pub fn pow10_neg<S: Scalar>(k: u32) -> S {
    let mut v = S::one();
    let ten = S::from_int(10);
    for _ in 0..k {
        v = v / ten.clone();
    }
    v
}

/// Converts a positive `f64` tolerance into the scalar type, rounding the
/// conversion so the result never exceeds the request.
pub fn tolerance_from_f64<S: Scalar>(tol: f64) -> S {
    let v = S::from_f64(tol).expect("finite tolerance");
    // f64 -> f32 may round up
    v.clone() - v.abs() * S::unit_roundoff() * S::from_int(2)
}

pub(crate) fn one_plus_roundoff<S: Scalar>(k: i64) -> S {
    S::one() + S::unit_roundoff() * S::from_int(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn rational_decimal_literal_is_exact() {
        let (v, err) = BigRational::from_decimal("-0.125");
        assert_eq!(v, BigRational::new(BigInt::from(-1), BigInt::from(8)));
        assert!(err.is_zero());
        let (v, _) = BigRational::from_decimal("42");
        assert_eq!(v, BigRational::from_integer(BigInt::from(42)));
    }

    #[test]
    fn float_literal_error_covers_rounding() {
        let (v, err) = f32::from_decimal("0.1");
        assert!((f64::from(v) - 0.1).abs() <= f64::from(err));
        assert!(f64::is_exact() == false && BigRational::is_exact());
    }

    #[test]
    fn inverse_factorial_matches_exact() {
        let (v, _) = inv_factorial::<BigRational>(6);
        assert_eq!(v, BigRational::new(BigInt::one(), BigInt::from(720)));
        let (f, err) = inv_factorial::<f64>(20);
        let exact = 1.0 / 2_432_902_008_176_640_000.0;
        assert!((f - exact).abs() <= err + exact * f64::EPSILON);
    }

    #[test]
    fn tolerance_conversion_never_rounds_up() {
        let t: f32 = tolerance_from_f64(1e-5);
        assert!(f64::from(t) <= 1e-5);
    }
}
