//! Real numbers carried together with a rigorous absolute error bound.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{one_plus_roundoff, Scalar};

/// An approximation `value` of some real `x` with `|value - x| <= err`.
///
/// Arithmetic propagates the bound conservatively and, for floating scalars,
/// adds the rounding error of the operation itself.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedReal<S> {
    pub value: S,
    pub err: S,
}

impl<S: Scalar> BoundedReal<S> {
    pub fn new(value: S, err: S) -> Self {
        debug_assert!(err >= S::zero(), "negative error bound");
        Self { value, err }
    }

    pub fn exact(value: S) -> Self {
        Self { value, err: S::zero() }
    }

    pub fn from_int(v: i64) -> Self {
        Self::exact(S::from_int(v))
    }

    /// Wraps the result of one rounded operation: widens `err` by `u|value|`.
    fn rounded(value: S, propagated: S) -> Self {
        let err = (propagated + value.abs() * S::unit_roundoff() + S::underflow_unit())
            * one_plus_roundoff::<S>(2);
        Self { value, err }
    }

    pub fn lower(&self) -> S {
        self.value.clone() - self.err.clone()
    }

    pub fn upper(&self) -> S {
        self.value.clone() + self.err.clone()
    }

    /// Whether the exact real `x` can lie in the interval this value describes.
    pub fn contains(&self, x: &S) -> bool {
        (self.value.clone() - x.clone()).abs() <= self.err
    }

    /// Whether the two enclosures overlap, i.e. they may describe the same real.
    pub fn consistent_with(&self, other: &Self) -> bool {
        (self.value.clone() - other.value.clone()).abs() <= self.err.clone() + other.err.clone()
    }

    pub fn abs_upper(&self) -> S {
        self.value.abs() + self.err.clone()
    }

    /// `self / rhs`, or `None` when the enclosure of `rhs` contains zero.
    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        let denom_lower = rhs.value.abs() - rhs.err.clone();
        if denom_lower <= S::zero() {
            return None;
        }
        let q = self.value.clone() / rhs.value.clone();
        // |a/b - A/B| <= (err_a + |a/b| err_b) / (|b| - err_b)
        let prop = (self.err.clone() + q.abs() * rhs.err.clone()) / denom_lower;
        Some(Self::rounded(q, prop))
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = S::from_int(k);
        let v = self.value.clone() * k.clone();
        Self::rounded(v, self.err.clone() * k.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        Self::from_int(1).checked_div(self)
    }

    pub fn to_f64(&self) -> BoundedReal<f64> {
        let v = self.value.to_f64_lossy();
        let e = self.err.to_f64_lossy();
        // conversion error of the value, then round the bound upward
        let e = (e + v.abs() * f64::EPSILON) * (1.0 + f64::EPSILON) + f64::from_bits(1);
        BoundedReal { value: v, err: e }
    }
}

impl<S: Scalar> Add for BoundedReal<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let v = self.value + rhs.value;
        Self::rounded(v, self.err + rhs.err)
    }
}

impl<S: Scalar> Sub for BoundedReal<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let v = self.value - rhs.value;
        Self::rounded(v, self.err + rhs.err)
    }
}

impl<S: Scalar> Mul for BoundedReal<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let prop = self.value.abs() * rhs.err.clone()
            + rhs.value.abs() * self.err.clone()
            + self.err * rhs.err;
        Self::rounded(self.value * rhs.value, prop)
    }
}

impl<S: Scalar> Neg for BoundedReal<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, err: self.err }
    }
}

impl<'a, S: Scalar> Add<&'a BoundedReal<S>> for &'a BoundedReal<S> {
    type Output = BoundedReal<S>;
    fn add(self, rhs: Self) -> BoundedReal<S> {
        self.clone() + rhs.clone()
    }
}

impl<'a, S: Scalar> Sub<&'a BoundedReal<S>> for &'a BoundedReal<S> {
    type Output = BoundedReal<S>;
    fn sub(self, rhs: Self) -> BoundedReal<S> {
        self.clone() - rhs.clone()
    }
}

impl<'a, S: Scalar> Mul<&'a BoundedReal<S>> for &'a BoundedReal<S> {
    type Output = BoundedReal<S>;
    fn mul(self, rhs: Self) -> BoundedReal<S> {
        self.clone() * rhs.clone()
    }
}

impl<S: Scalar + fmt::Display> fmt::Display for BoundedReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.value, self.err)
    }
}

/// How a series is accumulated in floating point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Summation {
    /// Plain left-to-right accumulation.
    Naive,
    /// Neumaier's two-fold compensated summation.
    #[default]
    Compensated,
}

/// Running sum that tracks enough information to bound its own rounding error.
///
/// Each pushed term may carry its own error (from computing the term); those
/// bounds are added to the final result.
pub(crate) struct SeriesSum<S> {
    mode: Summation,
    sum: S,
    comp: S,
    abs_sum: S,
    term_err: S,
    count: i64,
}

impl<S: Scalar> SeriesSum<S> {
    pub fn new(mode: Summation) -> Self {
        Self {
            mode,
            sum: S::zero(),
            comp: S::zero(),
            abs_sum: S::zero(),
            term_err: S::zero(),
            count: 0,
        }
    }

    pub fn push(&mut self, term: S, term_err: S) {
        self.abs_sum = self.abs_sum.clone() + term.abs();
        self.term_err = self.term_err.clone() + term_err;
        self.count += 1;
        match self.mode {
            Summation::Naive => self.sum = self.sum.clone() + term,
            Summation::Compensated => {
                let t = self.sum.clone() + term.clone();
                if self.sum.abs() >= term.abs() {
                    self.comp = self.comp.clone() + ((self.sum.clone() - t.clone()) + term);
                } else {
                    self.comp = self.comp.clone() + ((term - t.clone()) + self.sum.clone());
                }
                self.sum = t;
            }
        }
    }

    /// The accumulated sum plus `extra` (a truncation bound) in the error.
    pub fn finish(self, extra: S) -> BoundedReal<S> {
        let u = S::unit_roundoff();
        let n = S::from_int(self.count.max(1));
        let (value, rounding) = match self.mode {
            Summation::Naive => {
                let v = self.sum;
                (v, n * u * self.abs_sum)
            }
            Summation::Compensated => {
                let v = self.sum + self.comp;
                // |err| <= 2u|s| + 4 n u^2 sum|x_i|
                let r = S::from_int(2) * u.clone() * v.abs()
                    + S::from_int(4) * n * u.clone() * u * self.abs_sum;
                (v, r)
            }
        };
        let err = (rounding + self.term_err + extra + S::underflow_unit() * S::from_int(self.count + 1))
            * one_plus_roundoff::<S>(4);
        BoundedReal { value, err }
    }
}
