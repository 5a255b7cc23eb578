//! Bessel functions at argument 2 and the integer cross products built from them.
//!
//! `J_n(2)` and `Y_n(2)` come from their power series with a rigorous bound on
//! truncation and rounding. `Υ(n, m) = π[J_n(2) Y_m(2) - J_m(2) Y_n(2)]` is an
//! integer for all `n, m`; it is computed exactly by the three-term recurrence
//! `Υ(n+1, m) = n Υ(n, m) - Υ(n-1, m)` and the analytic form is only used as a
//! cross-check.
//!
//! At `x = 2` every power `(x/2)^k` equals one and `ln(x/2)` vanishes, so
//!
//! ```text
//! J_n = Σ_k (-1)^k / (k! (n+k)!)
//! π Y_n = 2γ J_n - Σ_{k<n} (n-k-1)!/k! - Σ_k (-1)^k (H_k + H_{k+n}) / (k! (n+k)!)
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bounded::{BoundedReal, SeriesSum, Summation};
use crate::error::{check_tol, NumericError, Result};
use crate::scalar::{inv_factorial, pow10_neg, tolerance_from_f64, Scalar};

/// π to 36 significant digits.
pub const PI_DIGITS: &str = "3.14159265358979323846264338327950288";

/// Euler–Mascheroni constant to 36 significant digits (OEIS A001620).
pub const EULER_GAMMA_DIGITS: &str = "0.577215664901532860606512090082402431";

/// Both literals are truncated after the 35th decimal.
const LITERAL_DECIMALS: u32 = 35;

const MAX_TERMS: u32 = 100_000;

fn literal_constant<S: Scalar>(digits: &str) -> BoundedReal<S> {
    let (v, conv) = S::from_decimal(digits);
    // pow10_neg rounds in floating types; doubling keeps the bound above 1e-35.
    let trunc = pow10_neg::<S>(LITERAL_DECIMALS) * S::from_int(2);
    BoundedReal::new(v, conv + trunc)
}

pub fn pi_const<S: Scalar>() -> BoundedReal<S> {
    literal_constant(PI_DIGITS)
}

pub fn euler_gamma<S: Scalar>() -> BoundedReal<S> {
    literal_constant(EULER_GAMMA_DIGITS)
}

/// Evaluates `compute` with shrinking internal truncation tolerances until
/// the certified error fits `tol`.
pub(crate) fn refine<S, F>(tol: f64, mut compute: F) -> Result<BoundedReal<S>>
where
    S: Scalar,
    F: FnMut(S) -> BoundedReal<S>,
{
    check_tol(tol)?;
    let target = tolerance_from_f64::<S>(tol);
    let mut inner = target.clone() / S::from_int(8);
    let mut best = f64::INFINITY;
    for _ in 0..6 {
        let r = compute(inner.clone());
        if r.err <= target && target > S::zero() {
            return Ok(r);
        }
        best = best.min(r.err.to_f64_lossy());
        inner = inner / S::from_int(1000);
    }
    Err(NumericError::ToleranceUnattainable { requested: tol, achievable: best })
}

/// Partial sum of the `J_n(2)` series, stopped at the first term not
/// exceeding `trunc_tol`; that term bounds the remainder.
pub(crate) fn j_series<S: Scalar>(n: u32, trunc_tol: &S, mode: Summation) -> BoundedReal<S> {
    let u = S::unit_roundoff();
    let (mut term, _) = inv_factorial::<S>(n);
    let mut sum = SeriesSum::new(mode);
    let mut k: u32 = 0;
    loop {
        // |term| carries relative rounding error at most (n + 2k + 1) u
        let rel = u.clone() * S::from_int(i64::from(n + 2 * k + 2));
        let term_err = term.abs() * rel.clone() + S::underflow_unit() * S::from_int(i64::from(n + 2 * k + 2));
        if term.abs() + term_err.clone() <= *trunc_tol || k >= MAX_TERMS {
            // terms decrease in magnitude from here on, so the alternating
            // remainder is bounded by the first omitted term
            return sum.finish(term.abs() + term_err);
        }
        let signed = if k % 2 == 0 { term.clone() } else { -term.clone() };
        sum.push(signed, term_err);
        k += 1;
        term = term / S::from_int(i64::from(k) * i64::from(n + k));
    }
}

/// `J_n(2)` with `|value - J_n(2)| <= err <= tol`.
pub fn bessel_j<S: Scalar>(n: u32, tol: f64) -> Result<BoundedReal<S>> {
    bessel_j_with(n, tol, Summation::default())
}

pub fn bessel_j_with<S: Scalar>(n: u32, tol: f64, mode: Summation) -> Result<BoundedReal<S>> {
    refine(tol, |inner: S| j_series(n, &inner, mode))
}

/// `Σ_{k<n} (n-k-1)!/k!`, the finite part of the `Y_n` series.
fn y_finite_part<S: Scalar>(n: u32) -> BoundedReal<S> {
    let mut sum = SeriesSum::new(Summation::Compensated);
    if n == 0 {
        return sum.finish(S::zero());
    }
    let u = S::unit_roundoff();
    let mut d = S::one();
    for j in 2..n {
        d = d * S::from_int(i64::from(j));
    }
    for k in 0..n {
        let rel = u.clone() * S::from_int(i64::from(n + 2 * k + 2));
        sum.push(d.clone(), d.abs() * rel);
        if k + 1 < n {
            d = d / S::from_int(i64::from(k + 1) * i64::from(n - k - 1));
        }
    }
    sum.finish(S::zero())
}

/// `Σ_k (-1)^k (H_k + H_{k+n}) / (k! (n+k)!)`, truncated at `trunc_tol`.
fn y_harmonic_part<S: Scalar>(n: u32, trunc_tol: &S, mode: Summation) -> BoundedReal<S> {
    let u = S::unit_roundoff();
    let (mut c, _) = inv_factorial::<S>(n);
    let mut h_k = S::zero();
    let mut h_kn = S::zero();
    for j in 1..=n {
        h_kn = h_kn + S::one() / S::from_int(i64::from(j));
    }
    let mut sum = SeriesSum::new(mode);
    let mut k: u32 = 0;
    loop {
        let term = (h_k.clone() + h_kn.clone()) * c.clone();
        let rel = u.clone() * S::from_int(i64::from(6 * k + 4 * n + 8));
        let term_err = term.abs() * rel + S::underflow_unit() * S::from_int(i64::from(3 * k + n + 4));
        // terms are monotone in magnitude from k = 1 on
        if (k >= 1 && term.abs() + term_err.clone() <= *trunc_tol) || k >= MAX_TERMS {
            return sum.finish(term.abs() + term_err);
        }
        let signed = if k % 2 == 0 { term } else { -term };
        sum.push(signed, term_err);
        k += 1;
        h_k = h_k + S::one() / S::from_int(i64::from(k));
        h_kn = h_kn + S::one() / S::from_int(i64::from(k + n));
        c = c / S::from_int(i64::from(k) * i64::from(n + k));
    }
}

pub(crate) fn y_series<S: Scalar>(n: u32, trunc_tol: &S, mode: Summation) -> BoundedReal<S> {
    let j = j_series::<S>(n, trunc_tol, mode);
    let two_gamma_j = euler_gamma::<S>().scale(2) * j;
    let bracket = two_gamma_j - y_finite_part::<S>(n) - y_harmonic_part::<S>(n, trunc_tol, mode);
    bracket
        .checked_div(&pi_const::<S>())
        .expect("π enclosure excludes zero")
}

/// `Y_n(2)` with `|value - Y_n(2)| <= err <= tol`.
pub fn bessel_y<S: Scalar>(n: u32, tol: f64) -> Result<BoundedReal<S>> {
    bessel_y_with(n, tol, Summation::default())
}

pub fn bessel_y_with<S: Scalar>(n: u32, tol: f64, mode: Summation) -> Result<BoundedReal<S>> {
    refine(tol, |inner: S| y_series(n, &inner, mode))
}

/// `π[J_n(2) Y_m(2) - J_m(2) Y_n(2)]` from the series, with propagated error
/// at most `tol`.
pub fn upsilon_analytic<S: Scalar>(n: u32, m: u32, tol: f64) -> Result<BoundedReal<S>> {
    let mode = Summation::default();
    refine(tol, |inner: S| {
        let jn = j_series::<S>(n, &inner, mode);
        let jm = j_series::<S>(m, &inner, mode);
        let yn = y_series::<S>(n, &inner, mode);
        let ym = y_series::<S>(m, &inner, mode);
        pi_const::<S>() * (jn * ym - jm * yn)
    })
}

/// An exact value of `Υ(n, m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpsilonValue {
    pub n: i64,
    pub m: u32,
    pub value: BigInt,
}

/// `Υ(n, m)` by exact integer recurrence from `Υ(m, m) = 0`, `Υ(m+1, m) = 1`.
///
/// Runs upward for `n > m` and downward via `Υ(k-1, m) = k Υ(k, m) - Υ(k+1, m)`
/// for `n < m`; negative `n` is allowed.
pub fn upsilon(n: i64, m: u32) -> BigInt {
    let m = i64::from(m);
    if n == m {
        return BigInt::zero();
    }
    if n > m {
        let (mut prev, mut cur) = (BigInt::zero(), BigInt::one());
        for k in (m + 1)..n {
            let next = &cur * BigInt::from(k) - &prev;
            prev = std::mem::replace(&mut cur, next);
        }
        cur
    } else {
        // walking down: cur = Υ(k, m), above = Υ(k+1, m), starting at k = m
        let (mut above, mut cur) = (BigInt::one(), BigInt::zero());
        let mut k = m;
        while k > n {
            let below = &cur * BigInt::from(k) - &above;
            above = std::mem::replace(&mut cur, below);
            k -= 1;
        }
        cur
    }
}

pub fn upsilon_value(n: i64, m: u32) -> UpsilonValue {
    UpsilonValue { n, m, value: upsilon(n, m) }
}

/// Yields `Υ(n, m)` for `n = m, m+1, m+2, ...` in constant work per step.
#[derive(Clone, Debug)]
pub struct UpsilonIter {
    n: i64,
    cur: BigInt,
    next: BigInt,
    m: u32,
}

impl UpsilonIter {
    pub fn new(m: u32) -> Self {
        Self { n: i64::from(m), cur: BigInt::zero(), next: BigInt::one(), m }
    }
}

impl Iterator for UpsilonIter {
    type Item = UpsilonValue;

    fn next(&mut self) -> Option<UpsilonValue> {
        let out = UpsilonValue { n: self.n, m: self.m, value: self.cur.clone() };
        let after = &self.next * BigInt::from(self.n + 1) - &self.cur;
        self.cur = std::mem::replace(&mut self.next, after);
        self.n += 1;
        Some(out)
    }
}

/// Harmonic number `H_m = Σ_{j=1}^m 1/j`, exactly.
pub fn harmonic(m: u32) -> BigRational {
    (1..=m).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::one(), BigInt::from(j))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn j0_matches_reference() {
        let j = bessel_j::<f64>(0, 1e-14).unwrap();
        assert!(j.err <= 1e-14);
        assert!((j.value - 0.223_890_779_141_235_67).abs() <= 1e-14);
    }

    #[test]
    fn y0_matches_reference() {
        let y = bessel_y::<f64>(0, 1e-12).unwrap();
        assert!(y.err <= 1e-12);
        assert!((y.value - 0.510_375_672_649_745_1).abs() <= 1e-12);
    }

    #[test]
    fn high_order_j_is_tiny() {
        let j = bessel_j::<f64>(50, 1e-70).unwrap();
        assert!(j.value.abs() < 1e-60);
        assert!(j.err <= 1e-70);
    }

    #[test]
    fn y_grows_and_is_negative() {
        let y4 = bessel_y::<f64>(4, 1e-10).unwrap();
        let y5 = bessel_y::<f64>(5, 1e-10).unwrap();
        assert!(y5.value < 0.0);
        assert!(y5.value.abs() > y4.value.abs());
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert_eq!(bessel_j::<f64>(0, 0.0), Err(NumericError::InvalidTolerance(0.0)));
        assert!(matches!(bessel_y::<f64>(0, -1.0), Err(NumericError::InvalidTolerance(_))));
        assert!(matches!(bessel_j::<f64>(0, f64::NAN), Err(NumericError::InvalidTolerance(_))));
    }

    #[test]
    fn single_precision_reports_unattainable_tolerance() {
        assert!(matches!(
            bessel_j::<f32>(0, 1e-12),
            Err(NumericError::ToleranceUnattainable { .. })
        ));
        let j = bessel_j::<f32>(0, 1e-5).unwrap();
        assert!((f64::from(j.value) - 0.223_890_779_141_235_67).abs() <= 1e-5);
    }

    #[test]
    fn naive_and_compensated_agree() {
        for n in 0..10 {
            let a = bessel_j_with::<f64>(n, 1e-13, Summation::Naive).unwrap();
            let b = bessel_j_with::<f64>(n, 1e-13, Summation::Compensated).unwrap();
            assert!(a.consistent_with(&b));
            let a = bessel_y_with::<f64>(n, 1e-9, Summation::Naive).unwrap();
            let b = bessel_y_with::<f64>(n, 1e-9, Summation::Compensated).unwrap();
            assert!(a.consistent_with(&b));
        }
    }

    #[test]
    fn upsilon_small_table() {
        assert_eq!(upsilon(3, 3), BigInt::zero());
        assert_eq!(upsilon(5, 0), BigInt::from(7));
        assert_eq!(upsilon(7, 3) * 2 + upsilon(7, 0), BigInt::from(411));
        // downward branch: 2Υ(1,3) + Υ(1,0) = -3
        assert_eq!(upsilon(1, 3) * 2 + upsilon(1, 0), BigInt::from(-3));
        assert_eq!(upsilon(2, 3), BigInt::from(-1));
    }

    #[test]
    fn upsilon_iter_matches_direct() {
        for (v, n) in UpsilonIter::new(3).take(30).zip(3..) {
            assert_eq!(v.n, n);
            assert_eq!(v.value, upsilon(n, 3));
        }
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(0), rat(0, 1));
        assert_eq!(harmonic(1), rat(1, 1));
        assert_eq!(harmonic(4), rat(25, 12));
    }

    #[test]
    fn wronskian_gives_one() {
        for n in 0..=10u32 {
            let u = upsilon_analytic::<f64>(n + 1, n, 1e-9).unwrap();
            assert!(u.contains(&1.0), "n={n}: {u:?}");
        }
    }

    #[test]
    fn analytic_definition_matches_recurrence() {
        for m in 0..=5u32 {
            for n in m..=12u32 {
                let exact = upsilon(i64::from(n), m);
                let approx = upsilon_analytic::<f64>(n, m, 1e-6).unwrap();
                let target = f64::from_bigint(&exact);
                assert!(approx.contains(&target), "Υ({n},{m}) = {exact}, series {approx:?}");
            }
        }
    }

    #[test]
    fn rational_j_brackets_between_partial_sums() {
        let tight = bessel_j::<BigRational>(2, 1e-40).unwrap();
        // consecutive partial sums of the alternating series bracket the limit
        let mut partial = BigRational::zero();
        let mut prev = partial.clone();
        let mut term = rat(1, 2);
        for k in 0..12i64 {
            prev = partial.clone();
            partial += if k % 2 == 0 { term.clone() } else { -term.clone() };
            term = term / BigRational::from_integer(BigInt::from((k + 1) * (k + 3)));
        }
        let (lo, hi) = if prev < partial { (prev, partial) } else { (partial, prev) };
        assert!(lo <= tight.lower() && tight.upper() <= hi);
    }

    proptest! {
        #[test]
        fn upsilon_three_term_recurrence(n in -20i64..60, m in 0u32..12) {
            let lhs = upsilon(n + 1, m) + upsilon(n - 1, m);
            prop_assert_eq!(lhs, upsilon(n, m) * BigInt::from(n));
        }

        #[test]
        fn upsilon_unit_step(m in 0u32..200) {
            prop_assert_eq!(upsilon(i64::from(m) + 1, m), BigInt::one());
        }

        #[test]
        fn j_tolerance_refinement_is_consistent(n in 0u32..=20, exp in 3i32..13) {
            let tol = 10f64.powi(-exp);
            let coarse = bessel_j::<f64>(n, tol).unwrap();
            let fine = bessel_j::<f64>(n, tol / 100.0).unwrap();
            prop_assert!(coarse.err <= tol);
            prop_assert!((coarse.value - fine.value).abs() <= tol);
        }
    }
}
