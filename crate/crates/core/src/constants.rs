//! Time constant, residual-time coefficients and the mean residual time.
//!
//! With `D = 2J_3 + J_0`:
//!
//! * `τ = 1 / (1 + π_0) = D / (2J_3 + 2J_0)`
//! * `γ_n = E[R | F = n]` with `γ_0 = 1/2` and
//!   `γ_n = (1 + 2γ_{n-1} + Σ_{j<=n-2} γ_j) / (n + 2)`, whose solution is
//!   `γ_n = Σ_{j=0}^{n+2} 1/j! - 2`
//! * `T = Σ π_n γ_n = (J_0/2 + 4J_3/3 + 2 Σ_{n>=1} J_{n+3}/(n+3)!) / D`

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bessel::{j_series, refine};
use crate::bounded::{BoundedReal, Summation};
use crate::error::{NumericError, Result};
use crate::front_chain::{normalizer, pi, pi0, tail_bound};
use crate::scalar::{inv_factorial, Scalar};

/// `γ_n`, the mean residual time given front state `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaCoeff {
    pub n: usize,
    pub value: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `γ_0..=γ_{n_max}` from the first-step recursion.
pub fn gamma_residuals(n_max: usize) -> Vec<GammaCoeff> {
    let mut values: Vec<BigRational> = Vec::with_capacity(n_max + 1);
    values.push(rat(1, 2));
    // Σ_{j<=n-2} γ_j
    let mut lagged_sum = BigRational::zero();
    for n in 1..=n_max {
        if n >= 2 {
            lagged_sum += &values[n - 2];
        }
        let numer = BigRational::one() + &values[n - 1] * BigInt::from(2) + &lagged_sum;
        values.push(numer / BigInt::from(n + 2));
    }
    values
        .into_iter()
        .enumerate()
        .map(|(n, value)| GammaCoeff { n, value })
        .collect()
}

/// `γ_n` from the recursion.
pub fn gamma_residual(n: usize) -> BigRational {
    gamma_residuals(n).pop().expect("at least γ_0").value
}

/// `Σ_{j=0}^{n+2} 1/j! - 2`.
pub fn gamma_closed_form(n: usize) -> BigRational {
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for j in 1..=(n + 2) {
        term /= BigInt::from(j);
        sum += &term;
    }
    sum - BigInt::from(2)
}

/// `τ = (2J_3 + J_0) / (2J_3 + 2J_0)`.
pub fn time_constant<S: Scalar>(tol: f64) -> Result<BoundedReal<S>> {
    refine(tol, |inner: S| {
        let (denom, j0) = normalizer::<S>(&inner);
        denom
            .checked_div(&(denom.clone() + j0))
            .expect("positive denominator")
    })
}

/// `T` by the rearranged Bessel series.
fn avg_residual_series<S: Scalar>(inner: &S) -> BoundedReal<S> {
    let mode = Summation::default();
    let (denom, j0) = normalizer::<S>(inner);
    let j3 = j_series::<S>(3, inner, mode);
    let head = j0
        .checked_div(&BoundedReal::from_int(2))
        .expect("nonzero")
        + j3.scale(4).checked_div(&BoundedReal::from_int(3)).expect("nonzero");
    let mut tail = BoundedReal::<S>::exact(S::zero());
    let mut m: u32 = 1;
    loop {
        // Σ_{n>=m} |J_{n+3}|/(n+3)! <= Σ_{n>=m} 1/((n+3)!)^2 <= 2/((m+3)!)^2
        let (inv, inv_err) = inv_factorial::<S>(m + 3);
        let inv_hi = inv.clone() + inv_err.clone();
        let rest = inv_hi.clone() * inv_hi * S::from_int(2);
        if rest <= *inner || m > 10_000 {
            tail = tail + BoundedReal::new(S::zero(), rest);
            break;
        }
        let jm = j_series::<S>(m + 3, inner, mode);
        tail = tail + jm * BoundedReal::new(inv, inv_err);
        m += 1;
    }
    (head + tail.scale(2))
        .checked_div(&denom)
        .expect("positive denominator")
}

/// `T` as `Σ_{n<=n_max} π_n γ_n` plus a bound on the omitted states.
///
/// The omitted mass is at most `tail_bound(n_max)` and every `γ_n < e - 2 < 1`.
pub fn avg_residual_time_direct<S: Scalar>(n_max: usize, tol: f64) -> Result<BoundedReal<S>> {
    let gammas = gamma_residuals(n_max);
    let mut total = BoundedReal::<S>::exact(S::zero());
    for g in &gammas {
        let p = pi::<S>(g.n, tol)?;
        let (gv, ge) = S::from_rational(&g.value);
        total = total + p * BoundedReal::new(gv, ge);
    }
    let omitted = tail_bound::<S>(n_max);
    Ok(total + BoundedReal::new(S::zero(), omitted))
}

/// Mean residual time `T`, with `|value - T| <= err <= tol`.
///
/// Evaluated by the rearranged series and cross-checked against the direct
/// sum `Σ π_n γ_n`; a disagreement is reported as [`NumericError::Inconsistent`].
pub fn avg_residual_time<S: Scalar>(tol: f64) -> Result<BoundedReal<S>> {
    let series = refine(tol, |inner: S| avg_residual_series::<S>(&inner))?;
    let mut n_max = 8;
    let tol_s = S::from_f64(tol).unwrap_or_else(S::zero);
    while tail_bound::<S>(n_max) > tol_s && n_max < 200 {
        n_max += 4;
    }
    let direct_tol = (tol / (n_max as f64 + 1.0)).max(f64::MIN_POSITIVE);
    let direct = match avg_residual_time_direct::<S>(n_max, direct_tol) {
        Ok(d) => d,
        // very small requests in floating types: compare at a looser level
        Err(NumericError::ToleranceUnattainable { .. }) => avg_residual_time_direct::<S>(n_max, 1e-12)?,
        Err(e) => return Err(e),
    };
    if !series.consistent_with(&direct) {
        return Err(NumericError::Inconsistent(format!(
            "mean residual time: series {:?} vs direct sum {:?}",
            series.to_f64(),
            direct.to_f64()
        )));
    }
    Ok(series)
}

/// The three headline quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadlineConstants<S> {
    pub pi0: BoundedReal<S>,
    pub tau: BoundedReal<S>,
    pub t_resid: BoundedReal<S>,
}

pub fn headline_constants<S: Scalar>(tol: f64) -> Result<HeadlineConstants<S>> {
    Ok(HeadlineConstants {
        pi0: pi0(tol)?,
        tau: time_constant(tol)?,
        t_resid: avg_residual_time(tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> BigInt {
        (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
    }

    #[test]
    fn gamma_boundary_values() {
        assert_eq!(gamma_residual(0), rat(1, 2));
        assert_eq!(gamma_residual(1), rat(2, 3));
    }

    #[test]
    fn gamma_recursion_matches_closed_form() {
        for g in gamma_residuals(100) {
            assert_eq!(g.value, gamma_closed_form(g.n), "n = {}", g.n);
        }
    }

    #[test]
    fn gamma_increments_are_inverse_factorials() {
        let g = gamma_residuals(100);
        for n in 1..=100 {
            let inc = &g[n].value - &g[n - 1].value;
            assert_eq!(inc, BigRational::new(BigInt::one(), factorial(n + 2)), "n = {n}");
        }
        for n in 3..=100 {
            let lhs = (&g[n].value - &g[n - 1].value) * BigInt::from(n + 2);
            assert_eq!(lhs, &g[n - 1].value - &g[n - 2].value);
        }
    }

    #[test]
    fn gamma_is_increasing_and_below_e_minus_two() {
        // e - 2 enclosed in [s, s + 2/43!] with s = Σ_{j<=42} 1/j! - 2
        let s = gamma_closed_form(40);
        let slack = BigRational::new(BigInt::from(2), factorial(43));
        let g = gamma_residuals(38);
        for w in g.windows(2) {
            assert!(w[1].value > w[0].value);
        }
        for c in &g {
            assert!(c.value < s);
            let gap_upper = &s - &c.value + &slack;
            assert!(gap_upper < BigRational::new(BigInt::from(2), factorial(c.n + 2)));
        }
    }

    #[test]
    fn time_constant_values() {
        let tau = time_constant::<f64>(1e-10).unwrap();
        assert!(tau.err <= 1e-10);
        assert!((tau.value - 0.682_725_075_9).abs() < 1e-9);
        assert!(tau.value > 0.5 && tau.value < 1.0);
        let p0 = pi0::<f64>(1e-10).unwrap();
        assert!((1.0 / (1.0 + p0.value) - tau.value).abs() <= 2e-10);
    }

    #[test]
    fn residual_time_values() {
        let t = avg_residual_time::<f64>(1e-10).unwrap();
        assert!((t.value - 0.595_344_466_5).abs() < 1e-9);
        let tau = time_constant::<f64>(1e-10).unwrap();
        assert!(t.value < tau.value);
        assert!(((tau.value - t.value) - 0.087_380_609_4).abs() <= 2e-10 + 1e-10);
        let direct = avg_residual_time_direct::<f64>(25, 1e-14).unwrap();
        assert!((direct.value - t.value).abs() <= 1e-10);
    }

    #[test]
    fn residual_time_in_exact_arithmetic() {
        let t = avg_residual_time::<BigRational>(1e-30).unwrap();
        let tf = t.to_f64();
        assert!((tf.value - 0.595_344_466_576_440_3).abs() < 1e-15);
    }

    #[test]
    fn headline_ordering() {
        let h = headline_constants::<f64>(1e-10).unwrap();
        assert!(h.t_resid.value < h.tau.value);
        let via_pi0 = (BoundedReal::from_int(1) + h.pi0.clone()).recip().unwrap();
        assert!(h.tau.consistent_with(&via_pi0));
        assert!(matches!(headline_constants::<f64>(-1.0), Err(NumericError::InvalidTolerance(_))));
    }
}
