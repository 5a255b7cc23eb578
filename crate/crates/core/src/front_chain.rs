//! The front process `F_t = |N_t^(0) - N_t^(1)|` of ladder percolation.
//!
//! `F` is a continuous-time Markov chain on `0, 1, 2, ...`. From state 0 it
//! jumps to 1 at rate 2. From `n >= 1` it jumps to `n + 1` at rate 1, to
//! `n - 1` at rate 2 and to each of `0..=n-2` at rate 1.
//!
//! The stationary law satisfies `π_n = a_n π_0 - b_n` for integer sequences
//! `a`, `b`, and has the closed form
//! `π_0 = J_0 / (2J_3 + J_0)`, `π_n = 2 (J_{n+2} - J_{n+3}) / (2J_3 + J_0)`.
//! A truncated dense solve of `ΠQ = 0` provides an independent check.

use std::collections::BTreeMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::bessel::{j_series, refine, upsilon};
use crate::bounded::{BoundedReal, Summation};
use crate::error::{check_tol, NumericError, Result};
use crate::scalar::{inv_factorial, one_plus_roundoff, Scalar};

/// One row of the intensity matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QRow {
    pub state: usize,
    /// Minus the total exit rate.
    pub diagonal: i64,
    /// Off-diagonal rates keyed by target state.
    pub entries: BTreeMap<usize, u32>,
}

impl QRow {
    pub fn exit_rate(&self) -> u64 {
        self.entries.values().map(|&r| u64::from(r)).sum()
    }

    /// `Q[state][target]`, diagonal included.
    pub fn rate_to(&self, target: usize) -> i64 {
        if target == self.state {
            self.diagonal
        } else {
            self.entries.get(&target).map_or(0, |&r| i64::from(r))
        }
    }

    /// Row sums to zero and has a non-positive diagonal.
    pub fn is_valid(&self) -> bool {
        !self.entries.contains_key(&self.state)
            && self.diagonal <= 0
            && self.exit_rate() == self.diagonal.unsigned_abs()
    }
}

/// A source of intensity-matrix rows.
///
/// The ladder chain is [`LadderGenerator`]; other implementations exist so
/// that validation code can be exercised against deliberately wrong chains.
pub trait Generator: Send + Sync {
    fn row(&self, n: usize) -> QRow;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LadderGenerator;

impl Generator for LadderGenerator {
    fn row(&self, n: usize) -> QRow {
        q_row(n)
    }
}

impl<G: Generator + ?Sized> Generator for &G {
    fn row(&self, n: usize) -> QRow {
        (**self).row(n)
    }
}

/// Row `n` of the front chain's intensity matrix.
pub fn q_row(n: usize) -> QRow {
    let mut entries = BTreeMap::new();
    if n == 0 {
        entries.insert(1, 2);
    } else {
        for j in 0..n.saturating_sub(1) {
            entries.insert(j, 1);
        }
        entries.insert(n - 1, 2);
        entries.insert(n + 1, 1);
    }
    QRow { state: n, diagonal: -(n as i64 + 2), entries }
}

/// The two coefficient sequences in `π_n = a_n π_0 - b_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeqKind {
    A,
    B,
}

impl SeqKind {
    pub fn name(self) -> &'static str {
        match self {
            SeqKind::A => "a",
            SeqKind::B => "b",
        }
    }
}

/// A sequence term with its index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSeq {
    pub kind: SeqKind,
    pub index: usize,
    pub value: BigInt,
}

/// Largest index `seq` will compute.
pub const SEQ_INDEX_CAP: usize = 10_000;

const SEQ_INITIAL: [(i64, i64); 3] = [(3, 1), (11, 5), (56, 26)];

/// Generates `(n, a_n, b_n)` for `n = 1, 2, ...` using
/// `c_n = c_{n-3} - (n+1) c_{n-2} + (n+3) c_{n-1}` from `n = 4`.
#[derive(Clone, Debug, Default)]
pub struct SequenceIter {
    n: usize,
    window: Vec<(BigInt, BigInt)>,
}

impl SequenceIter {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Iterator for SequenceIter {
    type Item = (usize, BigInt, BigInt);

    fn next(&mut self) -> Option<Self::Item> {
        self.n += 1;
        let n = self.n;
        let next = if n <= 3 {
            let (a, b) = SEQ_INITIAL[n - 1];
            (BigInt::from(a), BigInt::from(b))
        } else {
            let w = &self.window;
            let step = |c3: &BigInt, c2: &BigInt, c1: &BigInt| {
                c3 - c2 * BigInt::from(n + 1) + c1 * BigInt::from(n + 3)
            };
            (
                step(&w[0].0, &w[1].0, &w[2].0),
                step(&w[0].1, &w[1].1, &w[2].1),
            )
        };
        if self.window.len() == 3 {
            self.window.remove(0);
        }
        self.window.push(next.clone());
        Some((n, next.0, next.1))
    }
}

fn seq_cache() -> &'static RwLock<Vec<(BigInt, BigInt)>> {
    static CACHE: OnceLock<RwLock<Vec<(BigInt, BigInt)>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Vec::new()))
}

/// `a_n` or `b_n`, memoized; `1 <= n <= SEQ_INDEX_CAP`.
pub fn seq(kind: SeqKind, n: usize) -> Result<BigInt> {
    if n == 0 || n > SEQ_INDEX_CAP {
        return Err(NumericError::IndexOutOfRange { index: n, cap: SEQ_INDEX_CAP });
    }
    let pick = |pair: &(BigInt, BigInt)| match kind {
        SeqKind::A => pair.0.clone(),
        SeqKind::B => pair.1.clone(),
    };
    {
        let cache = seq_cache().read().expect("sequence cache poisoned");
        if let Some(pair) = cache.get(n - 1) {
            return Ok(pick(pair));
        }
    }
    let mut cache = seq_cache().write().expect("sequence cache poisoned");
    if cache.len() < n {
        // restart from the last three cached values
        let start = cache.len().saturating_sub(3);
        let mut it = SequenceIter { n: cache.len(), window: cache[start..].to_vec() };
        while cache.len() < n {
            let (_, a, b) = it.next().expect("infinite iterator");
            cache.push((a, b));
        }
    }
    Ok(pick(&cache[n - 1]))
}

/// `(c_n - c_{n-1}) / n` for `n >= 2` (the sequences `A_n`, `B_n`).
///
/// Returns `None` below `n = 2` or if the division is not exact.
pub fn scaled_difference(kind: SeqKind, n: usize) -> Result<Option<BigInt>> {
    if n < 2 {
        return Ok(None);
    }
    let diff = seq(kind, n)? - seq(kind, n - 1)?;
    let (q, r) = diff.div_rem(&BigInt::from(n));
    Ok(r.is_zero().then_some(q))
}

/// `a_n`, `b_n` rebuilt from Υ:
/// `b_n = Υ(n+3,0) - Υ(n+2,0)`,
/// `a_n = 2[Υ(n+3,3) - Υ(n+2,3)] + Υ(n+3,0) - Υ(n+2,0)`.
pub fn seq_via_upsilon(kind: SeqKind, n: usize) -> Result<BigInt> {
    if n == 0 {
        return Err(NumericError::IndexOutOfRange { index: n, cap: SEQ_INDEX_CAP });
    }
    let n = n as i64;
    let b = upsilon(n + 3, 0) - upsilon(n + 2, 0);
    Ok(match kind {
        SeqKind::B => b,
        SeqKind::A => (upsilon(n + 3, 3) - upsilon(n + 2, 3)) * 2 + b,
    })
}

/// Which of the two recurrences a check refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recursion {
    /// `c_n = (c_{n+1} - c_n)/(n+1) - (c_n - c_{n-1})/n`, `n >= 2`.
    Coefficient,
    /// `C_{n+1} + C_{n-1} = (n+2) C_n` for `C_n = (c_n - c_{n-1})/n`, `n >= 3`.
    ScaledDifference,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionCheck {
    pub recursion: Recursion,
    pub kind: SeqKind,
    pub n: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RecursionReport {
    pub checks: Vec<RecursionCheck>,
}

impl RecursionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RecursionCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Verifies both recurrences exactly for every index whose terms lie in `1..=n_max`.
pub fn check_sequence_recursions(n_max: usize) -> Result<RecursionReport> {
    if n_max < 4 {
        return Err(NumericError::IndexOutOfRange { index: n_max, cap: SEQ_INDEX_CAP });
    }
    let mut report = RecursionReport::default();
    for kind in [SeqKind::A, SeqKind::B] {
        let c: Vec<BigRational> = (1..=n_max)
            .map(|i| seq(kind, i).map(BigRational::from_integer))
            .collect::<Result<_>>()?;
        let at = |i: usize| &c[i - 1];
        let r = |v: usize| BigRational::from_integer(BigInt::from(v));
        for n in 2..n_max {
            let rhs = (at(n + 1) - at(n)) / r(n + 1) - (at(n) - at(n - 1)) / r(n);
            report.checks.push(RecursionCheck {
                recursion: Recursion::Coefficient,
                kind,
                n,
                holds: *at(n) == rhs,
            });
        }
        let scaled: Vec<Option<BigInt>> = (2..=n_max)
            .map(|i| scaled_difference(kind, i))
            .collect::<Result<_>>()?;
        let big = |i: usize| scaled[i - 2].as_ref();
        for n in 3..n_max {
            let holds = match (big(n - 1), big(n), big(n + 1)) {
                (Some(lo), Some(mid), Some(hi)) => hi + lo == mid * BigInt::from(n + 2),
                _ => false,
            };
            report.checks.push(RecursionCheck {
                recursion: Recursion::ScaledDifference,
                kind,
                n,
                holds,
            });
        }
    }
    Ok(report)
}

/// `2J_3 + J_0` and `J_0` at internal truncation `inner`.
pub(crate) fn normalizer<S: Scalar>(inner: &S) -> (BoundedReal<S>, BoundedReal<S>) {
    let mode = Summation::default();
    let j0 = j_series::<S>(0, inner, mode);
    let j3 = j_series::<S>(3, inner, mode);
    (j3.scale(2) + j0.clone(), j0)
}

fn pi_at<S: Scalar>(n: usize, inner: &S) -> BoundedReal<S> {
    let (denom, j0) = normalizer::<S>(inner);
    if n == 0 {
        return j0.checked_div(&denom).expect("2J_3 + J_0 is bounded away from zero");
    }
    let mode = Summation::default();
    let n = n as u32;
    let diff = j_series::<S>(n + 2, inner, mode) - j_series::<S>(n + 3, inner, mode);
    diff.scale(2)
        .checked_div(&denom)
        .expect("2J_3 + J_0 is bounded away from zero")
}

/// `π_0 = J_0 / (2J_3 + J_0)`.
pub fn pi0<S: Scalar>(tol: f64) -> Result<BoundedReal<S>> {
    pi(0, tol)
}

/// Stationary probability of front state `n`.
pub fn pi<S: Scalar>(n: usize, tol: f64) -> Result<BoundedReal<S>> {
    refine(tol, |inner: S| pi_at::<S>(n, &inner))
}

/// `1 - Σ_{j<=n_max} π_j = 2 J_{n_max+3} / (2J_3 + J_0)`.
pub fn tail_mass<S: Scalar>(n_max: usize, tol: f64) -> Result<BoundedReal<S>> {
    refine(tol, |inner: S| {
        let (denom, _) = normalizer::<S>(&inner);
        j_series::<S>(n_max as u32 + 3, &inner, Summation::default())
            .scale(2)
            .checked_div(&denom)
            .expect("2J_3 + J_0 is bounded away from zero")
    })
}

/// Upper bound on the stationary mass beyond state `k`, from `|J_n(2)| <= 1/n!`.
pub fn tail_bound<S: Scalar>(k: usize) -> S {
    let (inv, inv_err) = inv_factorial::<S>(k as u32 + 3);
    let (denom, _) = normalizer::<S>(&S::from_decimal("0.000001").0);
    (inv + inv_err) * S::from_int(2) / denom.lower() * one_plus_roundoff::<S>(4)
}

/// Truncated stationary distribution on states `0..=k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontDistribution<S> {
    pub probs: Vec<S>,
    /// Bound on the mass of states above `k`.
    pub tail_bound: S,
    pub k: usize,
}

impl<S: Scalar> FrontDistribution<S> {
    pub fn total(&self) -> S {
        self.probs.iter().fold(S::zero(), |acc, p| acc + p.clone())
    }

    /// `(ΠQ)_j` for `j = 0..=k` using only the states this distribution covers.
    pub fn balance_residuals(&self, gen: &dyn Generator) -> Vec<S> {
        let mut out = vec![S::zero(); self.k + 1];
        for (i, p) in self.probs.iter().enumerate() {
            let row = gen.row(i);
            for (j, slot) in out.iter_mut().enumerate() {
                let q = row.rate_to(j);
                if q != 0 {
                    *slot = slot.clone() + p.clone() * S::from_int(q);
                }
            }
        }
        out
    }
}

/// Closed-form `π_0..π_k`, each to within `tol`.
pub fn closed_form_distribution<S: Scalar>(k: usize, tol: f64) -> Result<FrontDistribution<S>> {
    check_tol(tol)?;
    let probs = (0..=k)
        .map(|n| pi::<S>(n, tol).map(|b| b.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrontDistribution { probs, tail_bound: tail_bound::<S>(k), k })
}

/// Solves the balance equations of columns `0..k` plus `Σ π = 1`, giving
/// states above `k` zero mass.
pub fn stationary_truncated_solve<S: Scalar>(k: usize) -> Result<FrontDistribution<S>> {
    stationary_truncated_solve_with(&LadderGenerator, k)
}

pub fn stationary_truncated_solve_with<S: Scalar>(
    gen: &dyn Generator,
    k: usize,
) -> Result<FrontDistribution<S>> {
    if k < 5 {
        return Err(NumericError::TruncationTooSmall(k));
    }
    let dim = k + 1;
    // equation j < k: Σ_i π_i Q[i][j] = 0; equation k: Σ_i π_i = 1
    let mut a = vec![vec![S::zero(); dim]; dim];
    let mut rhs = vec![S::zero(); dim];
    for i in 0..dim {
        let row = gen.row(i);
        for (j, eq) in a.iter_mut().enumerate().take(k) {
            eq[i] = S::from_int(row.rate_to(j));
        }
        a[k][i] = S::one();
    }
    rhs[k] = S::one();
    let probs = solve_dense(a, rhs)?;
    Ok(FrontDistribution { probs, tail_bound: tail_bound::<S>(k), k })
}

/// Gaussian elimination with partial pivoting.
fn solve_dense<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| {
                a[x][col]
                    .abs()
                    .partial_cmp(&a[y][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        if a[pivot][col].is_zero() {
            return Err(NumericError::SingularSystem(col));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / a[col][col].clone();
            for c in col..n {
                let v = a[col][c].clone() * f.clone();
                a[r][c] = a[r][c].clone() - v;
            }
            b[r] = b[r].clone() - b[col].clone() * f;
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in (r + 1)..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(x)
}

/// `π_n` reconstructed as `a_n π_0 - b_n`. Cancels catastrophically for large
/// `n` in floating point; useful at small `n` and in exact arithmetic.
pub fn pi_from_coefficients<S: Scalar>(n: usize, pi0: &BoundedReal<S>) -> Result<BoundedReal<S>> {
    if n == 0 {
        return Ok(pi0.clone());
    }
    let a = BoundedReal::exact(S::from_bigint(&seq(SeqKind::A, n)?));
    let b = BoundedReal::exact(S::from_bigint(&seq(SeqKind::B, n)?));
    Ok(a * pi0.clone() - b)
}
