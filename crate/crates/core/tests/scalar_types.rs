//! The same computations in `f32`, `f64` and exact rationals.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use ladder_fpp::front_chain::{pi, stationary_truncated_solve};
use ladder_fpp::{avg_residual_time, time_constant, BoundedF32, BoundedF64, BoundedRational, NumericError};

fn rational_interval(b: &BoundedRational) -> (f64, f64) {
    (b.lower().to_f64().unwrap(), b.upper().to_f64().unwrap())
}

#[test]
fn enclosures_overlap_across_types() {
    let t32: BoundedF32 = time_constant(1e-5).unwrap();
    let t64: BoundedF64 = time_constant(1e-13).unwrap();
    let tq: BoundedRational = time_constant(1e-30).unwrap();
    let (lo, hi) = rational_interval(&tq);
    assert!(hi - lo < 1e-29);
    assert!(t64.lower() <= hi && lo <= t64.upper());
    assert!(f64::from(t32.lower()) <= hi && lo <= f64::from(t32.upper()));
}

#[test]
fn f32_reports_unattainable_tolerances() {
    assert!(matches!(
        avg_residual_time::<f32>(1e-10),
        Err(NumericError::ToleranceUnattainable { .. })
    ));
    assert!(avg_residual_time::<f32>(1e-4).is_ok());
}

#[test]
fn exact_truncated_solve_agrees_with_the_closed_form() {
    let solved = stationary_truncated_solve::<BigRational>(30).unwrap();
    for n in 0..=10 {
        let exact = pi::<BigRational>(n, 1e-40).unwrap();
        let diff = (&solved.probs[n] - &exact.value).to_f64().unwrap().abs();
        // truncation at K = 30 leaves mass of order 1/33!
        assert!(diff < 1e-30, "n = {n}: {diff:e}");
    }
}
