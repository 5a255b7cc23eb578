//! First-passage percolation on the ladder `ℕ × {0, 1}` with Exp(1) edge weights.
//!
//! Exact values of the time constant, the stationary law of the front and the
//! average residual time, each with a certified error bound, together with two
//! independent oracles: a truncated linear solve of the front chain and Monte
//! Carlo simulation of both the front chain and the percolation itself.
//!
//! Numerical routines are generic over [`scalar::Scalar`], implemented for
//! `f32`, `f64` and exact [`num_rational::BigRational`]. The aliases below fix
//! the common choices.

pub mod bessel;
pub mod bounded;
pub mod cli;
pub mod constants;
pub mod error;
pub mod front_chain;
pub mod reference;
pub mod scalar;
pub mod simulator;

use num_rational::BigRational;

pub use bounded::{BoundedReal, Summation};
pub use constants::{avg_residual_time, headline_constants, time_constant, HeadlineConstants};
pub use error::NumericError;
pub use front_chain::{pi, pi0, seq, seq_via_upsilon, stationary_truncated_solve, FrontDistribution, Generator, SeqKind};
pub use scalar::Scalar;
pub use simulator::{SimConfig, SimError, SimEstimate, SimMode};

pub type BoundedF32 = BoundedReal<f32>;
pub type BoundedF64 = BoundedReal<f64>;
pub type BoundedRational = BoundedReal<BigRational>;

pub type FrontDistributionF64 = FrontDistribution<f64>;
pub type FrontDistributionRational = FrontDistribution<BigRational>;

pub type HeadlineF64 = HeadlineConstants<f64>;
pub type HeadlineRational = HeadlineConstants<BigRational>;
