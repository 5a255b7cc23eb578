//! Random streams for simulation.
//!
//! Every replicate draws from its own ChaCha8 stream: the generator is keyed
//! by the user seed and the replicate index selects the 64-bit stream id. The
//! streams are independent, so results do not depend on how replicates are
//! scheduled across threads.
//!
//! Exponential variates use the inverse CDF `-ln(1 - U) / rate` with `U`
//! uniform on `[0, 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, replicate: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Exponential variate with the given rate.
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}
