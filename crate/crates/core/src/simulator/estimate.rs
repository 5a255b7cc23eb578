//! Estimators over simulated trajectories.
//!
//! Time averages along a single trajectory use batch means: the window after
//! burn-in is cut into [`BATCHES`] equal-length batches and the batch values
//! are treated as independent. Multi-replicate estimates use the sample
//! variance across replicates.

use std::collections::BTreeMap;

use rand::Rng;

use super::chain::ChainTrajectory;
use super::rng::stream_rng;
use super::SimError;

pub const BATCHES: usize = 100;

/// What a [`SimEstimate`] estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// Percolation rate `1/τ`.
    InvTau,
    Tau,
    /// Stationary probability of front state `n`.
    PiN(usize),
    MeanResidual,
    /// Mean residual time given front state `n`.
    MeanResidualGiven(usize),
}

impl Quantity {
    pub fn label(&self) -> String {
        match self {
            Quantity::InvTau => "inv_tau".into(),
            Quantity::Tau => "tau".into(),
            Quantity::PiN(n) => format!("pi_{n}"),
            Quantity::MeanResidual => "mean_residual".into(),
            Quantity::MeanResidualGiven(n) => format!("mean_residual_given_{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimEstimate {
    pub quantity: Quantity,
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

impl SimEstimate {
    /// Mean and standard error of the mean of (approximately) independent samples.
    pub fn from_samples(quantity: Quantity, samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = if n == 0 { f64::NAN } else { samples.iter().sum::<f64>() / n as f64 };
        let std_err = if n < 2 {
            0.0
        } else {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Self { quantity, mean, std_err, n_samples: n }
    }

    /// Distance from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.std_err
    }

    pub fn within_sigmas(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

/// The observation window `[max(burn_in, start), total_time]` and its batch length.
fn window(traj: &ChainTrajectory, burn_in: f64) -> Result<(f64, f64), SimError> {
    let begin = burn_in.max(traj.start_time);
    if !(begin < traj.total_time) {
        return Err(SimError::BurnInTooLong { burn_in, total_time: traj.total_time });
    }
    Ok((begin, (traj.total_time - begin) / BATCHES as f64))
}

/// Time-weighted occupation fraction of every visited front state after
/// burn-in, indexed by state.
pub fn empirical_front_distribution(traj: &ChainTrajectory, burn_in: f64) -> Result<Vec<SimEstimate>, SimError> {
    let (begin, len) = window(traj, burn_in)?;
    let mut occ: Vec<Vec<f64>> = vec![Vec::new(); BATCHES];
    for seg in traj.segments() {
        let mut s = seg.start.max(begin);
        let e = seg.end;
        let state = seg.state as usize;
        let mut b = (((s - begin) / len) as usize).min(BATCHES - 1);
        while s < e {
            let batch_end = if b == BATCHES - 1 { f64::INFINITY } else { begin + (b + 1) as f64 * len };
            let piece_end = e.min(batch_end);
            let row = &mut occ[b];
            if row.len() <= state {
                row.resize(state + 1, 0.0);
            }
            row[state] += (piece_end - s).max(0.0);
            s = piece_end;
            b += 1;
        }
    }
    let max_state = occ.iter().map(Vec::len).max().unwrap_or(0);
    Ok((0..max_state)
        .map(|n| {
            let fractions: Vec<f64> = occ.iter().map(|row| row.get(n).copied().unwrap_or(0.0) / len).collect();
            SimEstimate::from_samples(Quantity::PiN(n), &fractions)
        })
        .collect())
}

/// Height increments per unit time after burn-in, an estimate of `1/τ`.
pub fn height_rate(traj: &ChainTrajectory, burn_in: f64) -> Result<SimEstimate, SimError> {
    let (begin, len) = window(traj, burn_in)?;
    let mut counts = vec![0.0; BATCHES];
    for seg in traj.segments().filter(|s| s.incremented && s.end >= begin) {
        let b = (((seg.end - begin) / len) as usize).min(BATCHES - 1);
        counts[b] += 1.0;
    }
    let rates: Vec<f64> = counts.iter().map(|c| c / len).collect();
    Ok(SimEstimate::from_samples(Quantity::InvTau, &rates))
}

/// Mean residual time overall and split by the front state at the sample time.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualEstimate {
    pub overall: SimEstimate,
    pub by_state: BTreeMap<usize, SimEstimate>,
    /// Sample times with no later height increment in the trajectory.
    pub excluded: usize,
}

/// For each sample time `t`, the wait until the next height increment.
pub fn empirical_residual_time(traj: &ChainTrajectory, sample_times: &[f64]) -> ResidualEstimate {
    let jumps = traj.jump_times();
    // next_inc[i]: first event index >= i that raises the height
    let mut next_inc = vec![usize::MAX; traj.events.len() + 1];
    for i in (0..traj.events.len()).rev() {
        next_inc[i] = if traj.events[i].height_incremented { i } else { next_inc[i + 1] };
    }
    let mut all = Vec::with_capacity(sample_times.len());
    let mut grouped: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut excluded = 0;
    for &t in sample_times {
        if t < traj.start_time || t > traj.total_time {
            excluded += 1;
            continue;
        }
        // the event whose sojourn contains t
        let i = jumps.partition_point(|&j| j <= t);
        let state = traj.events.get(i).map_or(traj.final_state, |e| e.state_before) as usize;
        match next_inc.get(i).copied().filter(|&k| k != usize::MAX) {
            Some(k) => {
                let r = jumps[k] - t;
                all.push(r);
                grouped.entry(state).or_default().push(r);
            }
            None => excluded += 1,
        }
    }
    ResidualEstimate {
        overall: SimEstimate::from_samples(Quantity::MeanResidual, &all),
        by_state: grouped
            .into_iter()
            .map(|(s, v)| (s, SimEstimate::from_samples(Quantity::MeanResidualGiven(s), &v)))
            .collect(),
        excluded,
    }
}

/// `count` sorted uniform times on `[lo, hi)` from a dedicated stream.
pub fn uniform_sample_times(seed: u64, stream: u64, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    let mut out: Vec<f64> = (0..count).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// `½ Σ |p_n - q_n|` over the common support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}
