//! Gillespie simulation of the front chain.

use std::io::Write;

use rand::Rng;

use super::rng::{exponential, stream_rng, SimRng};
use super::{Horizon, InitialCondition, SimConfig, SimError, SimMode};
use crate::front_chain::{Generator, LadderGenerator};

/// States at or above this abort the run.
pub const STATE_CAP: usize = 1_000_000;

/// One jump of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainEvent {
    pub state_before: u32,
    pub holding_time: f64,
    /// The jump was `n -> n + 1`, i.e. the infection gained height.
    pub height_incremented: bool,
}

/// A simulated path of the front chain.
///
/// The chain starts at `start_time` in `initial_state` with height
/// `initial_height`. `start_time` is zero for a two-node start and the time
/// both levels first became infected for a single-node start. The time from
/// the last event to `total_time` is spent in `final_state`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrajectory {
    pub start_time: f64,
    pub initial_state: u32,
    pub initial_height: u64,
    pub events: Vec<ChainEvent>,
    pub final_state: u32,
    pub total_time: f64,
    pub final_height: u64,
}

/// A maximal interval spent in one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub state: u32,
    /// Height after this segment's closing jump (unchanged for the final segment).
    pub height_after: u64,
    /// The segment ends with a height increment.
    pub incremented: bool,
}

impl ChainTrajectory {
    /// Every sojourn in time order, including the final partial one.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        let mut t = self.start_time;
        let mut height = self.initial_height;
        let final_seg = std::iter::once_with(move || ());
        self.events
            .iter()
            .map(move |e| {
                let start = t;
                t += e.holding_time;
                if e.height_incremented {
                    height += 1;
                }
                Segment {
                    start,
                    end: t,
                    state: e.state_before,
                    height_after: height,
                    incremented: e.height_incremented,
                }
            })
            .chain(final_seg.map(move |_| {
                let start = self.events.iter().fold(self.start_time, |t, e| t + e.holding_time);
                Segment {
                    start,
                    end: self.total_time,
                    state: self.final_state,
                    height_after: self.final_height,
                    incremented: false,
                }
            }))
            .filter(|s| s.end > s.start || s.incremented)
    }

    /// Absolute times at which each event's jump happens.
    pub fn jump_times(&self) -> Vec<f64> {
        let mut t = self.start_time;
        self.events
            .iter()
            .map(|e| {
                t += e.holding_time;
                t
            })
            .collect()
    }

    pub fn increments(&self) -> u64 {
        self.events.iter().filter(|e| e.height_incremented).count() as u64
    }

    /// CSV with columns `t,state,height`, one row for the start and one per jump.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "state", "height"])?;
        w.write_record(&[
            self.start_time.to_string(),
            self.initial_state.to_string(),
            self.initial_height.to_string(),
        ])?;
        let mut t = self.start_time;
        let mut height = self.initial_height;
        for (i, e) in self.events.iter().enumerate() {
            t += e.holding_time;
            if e.height_incremented {
                height += 1;
            }
            let next = self.events.get(i + 1).map_or(self.final_state, |n| n.state_before);
            w.write_record(&[t.to_string(), next.to_string(), height.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cumulative-rate tables for sampling jumps, built on demand.
struct RowSampler<'a> {
    gen: &'a dyn Generator,
    rows: Vec<(u64, Vec<(u32, u64)>)>,
}

impl<'a> RowSampler<'a> {
    fn new(gen: &'a dyn Generator) -> Self {
        Self { gen, rows: Vec::new() }
    }

    fn row(&mut self, n: usize) -> Result<&(u64, Vec<(u32, u64)>), SimError> {
        if n >= STATE_CAP {
            return Err(SimError::StateCap(STATE_CAP));
        }
        while self.rows.len() <= n {
            let i = self.rows.len();
            let row = self.gen.row(i);
            if !row.is_valid() || row.exit_rate() == 0 {
                return Err(SimError::InvalidRow(i));
            }
            let mut acc = 0u64;
            let cumulative = row
                .entries
                .iter()
                .map(|(&target, &rate)| {
                    acc += u64::from(rate);
                    (target as u32, acc)
                })
                .collect();
            self.rows.push((acc, cumulative));
        }
        Ok(&self.rows[n])
    }

    /// Holding time and next state from `n`.
    fn step(&mut self, n: usize, rng: &mut SimRng) -> Result<(f64, u32), SimError> {
        let (total, cumulative) = self.row(n)?;
        let hold = exponential(rng, *total as f64);
        let pick = rng.random_range(0..*total);
        let next = cumulative
            .iter()
            .find(|(_, c)| pick < *c)
            .map(|(t, _)| *t)
            .expect("pick below total rate");
        Ok((hold, next))
    }
}

enum Prelude {
    /// Both levels infected at time `z` with the given front and height.
    Started { z: f64, front: u32, height: u64 },
    /// The horizon came first.
    HorizonReached { t: f64, height: u64 },
}

/// Runs the phase before both levels are infected from a single node.
///
/// With level 0 infected up to height `k`, the rail above the top fires at
/// rate 1 and each of the `k + 1` rungs at rate 1; a rung at height `j` makes
/// the front `k - j`.
fn single_node_prelude(rng: &mut SimRng, horizon: Horizon) -> Prelude {
    let mut t = 0.0;
    let mut k: u64 = 0;
    loop {
        let hold = exponential(rng, (k + 2) as f64);
        if let Horizon::Time(t_max) = horizon {
            if t + hold > t_max {
                return Prelude::HorizonReached { t: t_max, height: k };
            }
        }
        t += hold;
        let pick = rng.random_range(0..k + 2);
        if pick == k + 1 {
            k += 1;
            if let Horizon::Height(h) = horizon {
                if k >= h {
                    return Prelude::HorizonReached { t, height: k };
                }
            }
        } else {
            return Prelude::Started { z: t, front: (k - pick) as u32, height: k };
        }
    }
}

pub fn simulate_front_chain(cfg: &SimConfig, replicate: u64) -> Result<ChainTrajectory, SimError> {
    simulate_front_chain_with(&LadderGenerator, cfg, replicate)
}

/// Exact path of the chain with rows from `gen`.
///
/// A two-node start begins at state 0 and height 0. A single-node start
/// first simulates the ladder until both levels are infected and starts the
/// chain there.
pub fn simulate_front_chain_with(
    gen: &dyn Generator,
    cfg: &SimConfig,
    replicate: u64,
) -> Result<ChainTrajectory, SimError> {
    cfg.validate()?;
    if cfg.mode != SimMode::FrontChain {
        return Err(SimError::InvalidConfig("front-chain simulation needs mode front_chain".into()));
    }
    let mut rng = stream_rng(cfg.seed, replicate);
    let (start_time, initial_state, initial_height) = match cfg.initial {
        InitialCondition::BothNodes => (0.0, 0, 0),
        InitialCondition::SingleNode => match single_node_prelude(&mut rng, cfg.horizon) {
            Prelude::Started { z, front, height } => (z, front, height),
            Prelude::HorizonReached { t, height: h } => {
                return Ok(ChainTrajectory {
                    start_time: t,
                    initial_state: 0,
                    initial_height: h,
                    events: Vec::new(),
                    final_state: 0,
                    total_time: t,
                    final_height: h,
                });
            }
        },
    };

    let mut sampler = RowSampler::new(gen);
    let mut events = Vec::new();
    let mut t = start_time;
    let mut state = initial_state;
    let mut height = initial_height;
    let total_time = loop {
        if let Horizon::Height(h) = cfg.horizon {
            if height >= h {
                break t;
            }
        }
        let (hold, next) = sampler.step(state as usize, &mut rng)?;
        if let Horizon::Time(t_max) = cfg.horizon {
            if t + hold > t_max {
                break t_max;
            }
        }
        t += hold;
        let incremented = next == state + 1;
        if incremented {
            height += 1;
        }
        events.push(ChainEvent { state_before: state, holding_time: hold, height_incremented: incremented });
        state = next;
    };
    Ok(ChainTrajectory {
        start_time,
        initial_state,
        initial_height,
        events,
        final_state: state,
        total_time,
        final_height: height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front_chain::{q_row, QRow};
    use std::collections::BTreeMap;

    fn time_cfg(seed: u64, t_max: f64) -> SimConfig {
        SimConfig::new(seed, SimMode::FrontChain, Horizon::Time(t_max))
    }

    #[test]
    fn same_seed_same_path() {
        let a = simulate_front_chain(&time_cfg(11, 500.0), 0).unwrap();
        let b = simulate_front_chain(&time_cfg(11, 500.0), 0).unwrap();
        assert_eq!(a, b);
        let c = simulate_front_chain(&time_cfg(11, 500.0), 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn jumps_follow_the_generator() {
        let traj = simulate_front_chain(&time_cfg(5, 5_000.0), 0).unwrap();
        let mut states: Vec<u32> = traj.events.iter().map(|e| e.state_before).collect();
        states.push(traj.final_state);
        for (i, w) in states.windows(2).enumerate() {
            let row = q_row(w[0] as usize);
            assert!(row.entries.contains_key(&(w[1] as usize)), "{} -> {}", w[0], w[1]);
            if w[0] == 0 {
                assert_eq!(w[1], 1);
            }
            assert_eq!(traj.events[i].height_incremented, w[1] == w[0] + 1);
            assert!(traj.events[i].holding_time > 0.0);
        }
        assert_eq!(traj.final_height, traj.increments());
        let last = traj.jump_times().last().copied().unwrap();
        assert!(last <= traj.total_time);
        assert_eq!(traj.total_time, 5_000.0);
    }

    #[test]
    fn height_horizon_stops_on_the_increment() {
        let cfg = SimConfig::new(2, SimMode::FrontChain, Horizon::Height(1_000));
        let traj = simulate_front_chain(&cfg, 0).unwrap();
        assert_eq!(traj.final_height, 1_000);
        assert!(traj.events.last().unwrap().height_incremented);
        assert_eq!(*traj.jump_times().last().unwrap(), traj.total_time);
    }

    #[test]
    fn single_node_start_begins_at_z() {
        let cfg = time_cfg(9, 1_000.0).with_initial(InitialCondition::SingleNode);
        let traj = simulate_front_chain(&cfg, 0).unwrap();
        assert!(traj.start_time > 0.0);
        assert_eq!(traj.final_height, traj.initial_height + traj.increments());
    }

    #[test]
    fn segments_cover_the_run() {
        let traj = simulate_front_chain(&time_cfg(4, 300.0), 0).unwrap();
        let total: f64 = traj.segments().map(|s| s.end - s.start).sum();
        assert!((total - 300.0).abs() < 1e-9);
        let last = traj.segments().last().unwrap();
        assert_eq!(last.state, traj.final_state);
        assert_eq!(last.end, 300.0);
    }

    #[test]
    fn holding_times_have_the_right_means() {
        let traj = simulate_front_chain(&time_cfg(21, 200_000.0), 0).unwrap();
        let mut acc: BTreeMap<u32, (f64, f64, usize)> = BTreeMap::new();
        for e in &traj.events {
            let s = acc.entry(e.state_before).or_default();
            s.0 += e.holding_time;
            s.1 += e.holding_time * e.holding_time;
            s.2 += 1;
        }
        let mut checked = 0;
        for (state, (sum, sq, n)) in acc {
            if n < 10_000 {
                continue;
            }
            let mean = sum / n as f64;
            let var = sq / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            let expected = 1.0 / (f64::from(state) + 2.0);
            assert!((mean - expected).abs() < 4.0 * se, "state {state}: {mean} vs {expected}");
            checked += 1;
        }
        assert!(checked >= 3);
    }

    #[test]
    fn csv_dump_has_one_row_per_jump() {
        let traj = simulate_front_chain(&time_cfg(8, 20.0), 0).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,state,height");
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines.len(), traj.events.len() + 2);
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        assert_eq!(last[1], traj.final_state.to_string());
        assert_eq!(last[2], traj.final_height.to_string());
    }

    struct Escaping;
    impl Generator for Escaping {
        fn row(&self, n: usize) -> QRow {
            QRow { state: n, diagonal: -1, entries: BTreeMap::from([(n + 1, 1)]) }
        }
    }

    #[test]
    fn runaway_generator_hits_the_cap() {
        let cfg = time_cfg(1, 1e9);
        assert_eq!(
            simulate_front_chain_with(&Escaping, &cfg, 0),
            Err(SimError::StateCap(STATE_CAP))
        );
    }

    struct Leaky;
    impl Generator for Leaky {
        fn row(&self, n: usize) -> QRow {
            let mut r = q_row(n);
            r.diagonal -= 1;
            r
        }
    }

    #[test]
    fn invalid_rows_are_rejected() {
        assert_eq!(
            simulate_front_chain_with(&Leaky, &time_cfg(1, 10.0), 0),
            Err(SimError::InvalidRow(0))
        );
    }
}
