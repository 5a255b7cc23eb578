//! First-passage percolation on the ladder `ℕ × {0, 1}`.
//!
//! Infection times are shortest-path distances from the initially infected
//! set with i.i.d. Exp(1) edge weights. Weights are drawn on first use and
//! remembered per edge, so only edges near the explored region are ever
//! sampled. Dijkstra runs on the unbounded ladder and stops once every vertex
//! up to the target height is settled, so paths that detour above the target
//! are accounted for.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use super::chain::{ChainEvent, ChainTrajectory};
use super::rng::{exponential, stream_rng, SimRng};
use super::{Horizon, InitialCondition, SimConfig, SimError, SimMode};

/// A vertex `(height, level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LadderVertex {
    pub height: u64,
    pub level: u8,
}

impl LadderVertex {
    pub fn new(height: u64, level: u8) -> Self {
        debug_assert!(level < 2);
        Self { height, level }
    }

    fn neighbours(self) -> impl Iterator<Item = (LadderVertex, EdgeId)> {
        let LadderVertex { height, level } = self;
        let down = height.checked_sub(1).map(|h| {
            (LadderVertex::new(h, level), EdgeId::Rail { height: h, level })
        });
        let up = Some((LadderVertex::new(height + 1, level), EdgeId::Rail { height, level }));
        let across = Some((LadderVertex::new(height, 1 - level), EdgeId::Rung { height }));
        down.into_iter().chain(up).chain(across)
    }
}

/// Canonical edge identity, keyed by the lower endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeId {
    /// `(height, level) -- (height + 1, level)`.
    Rail { height: u64, level: u8 },
    /// `(height, 0) -- (height, 1)`.
    Rung { height: u64 },
}

/// Supplies edge passage times.
pub trait EdgeWeights {
    /// Must return the same value every time it is asked about the same edge.
    fn weight(&mut self, edge: EdgeId) -> f64;
}

/// Exp(1) weights drawn on first request.
pub struct LazyExpWeights {
    rng: SimRng,
    rails: [Vec<f64>; 2],
    rungs: Vec<f64>,
}

impl LazyExpWeights {
    pub fn new(rng: SimRng) -> Self {
        Self { rng, rails: [Vec::new(), Vec::new()], rungs: Vec::new() }
    }

    /// Every edge weight drawn so far.
    pub fn sampled(&self) -> Vec<(EdgeId, f64)> {
        let mut out = Vec::new();
        for level in 0..2u8 {
            for (h, w) in self.rails[level as usize].iter().enumerate() {
                if !w.is_nan() {
                    out.push((EdgeId::Rail { height: h as u64, level }, *w));
                }
            }
        }
        for (h, w) in self.rungs.iter().enumerate() {
            if !w.is_nan() {
                out.push((EdgeId::Rung { height: h as u64 }, *w));
            }
        }
        out
    }
}

fn lazy_slot(store: &mut Vec<f64>, index: usize, rng: &mut SimRng) -> f64 {
    if store.len() <= index {
        store.resize(index + 1, f64::NAN);
    }
    if store[index].is_nan() {
        store[index] = exponential(rng, 1.0);
    }
    store[index]
}

impl EdgeWeights for LazyExpWeights {
    fn weight(&mut self, edge: EdgeId) -> f64 {
        match edge {
            EdgeId::Rail { height, level } => {
                lazy_slot(&mut self.rails[level as usize], height as usize, &mut self.rng)
            }
            EdgeId::Rung { height } => lazy_slot(&mut self.rungs, height as usize, &mut self.rng),
        }
    }
}

impl EdgeWeights for BTreeMap<EdgeId, f64> {
    fn weight(&mut self, edge: EdgeId) -> f64 {
        *self.get(&edge).unwrap_or_else(|| panic!("no weight for {edge:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn slot(v: LadderVertex) -> usize {
    2 * v.height as usize + v.level as usize
}

/// Infection times `T[(x, y)]` for every `x <= target_height`.
pub fn first_passage_times<W: EdgeWeights>(
    weights: &mut W,
    target_height: u64,
    initial: InitialCondition,
) -> Vec<[f64; 2]> {
    let wanted = 2 * (target_height as usize + 1);
    let mut dist: Vec<f64> = vec![f64::INFINITY; wanted + 2];
    let mut settled: Vec<bool> = vec![false; wanted + 2];
    let mut heap = BinaryHeap::new();
    let sources: &[LadderVertex] = match initial {
        InitialCondition::BothNodes => &[LadderVertex { height: 0, level: 0 }, LadderVertex { height: 0, level: 1 }],
        InitialCondition::SingleNode => &[LadderVertex { height: 0, level: 0 }],
    };
    for &s in sources {
        dist[slot(s)] = 0.0;
        heap.push(Reverse((Key(0.0), s)));
    }
    let mut remaining = wanted;
    while let Some(Reverse((Key(d), v))) = heap.pop() {
        let i = slot(v);
        if settled[i] {
            continue;
        }
        settled[i] = true;
        if v.height <= target_height {
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        for (w, edge) in v.neighbours() {
            let j = slot(w);
            if j >= dist.len() {
                dist.resize(j + 2, f64::INFINITY);
                settled.resize(j + 2, false);
            }
            if settled[j] {
                continue;
            }
            let cand = d + weights.weight(edge);
            // ties have probability zero; the heap breaks them by vertex order
            if cand < dist[j] {
                dist[j] = cand;
                heap.push(Reverse((Key(cand), w)));
            }
        }
    }
    (0..=target_height as usize)
        .map(|x| [dist[2 * x], dist[2 * x + 1]])
        .collect()
}

/// Infection times up to the target height from one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct FppRecord {
    pub initial: InitialCondition,
    pub target_height: u64,
    /// `times[x][y] = T[(x, y)]`.
    pub times: Vec<[f64; 2]>,
}

impl FppRecord {
    /// First time any vertex at the target height is infected.
    pub fn hit_time(&self) -> f64 {
        let [a, b] = self.times[self.target_height as usize];
        a.min(b)
    }
}

pub fn simulate_fpp_ladder(cfg: &SimConfig, replicate: u64) -> Result<FppRecord, SimError> {
    cfg.validate()?;
    if cfg.mode != SimMode::FppDijkstra {
        return Err(SimError::InvalidConfig("first-passage simulation needs mode fpp_dijkstra".into()));
    }
    let Horizon::Height(h) = cfg.horizon else {
        return Err(SimError::InvalidConfig("first-passage mode needs a target height".into()));
    };
    let mut weights = LazyExpWeights::new(stream_rng(cfg.seed, replicate));
    let times = first_passage_times(&mut weights, h, cfg.initial);
    Ok(FppRecord { initial: cfg.initial, target_height: h, times })
}

/// Front and height from the top infected heights of the two levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrontState {
    pub front: u64,
    pub height: u64,
}

impl FrontState {
    pub fn from_tops(top0: u64, top1: u64) -> Self {
        Self { front: top0.abs_diff(top1), height: top0.max(top1) }
    }
}

/// A change of the front at `time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontEvent {
    pub time: f64,
    pub state: FrontState,
}

/// Front and height process reconstructed from infection times.
///
/// Starts when both levels are infected and ends when the height reaches the
/// record's target (after that, infections above the target would matter).
#[derive(Clone, Debug, PartialEq)]
pub struct FrontPath {
    pub start_time: f64,
    pub start: FrontState,
    pub events: Vec<FrontEvent>,
    pub end_time: f64,
}

impl FrontPath {
    pub fn state_at(&self, t: f64) -> Option<FrontState> {
        if t < self.start_time || t > self.end_time {
            return None;
        }
        let idx = self.events.partition_point(|e| e.time <= t);
        Some(if idx == 0 { self.start } else { self.events[idx - 1].state })
    }

    /// The same path in the front chain's trajectory form, so the chain
    /// estimators apply to it.
    pub fn to_trajectory(&self) -> ChainTrajectory {
        let mut events = Vec::with_capacity(self.events.len());
        let (mut t, mut cur) = (self.start_time, self.start);
        for e in &self.events {
            events.push(ChainEvent {
                state_before: cur.front as u32,
                holding_time: e.time - t,
                height_incremented: e.state.height > cur.height,
            });
            t = e.time;
            cur = e.state;
        }
        ChainTrajectory {
            start_time: self.start_time,
            initial_state: self.start.front as u32,
            initial_height: self.start.height,
            events,
            final_state: cur.front as u32,
            total_time: self.end_time,
            final_height: cur.height,
        }
    }

    /// Writes `t,state,height` rows, one per change plus the start.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "state", "height"])?;
        let start = std::iter::once(FrontEvent { time: self.start_time, state: self.start });
        for e in start.chain(self.events.iter().copied()) {
            w.serialize((e.time, e.state.front, e.state.height))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Jump counts and occupation times per front state.
    pub fn tallies(&self) -> RateTally {
        let mut tally = RateTally::default();
        let mut t = self.start_time;
        let mut cur = self.start.front;
        for e in &self.events {
            *tally.occupancy.entry(cur).or_default() += e.time - t;
            *tally.jumps.entry((cur, e.state.front)).or_default() += 1;
            t = e.time;
            cur = e.state.front;
        }
        *tally.occupancy.entry(cur).or_default() += self.end_time - t;
        tally
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RateTally {
    pub jumps: BTreeMap<(u64, u64), u64>,
    pub occupancy: BTreeMap<u64, f64>,
}

impl RateTally {
    /// Empirical rate of `from -> to` jumps with its Poisson standard error.
    pub fn rate(&self, from: u64, to: u64) -> Option<(f64, f64)> {
        let time = *self.occupancy.get(&from)?;
        if time <= 0.0 {
            return None;
        }
        let n = self.jumps.get(&(from, to)).copied().unwrap_or(0) as f64;
        Some((n / time, n.sqrt() / time))
    }

    pub fn count(&self, from: u64, to: u64) -> u64 {
        self.jumps.get(&(from, to)).copied().unwrap_or(0)
    }
}

/// Rebuilds `F_t = |N_t^(0) - N_t^(1)|` and `N_t` from a first-passage record.
pub fn front_of_fpp(record: &FppRecord) -> FrontPath {
    let mut infections: Vec<(f64, LadderVertex)> = record
        .times
        .iter()
        .enumerate()
        .flat_map(|(x, t)| {
            [(t[0], LadderVertex::new(x as u64, 0)), (t[1], LadderVertex::new(x as u64, 1))]
        })
        .collect();
    infections.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let target = record.target_height;
    let mut tops: [Option<u64>; 2] = [None, None];
    let mut path: Option<FrontPath> = None;
    for (t, v) in infections {
        let top = &mut tops[v.level as usize];
        if top.is_some_and(|h| h >= v.height) {
            continue;
        }
        *top = Some(v.height);
        let (Some(a), Some(b)) = (tops[0], tops[1]) else { continue };
        let state = FrontState::from_tops(a, b);
        match path.as_mut() {
            None => {
                path = Some(FrontPath { start_time: t, start: state, events: Vec::new(), end_time: t });
            }
            Some(p) => {
                p.events.push(FrontEvent { time: t, state });
                p.end_time = t;
            }
        }
        if state.height >= target {
            break;
        }
    }
    path.expect("both levels are infected by the time the target height is settled")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fpp_cfg(seed: u64, h: u64) -> SimConfig {
        SimConfig::new(seed, SimMode::FppDijkstra, Horizon::Height(h))
    }

    #[test]
    fn initial_nodes_have_time_zero() {
        let rec = simulate_fpp_ladder(&fpp_cfg(1, 50), 0).unwrap();
        assert_eq!(rec.times[0], [0.0, 0.0]);
        let single = simulate_fpp_ladder(&fpp_cfg(1, 50).with_initial(InitialCondition::SingleNode), 0).unwrap();
        assert_eq!(single.times[0][0], 0.0);
        assert!(single.times[0][1] > 0.0);
    }

    #[test]
    fn times_satisfy_the_shortest_path_equations() {
        // every settled vertex is reached through some neighbour along its edge
        let mut weights = LazyExpWeights::new(stream_rng(4, 0));
        let h = 200;
        let times = first_passage_times(&mut weights, h, InitialCondition::BothNodes);
        let sampled: BTreeMap<EdgeId, f64> = weights.sampled().into_iter().collect();
        let t = |v: LadderVertex| times.get(v.height as usize).map(|p| p[v.level as usize]);
        for x in 1..h {
            for y in 0..2u8 {
                let v = LadderVertex::new(x, y);
                let tv = t(v).unwrap();
                let mut best = f64::INFINITY;
                for (w, e) in v.neighbours() {
                    if let (Some(tw), Some(we)) = (t(w), sampled.get(&e)) {
                        assert!(tv <= tw + we + 1e-12);
                        best = best.min(tw + we);
                    }
                }
                assert!((tv - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn figure_configuration() {
        let s = FrontState::from_tops(6, 4);
        assert_eq!(s, FrontState { front: 2, height: 6 });
        // a record in which level 0 reaches 6 and level 1 reaches 4 by t = 10
        let mut times = vec![[0.0, 0.0]; 8];
        for x in 1..=7 {
            times[x][0] = x as f64;
            times[x][1] = if x <= 4 { x as f64 + 0.5 } else { 20.0 + x as f64 };
        }
        let rec = FppRecord { initial: InitialCondition::BothNodes, target_height: 7, times };
        let path = front_of_fpp(&rec);
        assert_eq!(path.start, FrontState { front: 0, height: 0 });
        assert_eq!(path.state_at(6.5), Some(FrontState { front: 2, height: 6 }));
    }

    #[test]
    fn reconstruction_starts_at_zero_for_two_nodes() {
        let rec = simulate_fpp_ladder(&fpp_cfg(2, 100), 0).unwrap();
        let path = front_of_fpp(&rec);
        assert_eq!(path.start_time, 0.0);
        assert_eq!(path.start, FrontState { front: 0, height: 0 });
        assert_eq!(path.events.last().unwrap().state.height, 100);
        assert_eq!(path.end_time, rec.hit_time());
    }

    #[test]
    fn reconstructed_jumps_stay_in_the_generator_support() {
        let rec = simulate_fpp_ladder(&fpp_cfg(6, 20_000), 0).unwrap();
        let tally = front_of_fpp(&rec).tallies();
        for (&(from, to), _) in &tally.jumps {
            let row = crate::front_chain::q_row(from as usize);
            assert!(row.entries.contains_key(&(to as usize)), "{from} -> {to}");
        }
    }

    #[test]
    fn trajectory_form_keeps_times_and_heights() {
        let rec = simulate_fpp_ladder(&fpp_cfg(8, 300), 0).unwrap();
        let path = front_of_fpp(&rec);
        let traj = path.to_trajectory();
        assert_eq!(traj.events.len(), path.events.len());
        assert_eq!(traj.increments(), 300);
        assert_eq!(traj.final_height, 300);
        let jumps = traj.jump_times();
        for (j, e) in jumps.iter().zip(&path.events) {
            assert!((j - e.time).abs() < 1e-9);
        }
    }
}
