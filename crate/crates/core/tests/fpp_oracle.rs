//! The Dijkstra engine against exhaustive path enumeration on small ladders.
//!
//! Weights are injected for every edge up to height `TOP`; every edge above
//! it weighs [`WALL`], so no shortest path leaves the finite ladder and the
//! exhaustive answer over that ladder is exact.

use std::collections::BTreeMap;

use proptest::prelude::*;

use ladder_fpp::simulator::ladder::{first_passage_times, EdgeId, EdgeWeights};
use ladder_fpp::simulator::InitialCondition;

const TOP: u64 = 7;
const WALL: f64 = 1e9;

struct Walled(BTreeMap<EdgeId, f64>);

impl EdgeWeights for Walled {
    fn weight(&mut self, edge: EdgeId) -> f64 {
        self.0.get(&edge).copied().unwrap_or(WALL)
    }
}

type V = (u64, u8);

fn edges() -> Vec<EdgeId> {
    let mut out = Vec::new();
    for h in 0..TOP {
        out.push(EdgeId::Rail { height: h, level: 0 });
        out.push(EdgeId::Rail { height: h, level: 1 });
    }
    for h in 0..=TOP {
        out.push(EdgeId::Rung { height: h });
    }
    out
}

fn adjacent(v: V, w: &BTreeMap<EdgeId, f64>) -> Vec<(V, f64)> {
    let (h, l) = v;
    let mut out = vec![((h, 1 - l), w[&EdgeId::Rung { height: h }])];
    if h > 0 {
        out.push(((h - 1, l), w[&EdgeId::Rail { height: h - 1, level: l }]));
    }
    if h < TOP {
        out.push(((h + 1, l), w[&EdgeId::Rail { height: h, level: l }]));
    }
    out
}

/// Minimum length over every simple path from a source, by depth-first search.
fn enumerate(sources: &[V], w: &BTreeMap<EdgeId, f64>) -> BTreeMap<V, f64> {
    fn dfs(v: V, len: f64, w: &BTreeMap<EdgeId, f64>, seen: &mut Vec<V>, best: &mut BTreeMap<V, f64>) {
        let b = best.entry(v).or_insert(f64::INFINITY);
        *b = b.min(len);
        for (u, we) in adjacent(v, w) {
            if !seen.contains(&u) {
                seen.push(u);
                dfs(u, len + we, w, seen, best);
                seen.pop();
            }
        }
    }
    let mut best = BTreeMap::new();
    for &s in sources {
        let mut seen = vec![s];
        dfs(s, 0.0, w, &mut seen, &mut best);
    }
    best
}

fn check(weights: Vec<f64>, h: u64, initial: InitialCondition) -> Result<(), TestCaseError> {
    let map: BTreeMap<EdgeId, f64> = edges().into_iter().zip(weights).collect();
    let sources: &[V] = match initial {
        InitialCondition::BothNodes => &[(0, 0), (0, 1)],
        InitialCondition::SingleNode => &[(0, 0)],
    };
    let brute = enumerate(sources, &map);
    let mut injected = Walled(map.clone());
    let times = first_passage_times(&mut injected, h, initial);
    for x in 0..=h {
        for y in 0..2u8 {
            let want = brute[&(x, y)];
            let got = times[x as usize][y as usize];
            prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "T({x},{y}) = {got}, paths give {want}");
        }
    }
    Ok(())
}

fn weight_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..3.0, edges().len())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn height_one_both_nodes(w in weight_vec()) {
        check(w, 1, InitialCondition::BothNodes)?;
    }

    #[test]
    fn height_one_single_node(w in weight_vec()) {
        check(w, 1, InitialCondition::SingleNode)?;
    }

    #[test]
    fn height_three(w in weight_vec()) {
        check(w, 3, InitialCondition::BothNodes)?;
    }
}

#[test]
fn detour_above_the_target_is_found() {
    // (1,1) is cheapest reached by going up level 0 to height 2, across, and back down
    let mut map: BTreeMap<EdgeId, f64> = edges().into_iter().map(|e| (e, 10.0)).collect();
    map.insert(EdgeId::Rail { height: 0, level: 0 }, 0.1);
    map.insert(EdgeId::Rail { height: 1, level: 0 }, 0.1);
    map.insert(EdgeId::Rung { height: 2 }, 0.1);
    map.insert(EdgeId::Rail { height: 1, level: 1 }, 0.1);
    let times = first_passage_times(&mut map, 1, InitialCondition::SingleNode);
    assert!((times[1][1] - 0.4).abs() < 1e-12);
}
