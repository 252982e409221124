//! Test-only oracles. Nothing here calls into the solver or metric code
//! paths it is used to check; graphs carry integer weights so the oracles
//! can work in exact integer arithmetic.

#![allow(dead_code)]

use std::collections::VecDeque;

use ctrlplace::topology::{Edge, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: random spanning tree plus each remaining pair
/// with probability `extra`, integer weights in `1..=max_w`.
pub fn random_connected(seed: u64, n: usize, extra: f64, max_w: u32) -> Topology {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = r.gen_range(0..v);
        present[u][v] = true;
        edges.push(Edge { u, v, weight: r.gen_range(1..=max_w) as f64 });
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !present[u][v] && r.gen_bool(extra) {
                present[u][v] = true;
                edges.push(Edge { u, v, weight: r.gen_range(1..=max_w) as f64 });
            }
        }
    }
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    Topology::new(labels, edges).unwrap()
}

/// Exact all-pairs distances by Floyd–Warshall over integer weights.
pub fn floyd_int(t: &Topology) -> Vec<Vec<i64>> {
    let n = t.node_count();
    const INF: i64 = i64::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in t.edges() {
        let w = e.weight as i64;
        assert_eq!(w as f64, e.weight, "oracle needs integer weights");
        d[e.u][e.v] = d[e.u][e.v].min(w);
        d[e.v][e.u] = d[e.v][e.u].min(w);
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][m] + d[m][j] < d[i][j] {
                    d[i][j] = d[i][m] + d[m][j];
                }
            }
        }
    }
    d
}

/// Bellman-Ford-style relaxation from every source (float weights).
pub fn relaxation_distances(t: &Topology) -> Vec<Vec<f64>> {
    let n = t.node_count();
    let mut all = Vec::with_capacity(n);
    for s in 0..n {
        let mut d = vec![f64::INFINITY; n];
        d[s] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for e in t.edges() {
                if d[e.u] + e.weight < d[e.v] {
                    d[e.v] = d[e.u] + e.weight;
                    changed = true;
                }
                if d[e.v] + e.weight < d[e.u] {
                    d[e.u] = d[e.v] + e.weight;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        all.push(d);
    }
    all
}

pub fn per_node_min(d: &[Vec<i64>], set: &[usize]) -> Vec<i64> {
    (0..d.len())
        .map(|v| set.iter().map(|&s| d[v][s]).min().unwrap())
        .collect()
}

pub fn naive_total(d: &[Vec<i64>], set: &[usize]) -> i64 {
    per_node_min(d, set).iter().sum()
}

pub fn naive_worst(d: &[Vec<i64>], set: &[usize]) -> i64 {
    *per_node_min(d, set).iter().max().unwrap()
}

/// Coverage by explicit union of the per-site sets S_i.
pub fn naive_coverage(d: &[Vec<i64>], set: &[usize], bound: i64) -> usize {
    let n = d.len();
    let mut covered = vec![false; n];
    for &s in set {
        for v in 0..n {
            if d[v][s] <= bound {
                covered[v] = true;
            }
        }
    }
    covered.iter().filter(|&&c| c).count()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleObjective {
    Avg,
    Worst,
    Coverage(i64),
}

/// Minimization key in exact arithmetic; average compared through totals.
fn key(d: &[Vec<i64>], set: &[usize], obj: OracleObjective) -> (i64, i64) {
    match obj {
        OracleObjective::Avg => (naive_total(d, set), 0),
        OracleObjective::Worst => (naive_worst(d, set), 0),
        OracleObjective::Coverage(b) => (-(naive_coverage(d, set, b) as i64), naive_total(d, set)),
    }
}

/// Recursive combination enumerator; first minimum in lexicographic order.
pub fn enumerate_best(d: &[Vec<i64>], k: usize, obj: OracleObjective) -> (Vec<usize>, (i64, i64)) {
    fn rec(
        d: &[Vec<i64>],
        k: usize,
        obj: OracleObjective,
        next: usize,
        current: &mut Vec<usize>,
        best: &mut Option<(Vec<usize>, (i64, i64))>,
    ) {
        if current.len() == k {
            let kk = key(d, current, obj);
            if best.as_ref().is_none_or(|(_, b)| kk < *b) {
                *best = Some((current.clone(), kk));
            }
            return;
        }
        for v in next..d.len() {
            if d.len() - v < k - current.len() {
                break;
            }
            current.push(v);
            rec(d, k, obj, v + 1, current, best);
            current.pop();
        }
    }
    let mut best = None;
    rec(d, k, obj, 0, &mut Vec::new(), &mut best);
    best.unwrap()
}

/// Nodes reachable from any of `sources` when `skip_link` is removed.
pub fn reachable_without_link(t: &Topology, sources: &[usize], skip_link: Option<usize>) -> Vec<bool> {
    let n = t.node_count();
    let mut seen = vec![false; n];
    let mut q = VecDeque::new();
    for &s in sources {
        seen[s] = true;
        q.push_back(s);
    }
    while let Some(x) = q.pop_front() {
        for (l, e) in t.edges().iter().enumerate() {
            if Some(l) == skip_link {
                continue;
            }
            let y = if e.u == x {
                e.v
            } else if e.v == x {
                e.u
            } else {
                continue;
            };
            if !seen[y] {
                seen[y] = true;
                q.push_back(y);
            }
        }
    }
    seen
}

/// A link is a bridge iff removing it separates its endpoints.
pub fn is_bridge(t: &Topology, link: usize) -> bool {
    let e = t.edges()[link];
    !reachable_without_link(t, &[e.u], Some(link))[e.v]
}

pub fn sample_set(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = r.gen_range(i..n);
        all.swap(i, j);
    }
    let mut s = all[..k].to_vec();
    s.sort_unstable();
    s
}
