//! Shortest-path distances and the placement objectives.
//!
//! For a placement `S'` over `n` nodes every node is served by its nearest
//! controller. The average-case latency is the mean of those per-node
//! delays, the worst-case latency is their maximum, and coverage counts the
//! nodes whose delay stays within a bound.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{NodeId, Topology};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("topology is disconnected: node {unreachable} cannot be reached from node {from}")]
    Disconnected { from: NodeId, unreachable: NodeId },
    #[error("topology has no nodes")]
    Empty,
    #[error("placement is empty")]
    EmptyPlacement,
    #[error("controller {id} is out of range for {n} nodes")]
    ControllerOutOfRange { id: NodeId, n: usize },
    #[error("latency bound must be non-negative, got {0}")]
    NegativeBound(f64),
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry(f64, NodeId);

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source Dijkstra. `blocked_nodes`/`blocked_links` are skipped;
/// unreachable nodes get `f64::INFINITY`.
pub(crate) fn dijkstra(
    topology: &Topology,
    source: NodeId,
    blocked_nodes: &[bool],
    blocked_links: &[bool],
) -> Vec<f64> {
    let n = topology.node_count();
    let mut dist = vec![f64::INFINITY; n];
    if blocked_nodes.get(source).copied().unwrap_or(false) {
        return dist;
    }
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(HeapEntry(0.0, source)));
    while let Some(Reverse(HeapEntry(d, x))) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for &(y, link) in topology.neighbors(x) {
            if blocked_links.get(link).copied().unwrap_or(false)
                || blocked_nodes.get(y).copied().unwrap_or(false)
            {
                continue;
            }
            let nd = d + topology.edge(link).weight;
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Reverse(HeapEntry(nd, y)));
            }
        }
    }
    dist
}

/// All-pairs shortest-path latencies of a connected topology.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_topology(topology: &Topology) -> Result<Self, MetricsError> {
        let n = topology.node_count();
        if n == 0 {
            return Err(MetricsError::Empty);
        }
        let mut d = Vec::with_capacity(n * n);
        for source in 0..n {
            let row = dijkstra(topology, source, &[], &[]);
            if let Some(unreachable) = row.iter().position(|x| !x.is_finite()) {
                return Err(MetricsError::Disconnected {
                    from: source,
                    unreachable,
                });
            }
            d.extend(row);
        }
        // Dijkstra sums in path order; force exact symmetry.
        for u in 0..n {
            for v in (u + 1)..n {
                let m = d[u * n + v].min(d[v * n + u]);
                d[u * n + v] = m;
                d[v * n + u] = m;
            }
        }
        Ok(DistanceMatrix { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: NodeId, v: NodeId) -> f64 {
        self.d[u * self.n + v]
    }

    pub fn row(&self, u: NodeId) -> &[f64] {
        &self.d[u * self.n..(u + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Sum of distances from `v` to every node.
    pub fn total_from(&self, v: NodeId) -> f64 {
        self.row(v).iter().sum()
    }
}

pub fn all_pairs_distances(topology: &Topology) -> Result<DistanceMatrix, MetricsError> {
    DistanceMatrix::from_topology(topology)
}

/// Sorted, duplicate-free, non-empty set of controller nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Placement(Vec<NodeId>);

impl Placement {
    pub fn new(mut controllers: Vec<NodeId>, n: usize) -> Result<Self, MetricsError> {
        controllers.sort_unstable();
        controllers.dedup();
        if controllers.is_empty() {
            return Err(MetricsError::EmptyPlacement);
        }
        if let Some(&id) = controllers.iter().find(|&&id| id >= n) {
            return Err(MetricsError::ControllerOutOfRange { id, n });
        }
        Ok(Placement(controllers))
    }

    /// Every node of an `n`-node graph.
    pub fn all(n: usize) -> Self {
        Placement((0..n).collect())
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn controllers(&self) -> &[NodeId] {
        &self.0
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub(crate) fn from_sorted_unchecked(controllers: Vec<NodeId>) -> Self {
        debug_assert!(controllers.windows(2).all(|w| w[0] < w[1]));
        Placement(controllers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Served {
    pub controller: NodeId,
    pub delay: f64,
}

/// Node-to-controller mapping under the nearest-controller rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub entries: Vec<Served>,
}

impl Assignment {
    pub fn delays(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|s| s.delay)
    }

    pub fn total_delay(&self) -> f64 {
        self.delays().sum()
    }

    pub fn mean_delay(&self) -> f64 {
        self.total_delay() / self.entries.len() as f64
    }

    pub fn max_delay(&self) -> f64 {
        self.delays().fold(0.0, f64::max)
    }

    /// Nodes served by `controller`, ascending.
    pub fn members_of(&self, controller: NodeId) -> Vec<NodeId> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, s)| s.controller == controller)
            .map(|(v, _)| v)
            .collect()
    }
}

/// Nearest controller of `v`; equal delays go to the lowest controller id.
#[inline]
pub fn nearest(dist: &DistanceMatrix, placement: &Placement, v: NodeId) -> Served {
    let mut best = Served {
        controller: placement.0[0],
        delay: dist.get(v, placement.0[0]),
    };
    for &s in &placement.0[1..] {
        let d = dist.get(v, s);
        if d < best.delay {
            best = Served { controller: s, delay: d };
        }
    }
    best
}

pub fn assign_nearest(dist: &DistanceMatrix, placement: &Placement) -> Assignment {
    Assignment {
        entries: (0..dist.n()).map(|v| nearest(dist, placement, v)).collect(),
    }
}

/// Sum over nodes of the delay to the nearest controller.
pub fn total_latency(dist: &DistanceMatrix, placement: &Placement) -> f64 {
    (0..dist.n()).map(|v| nearest(dist, placement, v).delay).sum()
}

/// Average-case latency: `(1/n) Σ_v min_{s∈S'} d(v,s)`.
pub fn avg_latency(dist: &DistanceMatrix, placement: &Placement) -> f64 {
    total_latency(dist, placement) / dist.n() as f64
}

/// Worst-case latency: `max_v min_{s∈S'} d(v,s)`.
pub fn worst_latency(dist: &DistanceMatrix, placement: &Placement) -> f64 {
    (0..dist.n())
        .map(|v| nearest(dist, placement, v).delay)
        .fold(0.0, f64::max)
}

/// Nodes whose nearest controller is within `bound`, ascending.
pub fn coverage_within_bound(
    dist: &DistanceMatrix,
    placement: &Placement,
    bound: f64,
) -> Result<Vec<NodeId>, MetricsError> {
    if bound.is_nan() || bound < 0.0 {
        return Err(MetricsError::NegativeBound(bound));
    }
    Ok((0..dist.n())
        .filter(|&v| nearest(dist, placement, v).delay <= bound)
        .collect())
}

pub(crate) fn covered_count(dist: &DistanceMatrix, placement: &Placement, bound: f64) -> usize {
    (0..dist.n())
        .filter(|&v| nearest(dist, placement, v).delay <= bound)
        .count()
}

/// For every candidate site, the nodes within `bound` of it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSets {
    pub bound: f64,
    pub sets: Vec<Vec<NodeId>>,
}

impl CoverageSets {
    pub fn new(dist: &DistanceMatrix, bound: f64) -> Result<Self, MetricsError> {
        if bound.is_nan() || bound < 0.0 {
            return Err(MetricsError::NegativeBound(bound));
        }
        let sets = (0..dist.n())
            .map(|s| (0..dist.n()).filter(|&v| dist.get(v, s) <= bound).collect())
            .collect();
        Ok(CoverageSets { bound, sets })
    }

    /// Union of the sets of the chosen sites, ascending.
    pub fn union(&self, placement: &Placement) -> Vec<NodeId> {
        let mut covered: Vec<NodeId> = placement
            .controllers()
            .iter()
            .flat_map(|&s| self.sets[s].iter().copied())
            .collect();
        covered.sort_unstable();
        covered.dedup();
        covered
    }
}
