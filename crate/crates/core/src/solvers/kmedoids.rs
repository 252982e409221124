//! Latency-driven network clustering.
//!
//! Nodes are grouped by shortest-path latency with an alternating
//! (Voronoi-iteration) k-medoids: assign every node to its nearest medoid,
//! then move each medoid to the member with the least total delay to the
//! rest of its cluster (lowest id on ties). The medoids become the
//! controller sites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metrics::{DistanceMatrix, Placement};
use crate::topology::NodeId;

use super::{check_k, Objective, SolveError, SolveResult, SolverKind};

/// Farthest-point seeding from one random node: each further medoid is the
/// node farthest from the medoids chosen so far (lowest id on ties).
fn seed_medoids(dist: &DistanceMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<NodeId> {
    let n = dist.n();
    let first = rng.gen_range(0..n);
    let mut medoids = vec![first];
    let mut gap: Vec<f64> = dist.row(first).to_vec();
    while medoids.len() < k {
        let mut next = None;
        for v in 0..n {
            if medoids.contains(&v) {
                continue;
            }
            match next {
                Some(best) if gap[v] <= gap[best] => {}
                _ => next = Some(v),
            }
        }
        let next = next.expect("k <= n leaves a candidate");
        medoids.push(next);
        for (v, g) in gap.iter_mut().enumerate() {
            *g = g.min(dist.get(v, next));
        }
    }
    medoids
}

/// Slot index of the nearest medoid; ties go to the lowest medoid node id.
fn nearest_slot(dist: &DistanceMatrix, medoids: &[NodeId], v: NodeId) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = dist.get(v, medoids[0]);
    for (slot, &m) in medoids.iter().enumerate().skip(1) {
        let d = dist.get(v, m);
        if d < best_d || (d == best_d && m < medoids[best]) {
            best = slot;
            best_d = d;
        }
    }
    (best, best_d)
}

fn assign(dist: &DistanceMatrix, medoids: &[NodeId]) -> (Vec<usize>, Vec<f64>) {
    (0..dist.n())
        .map(|v| nearest_slot(dist, medoids, v))
        .unzip()
}

pub fn solve_kmedoids(
    dist: &DistanceMatrix,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<SolveResult, SolveError> {
    check_k(dist, k)?;
    if max_iters == 0 {
        return Err(SolveError::InvalidParameter("max_iters must be at least 1".into()));
    }
    let n = dist.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids = seed_medoids(dist, k, &mut rng);
    let mut rounds = 0u64;
    let mut evaluations = 0u64;
    let mut converged = false;

    while (rounds as usize) < max_iters {
        rounds += 1;
        let (mut slot_of, mut delay) = assign(dist, &medoids);

        // An empty cluster takes over the node that is currently worst served.
        for _ in 0..k {
            let mut sizes = vec![0usize; k];
            for &s in &slot_of {
                sizes[s] += 1;
            }
            let Some(empty) = sizes.iter().position(|&c| c == 0) else {
                break;
            };
            let worst = (0..n)
                .filter(|v| !medoids.contains(v))
                .fold(None, |acc: Option<NodeId>, v| match acc {
                    Some(w) if delay[v] <= delay[w] => Some(w),
                    _ => Some(v),
                })
                .expect("k <= n leaves a non-medoid");
            medoids[empty] = worst;
            (slot_of, delay) = assign(dist, &medoids);
        }

        let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); k];
        for (v, &s) in slot_of.iter().enumerate() {
            members[s].push(v);
        }

        let mut changed = false;
        for (slot, group) in members.iter().enumerate() {
            let cost = |c: NodeId| group.iter().map(|&m| dist.get(m, c)).sum::<f64>();
            let current = medoids[slot];
            let mut best = current;
            let mut best_cost = cost(current);
            for &c in group {
                evaluations += 1;
                let total = cost(c);
                if total < best_cost || (total == best_cost && c < best) {
                    best = c;
                    best_cost = total;
                }
            }
            if best != current {
                medoids[slot] = best;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }

    let mut ids = medoids;
    ids.sort_unstable();
    let placement = Placement::from_sorted_unchecked(ids);
    let mut result = SolveResult::build(dist, placement, Objective::AverageLatency, SolverKind::KMedoids)
        .with_counts(evaluations, rounds);
    result.converged = converged;
    result.clusters = Some(result.cluster_report());
    Ok(result)
}
