use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::metrics::{DistanceMatrix, Placement};

use super::random::random_placement;
use super::{check_k, Objective, SolveError, SolveResult, SolverKind};

/// Best-improvement swap search from a seeded random start.
pub fn solve_local_search(
    dist: &DistanceMatrix,
    k: usize,
    objective: Objective,
    seed: u64,
    max_iters: usize,
) -> Result<SolveResult, SolveError> {
    check_k(dist, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = random_placement(&mut rng, dist.n(), k);
    local_search_from(dist, start, objective, max_iters)
}

/// Repeatedly applies the best improving one-out/one-in swap until none
/// improves or `max_iters` swaps have been made. Among equally good swaps
/// the first in (outgoing position, incoming id) order wins.
pub fn local_search_from(
    dist: &DistanceMatrix,
    start: Placement,
    objective: Objective,
    max_iters: usize,
) -> Result<SolveResult, SolveError> {
    if max_iters == 0 {
        return Err(SolveError::InvalidParameter("max_iters must be at least 1".into()));
    }
    let n = dist.n();
    let mut current = start;
    let mut current_score = objective.score(dist, &current);
    let mut evaluations = 1u64;
    let mut swaps = 0u64;
    let mut converged = false;

    for _ in 0..max_iters {
        let mut best: Option<(Placement, _)> = None;
        for pos in 0..current.k() {
            for incoming in (0..n).filter(|&v| !current.contains(v)) {
                let mut ids = current.controllers().to_vec();
                ids[pos] = incoming;
                ids.sort_unstable();
                let candidate = Placement::from_sorted_unchecked(ids);
                let score = objective.score(dist, &candidate);
                evaluations += 1;
                let reference = best.as_ref().map_or(&current_score, |(_, s)| s);
                if score.better_than(reference) {
                    best = Some((candidate, score));
                }
            }
        }
        match best {
            Some((placement, score)) => {
                current = placement;
                current_score = score;
                swaps += 1;
            }
            None => {
                converged = true;
                break;
            }
        }
    }

    let mut result = SolveResult::build(dist, current, objective, SolverKind::LocalSearch)
        .with_counts(evaluations, swaps);
    result.converged = converged;
    Ok(result)
}
