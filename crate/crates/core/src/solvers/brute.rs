use crate::metrics::{DistanceMatrix, Placement};

use super::{check_k, Objective, SolveError, SolveResult, SolverKind};

pub const DEFAULT_EVALUATION_BUDGET: u64 = 10_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustive search over all `C(n, k)` placements.
///
/// Combinations are visited in lexicographic order and only a strictly
/// better score replaces the incumbent, so among optima the
/// lexicographically smallest set is returned.
pub fn solve_brute_force(
    dist: &DistanceMatrix,
    k: usize,
    objective: Objective,
    budget: u64,
) -> Result<SolveResult, SolveError> {
    check_k(dist, k)?;
    let n = dist.n();
    let combinations = binomial(n, k);
    if combinations > budget as u128 {
        return Err(SolveError::BudgetExceeded {
            combinations,
            budget,
        });
    }

    let mut idx: Vec<usize> = (0..k).collect();
    let mut best_set = idx.clone();
    let mut best = objective.score(dist, &Placement::from_sorted_unchecked(idx.clone()));
    let mut evaluations = 1u64;
    // advance to the next combination
    while let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) {
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
        let score = objective.score(dist, &Placement::from_sorted_unchecked(idx.clone()));
        evaluations += 1;
        if score.better_than(&best) {
            best = score;
            best_set.copy_from_slice(&idx);
        }
    }
    let placement = Placement::from_sorted_unchecked(best_set);
    Ok(
        SolveResult::build(dist, placement, objective, SolverKind::BruteForce)
            .with_counts(evaluations, 0),
    )
}
