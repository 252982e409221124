use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{DistanceMatrix, Placement};

use super::{check_k, Objective, SolveError, SolveResult, SolverKind};

/// Outcome of repeated random placements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomBaseline {
    pub trials: Vec<SolveResult>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Draws `k` distinct controller sites uniformly per trial and serves every
/// node from its nearest controller.
pub fn solve_random_baseline(
    dist: &DistanceMatrix,
    k: usize,
    objective: Objective,
    trials: usize,
    seed: u64,
) -> Result<RandomBaseline, SolveError> {
    check_k(dist, k)?;
    if trials == 0 {
        return Err(SolveError::InvalidParameter("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let results: Vec<SolveResult> = (0..trials)
        .map(|_| {
            let placement = random_placement(&mut rng, dist.n(), k);
            SolveResult::build(dist, placement, objective, SolverKind::RandomBaseline)
                .with_counts(1, 0)
        })
        .collect();
    let values = results.iter().map(|r| r.objective_value);
    let mean = values.clone().sum::<f64>() / trials as f64;
    let min = values.clone().fold(f64::INFINITY, f64::min);
    let max = values.fold(f64::NEG_INFINITY, f64::max);
    Ok(RandomBaseline {
        trials: results,
        mean,
        min,
        max,
    })
}

pub(crate) fn random_placement(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Placement {
    let mut ids = rand::seq::index::sample(rng, n, k).into_vec();
    ids.sort_unstable();
    Placement::from_sorted_unchecked(ids)
}
