//! Controller-count selection.
//!
//! [`sweep_k`] solves the placement problem for every `k` in `1..=k_max`
//! and records the objective curve with its step-to-step decrease.
//! [`select_optimal_k`] then picks the smallest `k` after which no
//! additional controller improves the objective by a relative fraction of
//! at least `tau`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derive_seed;
use crate::metrics::{DistanceMatrix, Placement};
use crate::solvers::{
    solve_brute_force, solve_kmedoids, solve_local_search, solve_random_baseline, Objective,
    SolveError, SolverKind,
};

pub const DEFAULT_TAU: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("k_max = {k_max} is outside 1..={n}")]
    InvalidKMax { k_max: usize, n: usize },
    #[error("solver failed at k = {k}: {source}")]
    Solve {
        k: usize,
        #[source]
        source: SolveError,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("tau must lie strictly between 0 and 1, got {0}")]
    InvalidTau(f64),
    #[error("curve is empty")]
    EmptyCurve,
}

/// Solver used for each point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepSolver {
    /// Exhaustive search. With `fallback_max_iters` set, a `k` whose
    /// enumeration exceeds the budget is solved by local search instead.
    BruteForce {
        objective: Objective,
        budget: u64,
        fallback_max_iters: Option<usize>,
    },
    LocalSearch {
        objective: Objective,
        max_iters: usize,
    },
    KMedoids {
        max_iters: usize,
    },
    /// Value at each `k` is the mean over `trials` random placements.
    Random {
        objective: Objective,
        trials: usize,
    },
}

impl SweepSolver {
    pub fn kind(&self) -> SolverKind {
        match self {
            SweepSolver::BruteForce { .. } => SolverKind::BruteForce,
            SweepSolver::LocalSearch { .. } => SolverKind::LocalSearch,
            SweepSolver::KMedoids { .. } => SolverKind::KMedoids,
            SweepSolver::Random { .. } => SolverKind::RandomBaseline,
        }
    }

    pub fn objective(&self) -> Objective {
        match self {
            SweepSolver::BruteForce { objective, .. }
            | SweepSolver::LocalSearch { objective, .. }
            | SweepSolver::Random { objective, .. } => *objective,
            SweepSolver::KMedoids { .. } => Objective::AverageLatency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCurveEntry {
    pub k: usize,
    pub value: f64,
    /// `value[k-1] - value[k]`; absent for the first entry.
    pub decrease: Option<f64>,
    pub solver: SolverKind,
    /// Placement behind `value`; absent for random-mean points.
    pub placement: Option<Placement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCurve {
    pub entries: Vec<KCurveEntry>,
    pub solver: SolverKind,
    pub objective: Objective,
    pub seed: u64,
}

impl KCurve {
    /// Builds a curve from raw values for `k = 1, 2, ...`.
    pub fn from_values(values: &[f64], objective: Objective, solver: SolverKind, seed: u64) -> Self {
        let mut entries = Vec::with_capacity(values.len());
        for (i, &value) in values.iter().enumerate() {
            entries.push(KCurveEntry {
                k: i + 1,
                value,
                decrease: (i > 0).then(|| values[i - 1] - value),
                solver,
                placement: None,
            });
        }
        KCurve {
            entries,
            solver,
            objective,
            seed,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn k_max(&self) -> usize {
        self.entries.last().map_or(0, |e| e.k)
    }

    /// `k,value,decrease` CSV; the first row has an empty decrease.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,value,decrease\n");
        for e in &self.entries {
            let decrease = e.decrease.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", e.k, e.value, decrease);
        }
        out
    }
}

pub fn sweep_k(
    dist: &DistanceMatrix,
    k_max: usize,
    solver: &SweepSolver,
    seed: u64,
) -> Result<KCurve, SweepError> {
    if k_max == 0 || k_max > dist.n() {
        return Err(SweepError::InvalidKMax { k_max, n: dist.n() });
    }
    let mut entries: Vec<KCurveEntry> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let k_seed = derive_seed(seed, k as u64);
        let wrap = |source| SweepError::Solve { k, source };
        let (value, used, placement) = match solver {
            SweepSolver::BruteForce {
                objective,
                budget,
                fallback_max_iters,
            } => match (solve_brute_force(dist, k, *objective, *budget), fallback_max_iters) {
                (Ok(r), _) => (r.objective_value, r.solver, Some(r.placement)),
                (Err(SolveError::BudgetExceeded { .. }), Some(iters)) => {
                    let r = solve_local_search(dist, k, *objective, k_seed, *iters).map_err(wrap)?;
                    (r.objective_value, r.solver, Some(r.placement))
                }
                (Err(e), _) => return Err(wrap(e)),
            },
            SweepSolver::LocalSearch {
                objective,
                max_iters,
            } => {
                let r = solve_local_search(dist, k, *objective, k_seed, *max_iters).map_err(wrap)?;
                (r.objective_value, r.solver, Some(r.placement))
            }
            SweepSolver::KMedoids { max_iters } => {
                let r = solve_kmedoids(dist, k, k_seed, *max_iters).map_err(wrap)?;
                (r.objective_value, r.solver, Some(r.placement))
            }
            SweepSolver::Random { objective, trials } => {
                let r = solve_random_baseline(dist, k, *objective, *trials, k_seed).map_err(wrap)?;
                (r.mean, SolverKind::RandomBaseline, None)
            }
        };
        let decrease = entries.last().map(|prev| prev.value - value);
        entries.push(KCurveEntry {
            k,
            value,
            decrease,
            solver: used,
            placement,
        });
    }
    Ok(KCurve {
        entries,
        solver: solver.kind(),
        objective: solver.objective(),
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub chosen_k: usize,
    pub tau: f64,
    pub rule: String,
}

/// Relative gain of going from `prev` to `next`; 0/0 counts as no gain.
pub fn relative_improvement(prev: f64, next: f64, maximize: bool) -> f64 {
    let gain = if maximize { next - prev } else { prev - next };
    if prev == 0.0 {
        if gain > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        gain / prev.abs()
    }
}

/// Smallest `k` such that every later step improves by less than `tau`.
pub fn select_optimal_k(curve: &KCurve, tau: f64) -> Result<KSelection, SelectionError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(SelectionError::InvalidTau(tau));
    }
    if curve.entries.is_empty() {
        return Err(SelectionError::EmptyCurve);
    }
    let maximize = curve.objective.is_maximized();
    let values = curve.values();
    let mut chosen = values.len() - 1;
    while chosen > 0 && relative_improvement(values[chosen - 1], values[chosen], maximize) < tau {
        chosen -= 1;
    }
    Ok(KSelection {
        chosen_k: curve.entries[chosen].k,
        tau,
        rule: format!(
            "smallest k after which every additional controller improves the objective by less than {tau} (relative)"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(values: &[f64]) -> KCurve {
        KCurve::from_values(values, Objective::AverageLatency, SolverKind::BruteForce, 0)
    }

    #[test]
    fn flat_curve_picks_one() {
        assert_eq!(select_optimal_k(&curve(&[10.0, 10.0, 10.0]), 0.05).unwrap().chosen_k, 1);
    }

    #[test]
    fn noisy_random_placement_curve() {
        let c = curve(&[1291.0, 389.0, 302.0, 188.0, 134.0, 48.0, 12.0, 7.0, 5.0, 5.0]);
        assert_eq!(select_optimal_k(&c, 0.05).unwrap().chosen_k, 9);
        let decreases: Vec<_> = c.entries.iter().filter_map(|e| e.decrease).collect();
        assert_eq!(decreases, vec![902.0, 87.0, 114.0, 54.0, 86.0, 36.0, 5.0, 2.0, 0.0]);
    }

    #[test]
    fn geometric_decay() {
        let values: Vec<f64> = (1..=8).map(|k| 100.0 * 0.5f64.powi(k)).collect();
        assert_eq!(select_optimal_k(&curve(&values), 0.6).unwrap().chosen_k, 1);
        assert_eq!(select_optimal_k(&curve(&values), 0.4).unwrap().chosen_k, 8);
    }

    #[test]
    fn zero_tail_counts_as_no_gain() {
        assert_eq!(select_optimal_k(&curve(&[4.0, 0.0, 0.0]), 0.05).unwrap().chosen_k, 2);
    }

    #[test]
    fn coverage_curves_are_maximized() {
        let c = KCurve::from_values(
            &[5.0, 9.0, 10.0, 10.0],
            Objective::CoverageWithinBound { bound: 3.0 },
            SolverKind::BruteForce,
            0,
        );
        assert_eq!(select_optimal_k(&c, 0.2).unwrap().chosen_k, 2);
        assert_eq!(select_optimal_k(&c, 0.05).unwrap().chosen_k, 3);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(
            select_optimal_k(&curve(&[1.0]), 1.0),
            Err(SelectionError::InvalidTau(1.0))
        );
        assert_eq!(select_optimal_k(&curve(&[1.0]), 0.0), Err(SelectionError::InvalidTau(0.0)));
        assert_eq!(select_optimal_k(&curve(&[]), 0.5), Err(SelectionError::EmptyCurve));
    }

    #[test]
    fn csv_shape() {
        assert_eq!(curve(&[3.0, 1.5]).to_csv(), "k,value,decrease\n1,3,\n2,1.5,1.5\n");
    }
}
