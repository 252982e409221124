//! Placement solvers.
//!
//! All solvers share the [`Objective`] comparison: average and worst-case
//! latency are minimized, coverage is maximized with ties broken toward
//! the smaller average latency. Whenever two placements score equally the
//! lexicographically smaller controller set wins.

mod brute;
mod kmedoids;
mod local;
mod random;

pub use brute::{binomial, solve_brute_force, DEFAULT_EVALUATION_BUDGET};
pub use kmedoids::solve_kmedoids;
pub use local::{local_search_from, solve_local_search};
pub use random::{solve_random_baseline, RandomBaseline};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{
    assign_nearest, avg_latency, covered_count, worst_latency, Assignment, DistanceMatrix,
    MetricsError, Placement,
};
use crate::topology::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("k = {k} is outside 1..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("brute force needs {combinations} evaluations, budget is {budget}")]
    BudgetExceeded { combinations: u128, budget: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Objective {
    AverageLatency,
    WorstLatency,
    CoverageWithinBound { bound: f64 },
}

impl Objective {
    pub fn coverage(bound: f64) -> Result<Self, SolveError> {
        if bound >= 0.0 {
            Ok(Objective::CoverageWithinBound { bound })
        } else {
            Err(MetricsError::NegativeBound(bound).into())
        }
    }

    pub fn is_maximized(&self) -> bool {
        matches!(self, Objective::CoverageWithinBound { .. })
    }

    /// Raw objective value: a latency, or a covered-node count.
    pub fn evaluate(&self, dist: &DistanceMatrix, placement: &Placement) -> f64 {
        match *self {
            Objective::AverageLatency => avg_latency(dist, placement),
            Objective::WorstLatency => worst_latency(dist, placement),
            Objective::CoverageWithinBound { bound } => {
                covered_count(dist, placement, bound) as f64
            }
        }
    }

    pub(crate) fn score(&self, dist: &DistanceMatrix, placement: &Placement) -> Score {
        match *self {
            Objective::AverageLatency => Score::new(avg_latency(dist, placement), 0.0),
            Objective::WorstLatency => Score::new(worst_latency(dist, placement), 0.0),
            Objective::CoverageWithinBound { bound } => Score::new(
                -(covered_count(dist, placement, bound) as f64),
                avg_latency(dist, placement),
            ),
        }
    }
}

/// Lexicographic minimization key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Score {
    primary: f64,
    secondary: f64,
}

impl Score {
    fn new(primary: f64, secondary: f64) -> Self {
        Score { primary, secondary }
    }

    pub(crate) fn better_than(&self, other: &Score) -> bool {
        self.primary < other.primary
            || (self.primary == other.primary && self.secondary < other.secondary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Single,
    BruteForce,
    RandomBaseline,
    LocalSearch,
    KMedoids,
}

/// One cluster of a clustering-based placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub controller: NodeId,
    /// Members other than the controller itself, ascending.
    pub followers: Vec<NodeId>,
    /// Sum of follower delays to the controller.
    pub total_delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solver: SolverKind,
    pub objective: Objective,
    pub placement: Placement,
    pub objective_value: f64,
    pub total_delay: f64,
    pub avg_delay: f64,
    pub worst_delay: f64,
    pub assignment: Assignment,
    pub evaluations: u64,
    pub iterations: u64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clusters: Option<Vec<Cluster>>,
}

impl SolveResult {
    pub(crate) fn build(
        dist: &DistanceMatrix,
        placement: Placement,
        objective: Objective,
        solver: SolverKind,
    ) -> Self {
        let assignment = assign_nearest(dist, &placement);
        SolveResult {
            solver,
            objective,
            objective_value: objective.evaluate(dist, &placement),
            total_delay: assignment.total_delay(),
            avg_delay: assignment.mean_delay(),
            worst_delay: assignment.max_delay(),
            placement,
            assignment,
            evaluations: 0,
            iterations: 0,
            converged: true,
            clusters: None,
        }
    }

    pub(crate) fn with_counts(mut self, evaluations: u64, iterations: u64) -> Self {
        self.evaluations = evaluations;
        self.iterations = iterations;
        self
    }

    /// Per-controller member lists and delay totals.
    pub fn cluster_report(&self) -> Vec<Cluster> {
        self.placement
            .controllers()
            .iter()
            .map(|&c| {
                let followers: Vec<NodeId> = self
                    .assignment
                    .members_of(c)
                    .into_iter()
                    .filter(|&v| v != c)
                    .collect();
                let total_delay = followers
                    .iter()
                    .map(|&v| self.assignment.entries[v].delay)
                    .sum();
                Cluster {
                    controller: c,
                    followers,
                    total_delay,
                }
            })
            .collect()
    }
}

pub(crate) fn check_k(dist: &DistanceMatrix, k: usize) -> Result<(), SolveError> {
    if k == 0 || k > dist.n() {
        Err(SolveError::InvalidK { k, n: dist.n() })
    } else {
        Ok(())
    }
}

/// Best single controller site: the node with the least total delay to
/// all nodes. Equal totals go to the lowest id.
pub fn solve_single_optimal(dist: &DistanceMatrix) -> SolveResult {
    let mut best = 0;
    let mut best_total = dist.total_from(0);
    for v in 1..dist.n() {
        let total = dist.total_from(v);
        if total < best_total {
            best = v;
            best_total = total;
        }
    }
    let placement = Placement::from_sorted_unchecked(vec![best]);
    SolveResult::build(dist, placement, Objective::AverageLatency, SolverKind::Single)
        .with_counts(dist.n() as u64, 0)
}
