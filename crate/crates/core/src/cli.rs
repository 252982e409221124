//! Command-line surface: argument parsing, run configuration and report
//! files.
//!
//! Every command takes a single `--seed`; sub-seeds for individual solver
//! runs are derived from it with [`derive_seed`], so identical flags give
//! byte-identical output files. Files are written to a temporary file in
//! the target directory and renamed into place.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derive_seed;
use crate::k_selection::{select_optimal_k, sweep_k, KCurve, KSelection, SweepError, SweepSolver};
use crate::metrics::{DistanceMatrix, MetricsError, Placement};
use crate::reliability::{
    evaluate_tradeoff_families, parse_scenarios, single_link_scenarios, single_node_scenarios,
    ReliabilityError, ScenarioFamily, TradeoffReport,
};
use crate::solvers::{
    solve_brute_force, solve_kmedoids, solve_local_search, solve_random_baseline,
    solve_single_optimal, Objective, SolveError, SolveResult, SolverKind,
    DEFAULT_EVALUATION_BUDGET,
};
use crate::topology::{
    generate_clustered, load_adjacency_csv, load_edge_list, ClusteredTopologySpec, Topology,
    TopologyError, WeightRange, EDGE_LIST_HEADER,
};

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => exit::IO,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Infeasible(_) => exit::INFEASIBLE,
        }
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Disconnected { .. } | MetricsError::Empty => {
                CliError::Infeasible(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BudgetExceeded { .. } => CliError::Infeasible(e.to_string()),
            SolveError::Metrics(m) => m.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Solve { k, source } => match CliError::from(source) {
                CliError::Infeasible(msg) => CliError::Infeasible(format!("at k = {k}: {msg}")),
                other => other,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ReliabilityError> for CliError {
    fn from(e: ReliabilityError) -> Self {
        match e {
            ReliabilityError::Metrics(m) => m.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ctrlplace", version, about = "SDN controller placement toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place controllers with one solver and write solve.json.
    Solve(SolveArgs),
    /// Solve for k = 1..k-max, write curve.csv and selection.json.
    Sweep(SweepArgs),
    /// Latency/reliability trade-off under failure scenarios.
    Reliability(ReliabilityArgs),
    /// Write the seeded clustered example network.
    GenExample(GenExampleArgs),
    /// Convert a topology between adjacency CSV, edge-list CSV and JSON.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Adjacency,
    Edgelist,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverName {
    Single,
    Brute,
    Local,
    Kmedoids,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveName {
    Avg,
    Worst,
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioKind {
    SingleLink,
    SingleNode,
    File,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to json for *.json, edgelist when the first line is the
    /// edge-list header, adjacency otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum, default_value = "avg")]
    pub objective: ObjectiveName,
    /// Latency bound for the coverage objective.
    #[arg(long)]
    pub bound: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "kmedoids")]
    pub solver: SolverName,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[arg(long)]
    pub k: Option<usize>,
    /// Random-baseline trials (random solver only, default 100).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_EVALUATION_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "brute")]
    pub solver: SolverName,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[arg(long)]
    pub k_max: usize,
    #[arg(long, default_value_t = crate::k_selection::DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_EVALUATION_BUDGET)]
    pub budget: u64,
    /// Fall back to local search where brute force exceeds the budget.
    #[arg(long)]
    pub fallback: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReliabilityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "kmedoids")]
    pub solver: SolverName,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    /// Controller counts to compare, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "single-link")]
    pub scenarios: Vec<ScenarioKind>,
    /// JSON scenario list, required with `--scenarios file`.
    #[arg(long)]
    pub scenario_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub qs: f64,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_EVALUATION_BUDGET)]
    pub budget: u64,
    /// Also report a scalarized score with this latency weight in [0, 1].
    #[arg(long)]
    pub weighted_sum: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenExampleArgs {
    #[arg(long, value_delimiter = ',', default_value = "6,6,6,5")]
    pub sizes: Vec<usize>,
    /// Intra-group weight range as MIN,MAX.
    #[arg(long, value_delimiter = ',', num_args = 2, default_value = "1,30")]
    pub intra: Vec<f64>,
    /// Inter-group weight range as MIN,MAX.
    #[arg(long, value_delimiter = ',', num_args = 2, default_value = "40,100")]
    pub inter: Vec<f64>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub inter_edges: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub to: Format,
    #[arg(long)]
    pub output: PathBuf,
}

/// Validated settings shared by the solving commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverName,
    pub objective: Objective,
    pub trials: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub budget: u64,
}

impl RunConfig {
    fn new(
        solver: SolverName,
        objective: &ObjectiveArgs,
        trials: Option<usize>,
        seed: u64,
        max_iters: usize,
        budget: u64,
    ) -> Result<Self, CliError> {
        let objective = match (objective.objective, objective.bound) {
            (ObjectiveName::Avg, None) => Objective::AverageLatency,
            (ObjectiveName::Worst, None) => Objective::WorstLatency,
            (ObjectiveName::Coverage, Some(b)) => Objective::coverage(b)?,
            (ObjectiveName::Coverage, None) => {
                return Err(CliError::Validation("--objective coverage needs --bound".into()))
            }
            (_, Some(_)) => {
                return Err(CliError::Validation("--bound only applies to --objective coverage".into()))
            }
        };
        if matches!(solver, SolverName::Single | SolverName::Kmedoids)
            && objective != Objective::AverageLatency
        {
            return Err(CliError::Validation(format!(
                "solver {solver:?} optimizes average latency only"
            )));
        }
        if trials.is_some() && solver != SolverName::Random {
            return Err(CliError::Validation("--trials only applies to --solver random".into()));
        }
        let trials = trials.unwrap_or(100);
        if trials == 0 {
            return Err(CliError::Validation("--trials must be at least 1".into()));
        }
        if max_iters == 0 {
            return Err(CliError::Validation("--max-iters must be at least 1".into()));
        }
        Ok(RunConfig {
            solver,
            objective,
            trials,
            seed,
            max_iters,
            budget,
        })
    }

    /// Runs the configured solver. For the random baseline the best trial
    /// is returned together with the trial summary.
    fn solve(
        &self,
        dist: &DistanceMatrix,
        k: usize,
        seed: u64,
    ) -> Result<(SolveResult, Option<RandomSummary>), CliError> {
        let result = match self.solver {
            SolverName::Single => {
                if k != 1 {
                    return Err(CliError::Validation("--solver single places exactly one controller".into()));
                }
                solve_single_optimal(dist)
            }
            SolverName::Brute => solve_brute_force(dist, k, self.objective, self.budget)?,
            SolverName::Local => solve_local_search(dist, k, self.objective, seed, self.max_iters)?,
            SolverName::Kmedoids => solve_kmedoids(dist, k, seed, self.max_iters)?,
            SolverName::Random => {
                let baseline = solve_random_baseline(dist, k, self.objective, self.trials, seed)?;
                let summary = RandomSummary {
                    trials: baseline.trials.len(),
                    mean: baseline.mean,
                    min: baseline.min,
                    max: baseline.max,
                };
                let best = if self.objective.is_maximized() { baseline.max } else { baseline.min };
                let chosen = baseline
                    .trials
                    .into_iter()
                    .find(|t| t.objective_value == best)
                    .expect("extreme value comes from a trial");
                return Ok((chosen, Some(summary)));
            }
        };
        Ok((result, None))
    }

    fn sweep_solver(&self, fallback: bool) -> Result<SweepSolver, CliError> {
        Ok(match self.solver {
            SolverName::Single => {
                return Err(CliError::Validation("sweep needs a solver that accepts k".into()))
            }
            SolverName::Brute => SweepSolver::BruteForce {
                objective: self.objective,
                budget: self.budget,
                fallback_max_iters: fallback.then_some(self.max_iters),
            },
            SolverName::Local => SweepSolver::LocalSearch {
                objective: self.objective,
                max_iters: self.max_iters,
            },
            SolverName::Kmedoids => SweepSolver::KMedoids {
                max_iters: self.max_iters,
            },
            SolverName::Random => SweepSolver::Random {
                objective: self.objective,
                trials: self.trials,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSummary {
    pub trials: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub node: String,
    pub controller: String,
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub controller: String,
    pub followers: Vec<String>,
    /// Total delay from the followers to their controller.
    pub total_delay_to_neighbors: f64,
}

/// Contents of `solve.json`. Nodes are referred to by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub nodes: usize,
    pub solver: SolverKind,
    pub objective: Objective,
    pub seed: u64,
    pub k: usize,
    pub controllers: Vec<String>,
    pub objective_value: f64,
    pub total_delay: f64,
    pub avg_delay: f64,
    pub worst_delay: f64,
    pub evaluations: u64,
    pub iterations: u64,
    pub converged: bool,
    pub assignment: Vec<AssignmentRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clusters: Option<Vec<ClusterRow>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub random_trials: Option<RandomSummary>,
}

impl SolveReport {
    pub fn new(topology: &Topology, result: &SolveResult, seed: u64, random: Option<RandomSummary>) -> Self {
        let label = |v| topology.label(v).to_string();
        SolveReport {
            nodes: topology.node_count(),
            solver: result.solver,
            objective: result.objective,
            seed,
            k: result.placement.k(),
            controllers: result.placement.controllers().iter().map(|&c| label(c)).collect(),
            objective_value: result.objective_value,
            total_delay: result.total_delay,
            avg_delay: result.avg_delay,
            worst_delay: result.worst_delay,
            evaluations: result.evaluations,
            iterations: result.iterations,
            converged: result.converged,
            assignment: result
                .assignment
                .entries
                .iter()
                .enumerate()
                .map(|(v, s)| AssignmentRow {
                    node: label(v),
                    controller: label(s.controller),
                    delay: s.delay,
                })
                .collect(),
            clusters: result.clusters.as_ref().map(|clusters| {
                clusters
                    .iter()
                    .map(|c| ClusterRow {
                        controller: label(c.controller),
                        followers: c.followers.iter().map(|&v| label(v)).collect(),
                        total_delay_to_neighbors: c.total_delay,
                    })
                    .collect()
            }),
            random_trials: random,
        }
    }

    /// Resolves the controller labels back to a placement on `topology`.
    pub fn placement(&self, topology: &Topology) -> Result<Placement, CliError> {
        let ids = self
            .controllers
            .iter()
            .map(|l| {
                topology
                    .node_by_label(l)
                    .ok_or_else(|| CliError::Validation(format!("unknown controller {l:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Placement::new(ids, topology.node_count())?)
    }
}

/// Contents of `selection.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub curve: KCurve,
    pub selection: KSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReliabilityReport {
    #[serde(flatten)]
    report: TradeoffReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    weighted_scores: Option<Vec<Vec<f64>>>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load_topology(input: &InputArgs) -> Result<Topology, CliError> {
    let text = read_text(&input.input)?;
    let format = input.format.unwrap_or_else(|| {
        let is_json = input
            .input
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if is_json {
            Format::Json
        } else if first.trim().eq_ignore_ascii_case(EDGE_LIST_HEADER) {
            Format::Edgelist
        } else {
            Format::Adjacency
        }
    });
    Ok(match format {
        Format::Adjacency => load_adjacency_csv(&text)?,
        Format::Edgelist => load_edge_list(&text)?,
        Format::Json => Topology::from_json(&text)?,
    })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn cmd_solve(args: &SolveArgs) -> Result<SolveReport, CliError> {
    let config = RunConfig::new(
        args.solver,
        &args.objective,
        args.trials,
        args.seed,
        args.max_iters,
        args.budget,
    )?;
    let topology = load_topology(&args.input)?;
    let dist = DistanceMatrix::from_topology(&topology)?;
    let k = args.k.unwrap_or(1);
    let (result, random) = config.solve(&dist, k, derive_seed(config.seed, 0))?;
    let report = SolveReport::new(&topology, &result, config.seed, random);
    write_atomic(&args.out_dir.join("solve.json"), &to_json(&report))?;

    println!(
        "{:?}: controllers [{}], total delay {}, average delay {}, worst delay {}",
        result.solver,
        report.controllers.join(", "),
        report.total_delay,
        report.avg_delay,
        report.worst_delay
    );
    if let Some(clusters) = &report.clusters {
        for c in clusters {
            println!(
                "  {} <- [{}] total delay to neighbors {}",
                c.controller,
                c.followers.join(", "),
                c.total_delay_to_neighbors
            );
        }
    }
    Ok(report)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepReport, CliError> {
    let config = RunConfig::new(
        args.solver,
        &args.objective,
        args.trials,
        args.seed,
        args.max_iters,
        args.budget,
    )?;
    if !(args.tau > 0.0 && args.tau < 1.0) {
        return Err(CliError::Validation(format!("--tau must lie in (0, 1), got {}", args.tau)));
    }
    let topology = load_topology(&args.input)?;
    let dist = DistanceMatrix::from_topology(&topology)?;
    let solver = config.sweep_solver(args.fallback)?;
    let curve = sweep_k(&dist, args.k_max, &solver, config.seed)?;
    let selection = select_optimal_k(&curve, args.tau)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    write_atomic(&args.out_dir.join("curve.csv"), &curve.to_csv())?;
    let report = SweepReport { curve, selection };
    write_atomic(&args.out_dir.join("selection.json"), &to_json(&report))?;
    print!("{}", report.curve.to_csv());
    println!("chosen k = {} (tau = {})", report.selection.chosen_k, args.tau);
    Ok(report)
}

pub fn cmd_reliability(args: &ReliabilityArgs) -> Result<TradeoffReport, CliError> {
    let config = RunConfig::new(
        args.solver,
        &args.objective,
        args.trials,
        args.seed,
        args.max_iters,
        args.budget,
    )?;
    if !(0.0..=1.0).contains(&args.qs) {
        return Err(CliError::Validation(format!("--qs must lie in [0, 1], got {}", args.qs)));
    }
    let topology = load_topology(&args.input)?;
    let dist = DistanceMatrix::from_topology(&topology)?;

    let mut families = Vec::new();
    for kind in &args.scenarios {
        let family = match kind {
            ScenarioKind::SingleLink => ScenarioFamily {
                name: "single-link".into(),
                scenarios: single_link_scenarios(&topology, args.qs)?,
            },
            ScenarioKind::SingleNode => ScenarioFamily {
                name: "single-node".into(),
                scenarios: single_node_scenarios(&topology, args.qs)?,
            },
            ScenarioKind::File => {
                let path = args.scenario_file.as_ref().ok_or_else(|| {
                    CliError::Validation("--scenarios file needs --scenario-file".into())
                })?;
                ScenarioFamily {
                    name: "file".into(),
                    scenarios: parse_scenarios(&topology, &read_text(path)?, args.qs)?,
                }
            }
        };
        families.push(family);
    }
    if args.scenario_file.is_some() && !args.scenarios.contains(&ScenarioKind::File) {
        return Err(CliError::Validation("--scenario-file needs --scenarios file".into()));
    }

    let mut placements = Vec::new();
    for &k in &args.k {
        let (result, _) = config.solve(&dist, k, derive_seed(config.seed, k as u64))?;
        placements.push(result.placement);
    }
    let report = evaluate_tradeoff_families(&topology, &placements, &families)?;
    let weighted_scores = match args.weighted_sum {
        Some(w) => Some(
            (0..families.len())
                .map(|f| report.weighted_scores(f, w))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    write_atomic(&args.out_dir.join("tradeoff.csv"), &report.to_csv(&topology))?;
    let full = ReliabilityReport {
        report,
        weighted_scores,
    };
    write_atomic(&args.out_dir.join("tradeoff.json"), &to_json(&full))?;
    print!("{}", full.report.to_csv(&topology));
    Ok(full.report)
}

pub fn cmd_gen_example(args: &GenExampleArgs) -> Result<(), CliError> {
    let defaults = ClusteredTopologySpec::default();
    let spec = ClusteredTopologySpec {
        cluster_sizes: args.sizes.clone(),
        intra_weight_range: WeightRange::new(args.intra[0], args.intra[1]),
        inter_weight_range: WeightRange::new(args.inter[0], args.inter[1]),
        intra_density: args.density.unwrap_or(defaults.intra_density),
        inter_edges_per_cluster_pair: args
            .inter_edges
            .unwrap_or(defaults.inter_edges_per_cluster_pair),
        seed: args.seed,
    };
    let generated = generate_clustered(&spec)?;
    write_atomic(&args.out_dir.join("topology.csv"), &generated.topology.to_edge_list_csv())?;
    write_atomic(&args.out_dir.join("adjacency.csv"), &generated.topology.to_adjacency_csv())?;
    write_atomic(&args.out_dir.join("clusters.csv"), &generated.cluster_labels_csv())?;
    println!(
        "{} nodes, {} links, {} groups -> {}",
        generated.topology.node_count(),
        generated.topology.edge_count(),
        generated.cluster_count(),
        args.out_dir.display()
    );
    Ok(())
}

pub fn cmd_convert(args: &ConvertArgs) -> Result<(), CliError> {
    let topology = load_topology(&args.input)?;
    let text = match args.to {
        Format::Adjacency => topology.to_adjacency_csv(),
        Format::Edgelist => topology.to_edge_list_csv(),
        Format::Json => {
            let mut s = topology.to_json();
            s.push('\n');
            s
        }
    };
    write_atomic(&args.output, &text)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(a).map(|_| ()),
        Command::Reliability(a) => cmd_reliability(a).map(|_| ()),
        Command::GenExample(a) => cmd_gen_example(a),
        Command::Convert(a) => cmd_convert(a),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::VALIDATION } else { exit::OK };
        }
    };
    match run(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_inconsistent_flags() {
        let avg = ObjectiveArgs { objective: ObjectiveName::Avg, bound: None };
        assert!(matches!(
            RunConfig::new(SolverName::Brute, &avg, Some(5), 0, 10, 10),
            Err(CliError::Validation(_))
        ));
        let cov = ObjectiveArgs { objective: ObjectiveName::Coverage, bound: None };
        assert!(RunConfig::new(SolverName::Brute, &cov, None, 0, 10, 10).is_err());
        let bound_on_avg = ObjectiveArgs { objective: ObjectiveName::Avg, bound: Some(1.0) };
        assert!(RunConfig::new(SolverName::Brute, &bound_on_avg, None, 0, 10, 10).is_err());
        let worst = ObjectiveArgs { objective: ObjectiveName::Worst, bound: None };
        assert!(RunConfig::new(SolverName::Kmedoids, &worst, None, 0, 10, 10).is_err());
        let ok = RunConfig::new(SolverName::Random, &avg, Some(3), 0, 10, 10).unwrap();
        assert_eq!(ok.trials, 3);
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(CliError::from(MetricsError::Disconnected { from: 0, unreachable: 1 }).exit_code(), 3);
        assert_eq!(
            CliError::from(SolveError::BudgetExceeded { combinations: 9, budget: 1 }).exit_code(),
            3
        );
        assert_eq!(CliError::from(SolveError::InvalidK { k: 9, n: 1 }).exit_code(), 2);
        assert_eq!(CliError::from(TopologyError::DuplicateLabel("a".into())).exit_code(), 2);
        assert_eq!(CliError::Io("x".into()).exit_code(), 1);
    }
}
