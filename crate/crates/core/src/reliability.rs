//! Control-network failure analysis.
//!
//! The control network of a placement consists of one control path from
//! every non-controller switch to its controller plus a full mesh of paths
//! between controllers. Paths are shortest paths in the physical graph;
//! among equally short ones the lexicographically smallest node sequence
//! is used.
//!
//! A failure scenario names a set of failed physical elements and a
//! conditional failure probability `q_s`. A path that traverses a failed
//! element fails for certain; a path disjoint from the failed set fails
//! independently with probability `q_s`. The expected number of failed
//! paths is therefore `|hit| + q_s * |disjoint|`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{dijkstra, Assignment, DistanceMatrix, MetricsError, Placement};
use crate::topology::{LinkId, NodeId, Topology};

#[derive(Debug, Error, PartialEq)]
pub enum ReliabilityError {
    #[error("q_s must lie in [0, 1], got {0}")]
    InvalidQs(f64),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("no link between {0:?} and {1:?}")]
    UnknownLink(String, String),
    #[error("scenario file: {0}")]
    ScenarioFile(String),
    #[error("latency weight must lie in [0, 1], got {0}")]
    InvalidWeight(f64),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// A physical element that can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "lowercase")]
pub enum Element {
    Node(NodeId),
    Link(LinkId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPath {
    pub from: NodeId,
    pub to: NodeId,
    /// Traversed nodes including both endpoints.
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub latency: f64,
}

impl ControlPath {
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.nodes
            .iter()
            .map(|&v| Element::Node(v))
            .chain(self.links.iter().map(|&l| Element::Link(l)))
    }

    pub fn intersects(&self, failed: &BTreeSet<Element>) -> bool {
        self.elements().any(|e| failed.contains(&e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlNetwork {
    /// One path per non-controller switch, ascending by switch id.
    pub switch_paths: Vec<ControlPath>,
    /// One path per controller pair `(a, b)` with `a < b`, lexicographic.
    pub mesh_paths: Vec<ControlPath>,
}

impl ControlNetwork {
    /// Switch paths followed by mesh paths.
    pub fn paths(&self) -> impl Iterator<Item = &ControlPath> + '_ {
        self.switch_paths.iter().chain(self.mesh_paths.iter())
    }

    pub fn path_count(&self) -> usize {
        self.switch_paths.len() + self.mesh_paths.len()
    }
}

fn on_shortest_path(step: f64, rest: f64, total: f64) -> bool {
    (step + rest - total).abs() <= 1e-9 * total.max(1.0)
}

/// Lexicographically smallest shortest path from `from` to the node whose
/// distance vector is `to_dist`.
fn trace_path(topology: &Topology, from: NodeId, to: NodeId, to_dist: &[f64]) -> ControlPath {
    let mut nodes = vec![from];
    let mut links = Vec::new();
    let mut latency = 0.0;
    let mut cur = from;
    while cur != to {
        let &(next, link) = topology
            .neighbors(cur)
            .iter()
            .find(|&&(y, l)| {
                to_dist[y] < to_dist[cur]
                    && on_shortest_path(topology.edge(l).weight, to_dist[y], to_dist[cur])
            })
            .expect("connected graph has a shortest-path successor");
        latency += topology.edge(link).weight;
        nodes.push(next);
        links.push(link);
        cur = next;
    }
    ControlPath {
        from,
        to,
        nodes,
        links,
        latency,
    }
}

/// Builds the control network of `placement` served as in `assignment`.
pub fn build_control_network(
    topology: &Topology,
    placement: &Placement,
    assignment: &Assignment,
) -> ControlNetwork {
    let to_dist: Vec<Vec<f64>> = placement
        .controllers()
        .iter()
        .map(|&c| dijkstra(topology, c, &[], &[]))
        .collect();
    let slot = |c: NodeId| {
        placement
            .controllers()
            .binary_search(&c)
            .expect("assignment uses placement controllers")
    };
    let switch_paths = assignment
        .entries
        .iter()
        .enumerate()
        .filter(|(v, _)| !placement.contains(*v))
        .map(|(v, served)| {
            trace_path(topology, v, served.controller, &to_dist[slot(served.controller)])
        })
        .collect();
    let controllers = placement.controllers();
    let mut mesh_paths = Vec::new();
    for (i, &a) in controllers.iter().enumerate() {
        for (j, &b) in controllers.iter().enumerate().skip(i + 1) {
            mesh_paths.push(trace_path(topology, a, b, &to_dist[j]));
        }
    }
    ControlNetwork {
        switch_paths,
        mesh_paths,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureScenario {
    pub name: String,
    pub failed: BTreeSet<Element>,
    pub qs: f64,
}

impl FailureScenario {
    pub fn new(
        name: impl Into<String>,
        failed: impl IntoIterator<Item = Element>,
        qs: f64,
    ) -> Result<Self, ReliabilityError> {
        if !(0.0..=1.0).contains(&qs) {
            return Err(ReliabilityError::InvalidQs(qs));
        }
        Ok(FailureScenario {
            name: name.into(),
            failed: failed.into_iter().collect(),
            qs,
        })
    }

    /// Failed elements expanded so that every link incident to a failed
    /// node is failed as well.
    fn masks(&self, topology: &Topology) -> (Vec<bool>, Vec<bool>) {
        let mut nodes = vec![false; topology.node_count()];
        let mut links = vec![false; topology.edge_count()];
        for e in &self.failed {
            match *e {
                Element::Node(v) => {
                    nodes[v] = true;
                    for &(_, l) in topology.neighbors(v) {
                        links[l] = true;
                    }
                }
                Element::Link(l) => links[l] = true,
            }
        }
        (nodes, links)
    }
}

/// Indices into [`ControlNetwork::paths`] order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathClassification {
    pub hit: Vec<usize>,
    pub disjoint: Vec<usize>,
}

pub fn classify_paths(network: &ControlNetwork, scenario: &FailureScenario) -> PathClassification {
    let (hit, disjoint): (Vec<_>, Vec<_>) = network
        .paths()
        .enumerate()
        .partition(|(_, p)| p.intersects(&scenario.failed));
    PathClassification {
        hit: hit.into_iter().map(|(i, _)| i).collect(),
        disjoint: disjoint.into_iter().map(|(i, _)| i).collect(),
    }
}

/// `|hit| + q_s * |disjoint|`.
pub fn expected_failed_paths(network: &ControlNetwork, scenario: &FailureScenario) -> f64 {
    let c = classify_paths(network, scenario);
    c.hit.len() as f64 + scenario.qs * c.disjoint.len() as f64
}

/// Monte Carlo estimate of the expected failed-path count, for
/// cross-checking the closed form.
pub fn simulate_failed_paths(
    network: &ControlNetwork,
    scenario: &FailureScenario,
    samples: usize,
    seed: u64,
) -> f64 {
    let c = classify_paths(network, scenario);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0usize;
    for _ in 0..samples {
        total += c.hit.len();
        total += c.disjoint.iter().filter(|_| rng.gen_bool(scenario.qs)).count();
    }
    total as f64 / samples.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum NodeStatus {
    Served { controller: NodeId, delay: f64 },
    /// Survives but cannot reach any surviving controller.
    Disconnected,
    /// The node itself failed.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostFailureAssignment {
    pub status: Vec<NodeStatus>,
}

impl PostFailureAssignment {
    pub fn disconnected(&self) -> Vec<NodeId> {
        self.status
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, NodeStatus::Disconnected))
            .map(|(v, _)| v)
            .collect()
    }

    pub fn surviving_count(&self) -> usize {
        self.status
            .iter()
            .filter(|s| !matches!(s, NodeStatus::Failed))
            .count()
    }

    pub fn served_delays(&self) -> impl Iterator<Item = f64> + '_ {
        self.status.iter().filter_map(|s| match s {
            NodeStatus::Served { delay, .. } => Some(*delay),
            _ => None,
        })
    }
}

/// Reassigns every surviving switch to its nearest reachable surviving
/// controller after removing the failed elements (lowest controller id on
/// ties).
pub fn reroute_after_failure(
    topology: &Topology,
    placement: &Placement,
    scenario: &FailureScenario,
) -> PostFailureAssignment {
    let (failed_nodes, failed_links) = scenario.masks(topology);
    let reach: Vec<(NodeId, Vec<f64>)> = placement
        .controllers()
        .iter()
        .filter(|&&c| !failed_nodes[c])
        .map(|&c| (c, dijkstra(topology, c, &failed_nodes, &failed_links)))
        .collect();
    let status = (0..topology.node_count())
        .map(|v| {
            if failed_nodes[v] {
                return NodeStatus::Failed;
            }
            let mut best: Option<(NodeId, f64)> = None;
            for (c, d) in &reach {
                if d[v].is_finite() && best.is_none_or(|(_, bd)| d[v] < bd) {
                    best = Some((*c, d[v]));
                }
            }
            match best {
                Some((controller, delay)) => NodeStatus::Served { controller, delay },
                None => NodeStatus::Disconnected,
            }
        })
        .collect();
    PostFailureAssignment { status }
}

/// Every scenario failing exactly one link.
pub fn single_link_scenarios(topology: &Topology, qs: f64) -> Result<Vec<FailureScenario>, ReliabilityError> {
    topology
        .edges()
        .iter()
        .enumerate()
        .map(|(l, e)| {
            let name = format!("link:{}-{}", topology.label(e.u), topology.label(e.v));
            FailureScenario::new(name, [Element::Link(l)], qs)
        })
        .collect()
}

/// Every scenario failing exactly one node.
pub fn single_node_scenarios(topology: &Topology, qs: f64) -> Result<Vec<FailureScenario>, ReliabilityError> {
    (0..topology.node_count())
        .map(|v| FailureScenario::new(format!("node:{}", topology.label(v)), [Element::Node(v)], qs))
        .collect()
}

#[derive(Debug, Deserialize)]
struct ScenarioRecord {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    failed_nodes: Vec<String>,
    #[serde(default)]
    failed_links: Vec<(String, String)>,
    #[serde(default)]
    qs: Option<f64>,
}

/// Parses a JSON list of scenarios referring to nodes by label:
/// `[{"name": "...", "failed_nodes": ["a"], "failed_links": [["a","b"]], "qs": 0.1}]`.
/// Scenarios without `qs` use `default_qs`.
pub fn parse_scenarios(
    topology: &Topology,
    text: &str,
    default_qs: f64,
) -> Result<Vec<FailureScenario>, ReliabilityError> {
    let records: Vec<ScenarioRecord> =
        serde_json::from_str(text).map_err(|e| ReliabilityError::ScenarioFile(e.to_string()))?;
    let node = |label: &str| {
        topology
            .node_by_label(label)
            .ok_or_else(|| ReliabilityError::UnknownNode(label.to_string()))
    };
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut failed = Vec::new();
            for label in &r.failed_nodes {
                failed.push(Element::Node(node(label)?));
            }
            for (a, b) in &r.failed_links {
                let link = topology
                    .link_between(node(a)?, node(b)?)
                    .ok_or_else(|| ReliabilityError::UnknownLink(a.clone(), b.clone()))?;
                failed.push(Element::Link(link));
            }
            let name = r.name.unwrap_or_else(|| format!("scenario-{i}"));
            FailureScenario::new(name, failed, r.qs.unwrap_or(default_qs))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFamily {
    pub name: String,
    pub scenarios: Vec<FailureScenario>,
}

/// Reliability measures of one placement under one scenario family, each
/// averaged over the family's scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMetrics {
    pub family: String,
    pub scenario_count: usize,
    /// Expected failed control paths as a fraction of all control paths.
    pub expected_failed_fraction: f64,
    /// Surviving switches left without a controller, as a fraction of
    /// surviving switches.
    pub disconnected_fraction: f64,
    /// Mean delay of the switches still served after rerouting; `None` when
    /// no scenario leaves any switch served.
    pub post_failure_avg_latency: Option<f64>,
    /// Another placement is at least as good on average latency and both
    /// reliability fractions, and strictly better on one of them.
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementTradeoff {
    pub placement: Placement,
    pub k: usize,
    pub avg_latency: f64,
    pub worst_latency: f64,
    pub families: Vec<FamilyMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub placements: Vec<PlacementTradeoff>,
}

fn family_metrics(
    topology: &Topology,
    dist: &DistanceMatrix,
    placement: &Placement,
    family: &ScenarioFamily,
    baseline_avg: f64,
) -> FamilyMetrics {
    let assignment = crate::metrics::assign_nearest(dist, placement);
    let network = build_control_network(topology, placement, &assignment);
    let total_paths = network.path_count();
    let mut failed_sum = 0.0;
    let mut disconnected_sum = 0.0;
    let mut latency_sum = 0.0;
    let mut latency_count = 0usize;
    for scenario in &family.scenarios {
        if total_paths > 0 {
            failed_sum += expected_failed_paths(&network, scenario) / total_paths as f64;
        }
        let post = reroute_after_failure(topology, placement, scenario);
        let surviving = post.surviving_count();
        if surviving > 0 {
            disconnected_sum += post.disconnected().len() as f64 / surviving as f64;
        }
        let delays: Vec<f64> = post.served_delays().collect();
        if !delays.is_empty() {
            latency_sum += delays.iter().sum::<f64>() / delays.len() as f64;
            latency_count += 1;
        }
    }
    let count = family.scenarios.len();
    let mean = |sum: f64| if count == 0 { 0.0 } else { sum / count as f64 };
    let post_failure_avg_latency = if count == 0 {
        Some(baseline_avg)
    } else if latency_count == 0 {
        None
    } else {
        Some(latency_sum / latency_count as f64)
    };
    FamilyMetrics {
        family: family.name.clone(),
        scenario_count: count,
        expected_failed_fraction: mean(failed_sum),
        disconnected_fraction: mean(disconnected_sum),
        post_failure_avg_latency,
        dominated: false,
    }
}

/// Latency and reliability measures for each placement under each family.
pub fn evaluate_tradeoff_families(
    topology: &Topology,
    placements: &[Placement],
    families: &[ScenarioFamily],
) -> Result<TradeoffReport, ReliabilityError> {
    let dist = DistanceMatrix::from_topology(topology)?;
    let mut rows: Vec<PlacementTradeoff> = placements
        .iter()
        .map(|p| {
            let avg = crate::metrics::avg_latency(&dist, p);
            PlacementTradeoff {
                placement: p.clone(),
                k: p.k(),
                avg_latency: avg,
                worst_latency: crate::metrics::worst_latency(&dist, p),
                families: families
                    .iter()
                    .map(|f| family_metrics(topology, &dist, p, f, avg))
                    .collect(),
            }
        })
        .collect();

    let measures = |row: &PlacementTradeoff, f: usize| {
        let m = &row.families[f];
        [row.avg_latency, m.expected_failed_fraction, m.disconnected_fraction]
    };
    for f in 0..families.len() {
        let flags: Vec<bool> = (0..rows.len())
            .map(|b| {
                let mb = measures(&rows[b], f);
                rows.iter().enumerate().any(|(a, row)| {
                    let ma = measures(row, f);
                    a != b
                        && ma.iter().zip(&mb).all(|(x, y)| x <= y)
                        && ma.iter().zip(&mb).any(|(x, y)| x < y)
                })
            })
            .collect();
        for (row, flag) in rows.iter_mut().zip(flags) {
            row.families[f].dominated = flag;
        }
    }
    Ok(TradeoffReport { placements: rows })
}

/// Single-family form of [`evaluate_tradeoff_families`].
pub fn evaluate_tradeoff(
    topology: &Topology,
    placements: &[Placement],
    scenarios: &[FailureScenario],
) -> Result<TradeoffReport, ReliabilityError> {
    let family = ScenarioFamily {
        name: "scenarios".to_string(),
        scenarios: scenarios.to_vec(),
    };
    evaluate_tradeoff_families(topology, placements, &[family])
}

impl TradeoffReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per placement and scenario family.
    pub fn to_csv(&self, topology: &Topology) -> String {
        let mut out = String::from(
            "placement,k,family,scenarios,avg_latency,worst_latency,expected_failed_fraction,disconnected_fraction,post_failure_avg_latency,dominated\n",
        );
        for row in &self.placements {
            let labels: Vec<&str> = row
                .placement
                .controllers()
                .iter()
                .map(|&c| topology.label(c))
                .collect();
            for m in &row.families {
                let post = m.post_failure_avg_latency.map(|x| x.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    labels.join(" "),
                    row.k,
                    m.family,
                    m.scenario_count,
                    row.avg_latency,
                    row.worst_latency,
                    m.expected_failed_fraction,
                    m.disconnected_fraction,
                    post,
                    m.dominated
                );
            }
        }
        out
    }

    /// Scalarized trade-off per placement for family `family`:
    /// `w * avg_latency / max_avg_latency + (1 - w) * disconnected_fraction`.
    ///
    /// This weighting is an extrapolation for ranking convenience; the
    /// report itself stays multi-criteria.
    pub fn weighted_scores(&self, family: usize, latency_weight: f64) -> Result<Vec<f64>, ReliabilityError> {
        if !(0.0..=1.0).contains(&latency_weight) {
            return Err(ReliabilityError::InvalidWeight(latency_weight));
        }
        let max_avg = self
            .placements
            .iter()
            .map(|r| r.avg_latency)
            .fold(0.0, f64::max);
        Ok(self
            .placements
            .iter()
            .map(|r| {
                let lat = if max_avg > 0.0 { r.avg_latency / max_avg } else { 0.0 };
                latency_weight * lat + (1.0 - latency_weight) * r.families[family].disconnected_fraction
            })
            .collect())
    }
}
