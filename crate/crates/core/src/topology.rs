//! Network graph model and its on-disk formats.
//!
//! A [`Topology`] is an undirected graph with strictly positive latency
//! weights. Node ids are dense (`0..n`) and every node carries a unique
//! label. Edges are stored once per unordered pair with `u < v`, sorted by
//! `(u, v)`; the position of an edge in that order is its [`LinkId`].
//!
//! Three formats are supported:
//!
//! * edge-list CSV (`source,target,weight`), the canonical on-disk form,
//! * adjacency-matrix CSV with an optional label header (Gephi export),
//! * a JSON document `{"nodes":[{"id","label"}],"edges":[{"u","v","weight"}]}`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node index.
pub type NodeId = usize;

/// Index of an edge in the topology's sorted edge list.
pub type LinkId = usize;

/// Absolute tolerance used when checking adjacency matrices for symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Header line of the edge-list format.
pub const EDGE_LIST_HEADER: &str = "source,target,weight";

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("matrix is not square: row {row} has {found} cells, expected {expected}")]
    NotSquare {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("asymmetric entry at row {row}, column {col}: {value} vs {mirror}")]
    Asymmetric {
        row: usize,
        col: usize,
        value: f64,
        mirror: f64,
    },
    #[error("negative weight {value} at row {row}, column {col}")]
    NegativeWeight { row: usize, col: usize, value: f64 },
    #[error("unparseable cell {cell:?} at row {row}, column {col}")]
    Unparseable { row: usize, col: usize, cell: String },
    #[error("self-loop on diagonal at row {row}: weight {value}")]
    DiagonalWeight { row: usize, value: f64 },
    #[error("line {line}: malformed edge {text:?} (expected source,target,weight)")]
    MalformedLine { line: usize, text: String },
    #[error("line {line}: non-positive weight {weight}")]
    NonPositiveWeight { line: usize, weight: f64 },
    #[error("line {line}: duplicate edge between {a:?} and {b:?}")]
    DuplicateEdge { line: usize, a: String, b: String },
    #[error("line {line}: self-loop on {label:?}")]
    SelfLoop { line: usize, label: String },
    #[error("duplicate node label {0:?}")]
    DuplicateLabel(String),
    #[error("node ids must be dense 0..n, found id {found} at position {position}")]
    NonDenseIds { position: usize, found: usize },
    #[error("edge ({u}, {v}) is invalid: {reason}")]
    InvalidEdge { u: NodeId, v: NodeId, reason: String },
    #[error("invalid cluster spec: {0}")]
    InvalidSpec(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<csv::Error> for TopologyError {
    fn from(e: csv::Error) -> Self {
        TopologyError::Csv(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
}

/// Undirected link, always stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, x: NodeId) -> NodeId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Immutable weighted undirected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    // (neighbor, link) pairs sorted by neighbor id
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
}

#[derive(Serialize, Deserialize)]
struct TopologyDoc {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl Topology {
    /// Builds a topology from labels (ids are positions) and edges.
    ///
    /// Edges may be given in either orientation; they are normalized to
    /// `u < v` and sorted.
    pub fn new(labels: Vec<String>, edges: Vec<Edge>) -> Result<Self, TopologyError> {
        let n = labels.len();
        let mut seen = HashMap::with_capacity(n);
        for label in &labels {
            if seen.insert(label.as_str(), ()).is_some() {
                return Err(TopologyError::DuplicateLabel(label.clone()));
            }
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let reason = if e.u >= n || e.v >= n {
                Some(format!("endpoint out of range for {n} nodes"))
            } else if e.u == e.v {
                Some("self-loop".to_string())
            } else if !(e.weight.is_finite() && e.weight > 0.0) {
                Some(format!("weight {} is not strictly positive", e.weight))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(TopologyError::InvalidEdge { u: e.u, v: e.v, reason });
            }
            let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            normalized.push(Edge { u, v, weight: e.weight });
        }
        normalized.sort_by_key(|e| (e.u, e.v));
        for w in normalized.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                return Err(TopologyError::InvalidEdge {
                    u: w[0].u,
                    v: w[0].v,
                    reason: "duplicate unordered pair".to_string(),
                });
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (id, e) in normalized.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let nodes = labels
            .into_iter()
            .enumerate()
            .map(|(id, label)| Node { id, label })
            .collect();
        Ok(Topology {
            nodes,
            edges: normalized,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, link: LinkId) -> &Edge {
        &self.edges[link]
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id].label
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.label == label)
    }

    /// Neighbors of `x` as `(neighbor, link)` pairs in ascending neighbor order.
    pub fn neighbors(&self, x: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[x]
    }

    /// Looks up the link joining `a` and `b`.
    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&(u, v)))
            .ok()
    }

    /// True iff the graph is a single connected component.
    ///
    /// The empty graph is not considered connected.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }

    /// Relabels nodes so that ids follow ascending label order.
    ///
    /// Two topologies describing the same labelled graph have equal
    /// canonical forms regardless of the order they were loaded in.
    pub fn canonicalize(&self) -> Topology {
        let mut order: Vec<NodeId> = (0..self.node_count()).collect();
        order.sort_by(|&a, &b| self.label(a).cmp(self.label(b)));
        let mut new_id = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }
        let labels = order.iter().map(|&old| self.label(old).to_string()).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                u: new_id[e.u],
                v: new_id[e.v],
                weight: e.weight,
            })
            .collect();
        Topology::new(labels, edges).expect("relabelling preserves validity")
    }

    pub fn to_json(&self) -> String {
        let doc = TopologyDoc {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("topology serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        let doc: TopologyDoc =
            serde_json::from_str(text).map_err(|e| TopologyError::Json(e.to_string()))?;
        for (position, node) in doc.nodes.iter().enumerate() {
            if node.id != position {
                return Err(TopologyError::NonDenseIds {
                    position,
                    found: node.id,
                });
            }
        }
        Topology::new(doc.nodes.into_iter().map(|n| n.label).collect(), doc.edges)
    }

    /// Edge-list CSV. Nodes without any edge are written as `label,,`.
    pub fn to_edge_list_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(EDGE_LIST_HEADER);
        out.push('\n');
        let mut isolated = Vec::new();
        for x in 0..self.node_count() {
            if self.neighbors(x).is_empty() {
                isolated.push(x);
            }
        }
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for x in isolated {
            wtr.write_record([self.label(x), "", ""]).expect("in-memory write");
        }
        for e in &self.edges {
            wtr.write_record([self.label(e.u), self.label(e.v), &fmt_weight(e.weight)])
                .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8"));
        out
    }

    /// Adjacency-matrix CSV with a label header row and label column.
    pub fn to_adjacency_csv(&self) -> String {
        let n = self.node_count();
        let mut matrix = vec![vec![0.0; n]; n];
        for e in &self.edges {
            matrix[e.u][e.v] = e.weight;
            matrix[e.v][e.u] = e.weight;
        }
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.nodes.iter().map(|n| n.label.clone()));
        wtr.write_record(&header).expect("in-memory write");
        for (i, row) in matrix.iter().enumerate() {
            let mut record = vec![self.label(i).to_string()];
            record.extend(row.iter().map(|&w| fmt_weight(w)));
            wtr.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt_weight(w: f64) -> String {
    let mut s = String::new();
    write!(s, "{w}").unwrap();
    s
}

fn read_records(text: &str) -> Result<Vec<Vec<String>>, TopologyError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row: Vec<String> = record.iter().map(str::to_string).collect();
        if row.iter().all(String::is_empty) {
            continue;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64, TopologyError> {
    if cell.is_empty() {
        return Ok(0.0);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(TopologyError::Unparseable {
            row,
            col,
            cell: cell.to_string(),
        }),
    }
}

/// Parses an adjacency-matrix CSV.
///
/// A first row containing any non-numeric cell is a label header; the first
/// column of every following row then holds row labels and is skipped.
/// Empty and zero cells mean "no edge". Row/column numbers in errors are
/// 1-based positions in the file.
pub fn load_adjacency_csv(text: &str) -> Result<Topology, TopologyError> {
    let rows = read_records(text)?;
    if rows.is_empty() {
        return Topology::new(Vec::new(), Vec::new());
    }
    let has_header = rows[0]
        .iter()
        .any(|c| !c.is_empty() && c.parse::<f64>().is_err());
    let (labels, body, col_offset, row_offset) = if has_header {
        let labels: Vec<String> = rows[0][1..].to_vec();
        (Some(labels), &rows[1..], 1, 1)
    } else {
        (None, &rows[..], 0, 0)
    };
    let n = match &labels {
        Some(l) => l.len(),
        None => body.len(),
    };
    if body.len() != n {
        return Err(TopologyError::NotSquare {
            row: row_offset + body.len() + 1,
            found: body.len(),
            expected: n,
        });
    }
    let mut matrix = vec![vec![0.0; n]; n];
    for (i, row) in body.iter().enumerate() {
        let cells = &row[col_offset.min(row.len())..];
        if cells.len() != n {
            return Err(TopologyError::NotSquare {
                row: i + row_offset + 1,
                found: cells.len(),
                expected: n,
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let value = parse_cell(cell, i + row_offset + 1, j + col_offset + 1)?;
            if value < 0.0 {
                return Err(TopologyError::NegativeWeight {
                    row: i + row_offset + 1,
                    col: j + col_offset + 1,
                    value,
                });
            }
            matrix[i][j] = value;
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        if matrix[i][i] != 0.0 {
            return Err(TopologyError::DiagonalWeight {
                row: i + row_offset + 1,
                value: matrix[i][i],
            });
        }
        for j in (i + 1)..n {
            if (matrix[i][j] - matrix[j][i]).abs() > SYMMETRY_TOLERANCE {
                return Err(TopologyError::Asymmetric {
                    row: i + row_offset + 1,
                    col: j + col_offset + 1,
                    value: matrix[i][j],
                    mirror: matrix[j][i],
                });
            }
            if matrix[i][j] > 0.0 {
                edges.push(Edge {
                    u: i,
                    v: j,
                    weight: matrix[i][j],
                });
            }
        }
    }
    let labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("n{i}")).collect());
    Topology::new(labels, edges)
}

/// Parses an edge-list CSV (`source,target,weight` per line).
///
/// The header line is optional. Labels are registered in order of first
/// appearance. Any repeated unordered pair is rejected, whatever its weight.
/// A line `label,,` declares a node with no edges.
pub fn load_edge_list(text: &str) -> Result<Topology, TopologyError> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut edges = Vec::new();

    let mut intern = |label: &str, labels: &mut Vec<String>| -> NodeId {
        if let Some(&id) = index.get(label) {
            return id;
        }
        let id = labels.len();
        labels.push(label.to_string());
        index.insert(label.to_string(), id);
        id
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        let fields: Vec<&str> = record.iter().collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let malformed = || TopologyError::MalformedLine {
            line,
            text: fields.join(","),
        };
        if idx == 0 && fields.len() == 3 && fields.join(",").eq_ignore_ascii_case(EDGE_LIST_HEADER)
        {
            continue;
        }
        match fields.as_slice() {
            [a, b, w] if !a.is_empty() && b.is_empty() && w.is_empty() => {
                intern(a, &mut labels);
            }
            [a, b, w] if !a.is_empty() && !b.is_empty() => {
                let weight: f64 = w.parse().map_err(|_| malformed())?;
                if !(weight.is_finite() && weight > 0.0) {
                    return Err(TopologyError::NonPositiveWeight { line, weight });
                }
                if a == b {
                    return Err(TopologyError::SelfLoop {
                        line,
                        label: a.to_string(),
                    });
                }
                let u = intern(a, &mut labels);
                let v = intern(b, &mut labels);
                let key = (u.min(v), u.max(v));
                if !pairs.insert(key) {
                    return Err(TopologyError::DuplicateEdge {
                        line,
                        a: a.to_string(),
                        b: b.to_string(),
                    });
                }
                edges.push(Edge { u, v, weight });
            }
            _ => return Err(malformed()),
        }
    }
    Topology::new(labels, edges)
}

/// Inclusive latency range for generated links. Generated weights are
/// integers within the range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRange {
    pub min: f64,
    pub max: f64,
}

impl WeightRange {
    pub fn new(min: f64, max: f64) -> Self {
        WeightRange { min, max }
    }

    fn integer_bounds(&self) -> Option<(u64, u64)> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min <= 0.0 {
            return None;
        }
        let lo = self.min.ceil().max(1.0);
        let hi = self.max.floor();
        (lo <= hi).then_some((lo as u64, hi as u64))
    }
}

/// Parameters of a multi-group network where links inside a group are
/// cheaper than links between groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteredTopologySpec {
    pub cluster_sizes: Vec<usize>,
    pub intra_weight_range: WeightRange,
    pub inter_weight_range: WeightRange,
    /// Probability of each intra-group pair being linked, on top of the
    /// random spanning tree that keeps every group connected.
    pub intra_density: f64,
    pub inter_edges_per_cluster_pair: usize,
    pub seed: u64,
}

impl Default for ClusteredTopologySpec {
    /// The bundled 23-node, four-group example network.
    fn default() -> Self {
        ClusteredTopologySpec {
            cluster_sizes: vec![6, 6, 6, 5],
            intra_weight_range: WeightRange::new(1.0, 30.0),
            inter_weight_range: WeightRange::new(40.0, 100.0),
            intra_density: 0.15,
            inter_edges_per_cluster_pair: 1,
            seed: 42,
        }
    }
}

/// Generated topology together with its ground-truth group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredTopology {
    pub topology: Topology,
    /// Group index of every node.
    pub cluster_of: Vec<usize>,
}

impl ClusteredTopology {
    pub fn cluster_count(&self) -> usize {
        self.cluster_of.iter().max().map_or(0, |&c| c + 1)
    }

    /// `label,cluster` CSV sidecar.
    pub fn cluster_labels_csv(&self) -> String {
        let mut out = String::from("label,cluster\n");
        for (id, c) in self.cluster_of.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.topology.label(id), c);
        }
        out
    }
}

/// Generates a seeded clustered topology.
///
/// Each group gets a random spanning tree plus extra links with probability
/// `intra_density`; every pair of groups is joined by
/// `inter_edges_per_cluster_pair` distinct links. Nodes are labelled `n<i>`
/// and numbered group by group.
pub fn generate_clustered(spec: &ClusteredTopologySpec) -> Result<ClusteredTopology, TopologyError> {
    let invalid = |msg: &str| Err(TopologyError::InvalidSpec(msg.to_string()));
    if spec.cluster_sizes.is_empty() {
        return invalid("cluster_sizes must be non-empty");
    }
    if spec.cluster_sizes.contains(&0) {
        return invalid("cluster sizes must be positive");
    }
    if !(spec.intra_density > 0.0 && spec.intra_density <= 1.0) {
        return invalid("intra_density must lie in (0, 1]");
    }
    let Some((intra_lo, intra_hi)) = spec.intra_weight_range.integer_bounds() else {
        return invalid("intra weight range must be positive and contain an integer");
    };
    let Some((inter_lo, inter_hi)) = spec.inter_weight_range.integer_bounds() else {
        return invalid("inter weight range must be positive and contain an integer");
    };
    if spec.intra_weight_range.max > spec.inter_weight_range.min {
        return invalid("intra-group weights must not exceed inter-group weights");
    }
    if spec.cluster_sizes.len() > 1 && spec.inter_edges_per_cluster_pair == 0 {
        return invalid("more than one group needs at least one inter-group link per pair");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut members: Vec<Vec<NodeId>> = Vec::new();
    let mut cluster_of = Vec::new();
    for (c, &size) in spec.cluster_sizes.iter().enumerate() {
        let start = cluster_of.len();
        members.push((start..start + size).collect());
        cluster_of.extend(std::iter::repeat_n(c, size));
    }
    let n = cluster_of.len();

    let mut pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut edges = Vec::new();
    let mut add = |a: NodeId, b: NodeId, weight: u64, edges: &mut Vec<Edge>| {
        let key = (a.min(b), a.max(b));
        if pairs.insert(key) {
            edges.push(Edge {
                u: key.0,
                v: key.1,
                weight: weight as f64,
            });
            true
        } else {
            false
        }
    };

    for group in &members {
        let mut order = group.clone();
        order.shuffle(&mut rng);
        for i in 1..order.len() {
            let parent = order[rng.gen_range(0..i)];
            let w = rng.gen_range(intra_lo..=intra_hi);
            add(order[i], parent, w, &mut edges);
        }
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                if rng.gen_bool(spec.intra_density) {
                    let w = rng.gen_range(intra_lo..=intra_hi);
                    add(a, b, w, &mut edges);
                }
            }
        }
    }

    for ca in 0..members.len() {
        for cb in (ca + 1)..members.len() {
            let capacity = members[ca].len() * members[cb].len();
            let target = spec.inter_edges_per_cluster_pair.min(capacity);
            let mut placed = 0;
            while placed < target {
                let a = *members[ca].choose(&mut rng).expect("non-empty group");
                let b = *members[cb].choose(&mut rng).expect("non-empty group");
                let w = rng.gen_range(inter_lo..=inter_hi);
                if add(a, b, w, &mut edges) {
                    placed += 1;
                }
            }
        }
    }

    let labels = (0..n).map(|i| format!("n{i}")).collect();
    let topology = Topology::new(labels, edges)?;
    debug_assert!(topology.is_connected());
    Ok(ClusteredTopology {
        topology,
        cluster_of,
    })
}

/// The bundled 23-node example network.
pub fn bundled_example() -> ClusteredTopology {
    generate_clustered(&ClusteredTopologySpec::default()).expect("default spec is feasible")
}

pub fn validate_connected(topology: &Topology) -> bool {
    topology.is_connected()
}
