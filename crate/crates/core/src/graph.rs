//! Labeled, weighted, undirected graphs and their random-walk quantities.
//!
//! A [`LabeledGraph`] stores each undirected edge once. Consumers that need
//! the symmetric adjacency expand it through [`LabeledGraph::symmetric_entries`]
//! or [`LabeledGraph::neighbors`].

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Stopping probability used when an input does not provide one.
pub const DEFAULT_STOP_PROB: f64 = 0.05;

/// Smallest stopping probability accepted by the generators and the CLI.
pub const MIN_STOP_PROB: f64 = 0.0005;

/// A node or edge label: either a categorical token or a real vector.
///
/// Scalars are vectors of dimension one.
#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Cat(i64),
    Vector(Box<[f64]>),
}

impl Label {
    pub fn scalar(x: f64) -> Self {
        Label::Vector(vec![x].into_boxed_slice())
    }

    pub fn vector(xs: impl Into<Vec<f64>>) -> Self {
        Label::Vector(xs.into().into_boxed_slice())
    }

    pub fn shape(&self) -> LabelShape {
        match self {
            Label::Cat(_) => LabelShape::Categorical,
            Label::Vector(v) => LabelShape::Vector(v.len()),
        }
    }

    /// Storage size in bytes, the `E` of the cost model for edge labels.
    pub fn byte_size(&self) -> usize {
        match self {
            Label::Cat(_) => std::mem::size_of::<i64>(),
            Label::Vector(v) => v.len() * std::mem::size_of::<f64>(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelShape {
    Categorical,
    Vector(usize),
}

impl fmt::Display for LabelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelShape::Categorical => write!(f, "categorical"),
            LabelShape::Vector(d) => write!(f, "vector[{d}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub label: Option<Label>,
}

/// An undirected graph with node labels, start/stop probabilities and
/// weighted, optionally labeled edges.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub node_labels: Option<Vec<Label>>,
    pub start_prob: Vec<f64>,
    pub stop_prob: Vec<f64>,
    pub edges: Vec<Edge>,
    /// Optional embedding coordinates, used by space-filling-curve orders.
    pub positions: Option<Vec<Vec<f64>>>,
}

impl LabeledGraph {
    /// Edgeless, unlabeled graph with uniform start probabilities and the
    /// default stopping probability.
    pub fn new(n: usize) -> Self {
        Self::with_stop_prob(n, DEFAULT_STOP_PROB)
    }

    pub fn with_stop_prob(n: usize, q: f64) -> Self {
        let p = if n == 0 { 0.0 } else { 1.0 / n as f64 };
        LabeledGraph {
            node_labels: None,
            start_prob: vec![p; n],
            stop_prob: vec![q; n],
            edges: Vec::new(),
            positions: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.start_prob.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn add_edge(&mut self, i: usize, j: usize, weight: f64) -> &mut Self {
        self.edges.push(Edge {
            i,
            j,
            weight,
            label: None,
        });
        self
    }

    pub fn add_labeled_edge(&mut self, i: usize, j: usize, weight: f64, label: Label) -> &mut Self {
        self.edges.push(Edge {
            i,
            j,
            weight,
            label: Some(label),
        });
        self
    }

    pub fn set_node_labels(&mut self, labels: Vec<Label>) -> &mut Self {
        self.node_labels = Some(labels);
        self
    }

    pub fn set_uniform_stop_prob(&mut self, q: f64) -> &mut Self {
        self.stop_prob.iter_mut().for_each(|x| *x = q);
        self
    }

    pub fn has_edge_labels(&self) -> bool {
        self.edges.first().is_some_and(|e| e.label.is_some())
    }

    pub fn node_label_shape(&self) -> Option<LabelShape> {
        self.node_labels.as_ref()?.first().map(Label::shape)
    }

    pub fn edge_label_shape(&self) -> Option<LabelShape> {
        self.edges.first()?.label.as_ref().map(Label::shape)
    }

    /// Every stored edge in both orientations: `(i, j, w, label)`.
    pub fn symmetric_entries(&self) -> impl Iterator<Item = (usize, usize, f64, Option<&Label>)> {
        self.edges.iter().flat_map(|e| {
            [
                (e.i, e.j, e.weight, e.label.as_ref()),
                (e.j, e.i, e.weight, e.label.as_ref()),
            ]
        })
    }

    /// Adjacency lists of neighbor indices, sorted ascending.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// `d_i = sum_j A_ij + q_i`.
    pub fn degree_vector(&self) -> Vec<f64> {
        degree_vector(self)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_graph(self)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(report))
        }
    }
}

/// A single broken invariant, naming the offending index.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    NodeOutOfRange { edge: usize, node: usize },
    SelfLoop { node: usize },
    NonPositiveWeight { edge: usize, weight: f64 },
    DuplicateEdge { i: usize, j: usize },
    NonPositiveStop { node: usize },
    StopAboveOne { node: usize },
    NegativeStart { node: usize },
    NonFinite { field: &'static str, index: usize },
    MixedEdgeLabels { edge: usize },
    InconsistentLabelShape { field: &'static str, index: usize },
    NonPositiveDegree { node: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph must have at least one node"),
            Violation::LengthMismatch {
                field,
                expected,
                found,
            } => write!(f, "{field} has length {found}, expected {expected}"),
            Violation::NodeOutOfRange { edge, node } => {
                write!(f, "edge {edge} references unknown node {node}")
            }
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::NonPositiveWeight { edge, weight } => {
                write!(f, "edge {edge} has non-positive weight {weight}")
            }
            Violation::DuplicateEdge { i, j } => write!(f, "duplicate edge ({i}, {j})"),
            Violation::NonPositiveStop { node } => {
                write!(f, "stopping probability must be > 0 at node {node}")
            }
            Violation::StopAboveOne { node } => {
                write!(f, "stopping probability must be <= 1 at node {node}")
            }
            Violation::NegativeStart { node } => {
                write!(f, "starting probability must be >= 0 at node {node}")
            }
            Violation::NonFinite { field, index } => write!(f, "{field}[{index}] is not finite"),
            Violation::MixedEdgeLabels { edge } => {
                write!(f, "edge {edge} breaks uniform edge-label presence")
            }
            Violation::InconsistentLabelShape { field, index } => {
                write!(f, "{field}[{index}] has a different label shape than the first entry")
            }
            Violation::NonPositiveDegree { node } => write!(f, "degree of node {node} is not positive"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check every structural and probabilistic precondition of a graph.
pub fn validate_graph(g: &LabeledGraph) -> ValidationReport {
    let mut out = Vec::new();
    let n = g.node_count();
    if n == 0 {
        out.push(Violation::Empty);
    }
    if g.stop_prob.len() != n {
        out.push(Violation::LengthMismatch {
            field: "stop_prob",
            expected: n,
            found: g.stop_prob.len(),
        });
    }
    if let Some(labels) = &g.node_labels {
        if labels.len() != n {
            out.push(Violation::LengthMismatch {
                field: "node_labels",
                expected: n,
                found: labels.len(),
            });
        }
        check_label_shapes("node_labels", labels.iter(), &mut out);
    }
    if let Some(pos) = &g.positions {
        if pos.len() != n {
            out.push(Violation::LengthMismatch {
                field: "positions",
                expected: n,
                found: pos.len(),
            });
        }
    }
    for (k, &p) in g.start_prob.iter().enumerate() {
        if !p.is_finite() {
            out.push(Violation::NonFinite {
                field: "start_prob",
                index: k,
            });
        } else if p < 0.0 {
            out.push(Violation::NegativeStart { node: k });
        }
    }
    for (k, &q) in g.stop_prob.iter().enumerate() {
        if !q.is_finite() {
            out.push(Violation::NonFinite {
                field: "stop_prob",
                index: k,
            });
        } else if q <= 0.0 {
            out.push(Violation::NonPositiveStop { node: k });
        } else if q > 1.0 {
            out.push(Violation::StopAboveOne { node: k });
        }
    }

    let labeled = g.has_edge_labels();
    let mut seen = HashSet::with_capacity(g.edges.len());
    for (k, e) in g.edges.iter().enumerate() {
        for node in [e.i, e.j] {
            if node >= n {
                out.push(Violation::NodeOutOfRange { edge: k, node });
            }
        }
        if e.i == e.j {
            out.push(Violation::SelfLoop { node: e.i });
        }
        if !e.weight.is_finite() {
            out.push(Violation::NonFinite {
                field: "edge weight",
                index: k,
            });
        } else if e.weight <= 0.0 {
            out.push(Violation::NonPositiveWeight {
                edge: k,
                weight: e.weight,
            });
        }
        if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
            out.push(Violation::DuplicateEdge {
                i: e.i.min(e.j),
                j: e.i.max(e.j),
            });
        }
        if e.label.is_some() != labeled {
            out.push(Violation::MixedEdgeLabels { edge: k });
        }
    }
    if labeled {
        check_label_shapes("edge labels", g.edges.iter().filter_map(|e| e.label.as_ref()), &mut out);
    }

    // Degrees can only fail when an earlier rule already failed, but report
    // them so that callers see the consequence.
    if g.stop_prob.len() == n && out.iter().all(|v| !matches!(v, Violation::NodeOutOfRange { .. })) {
        for (k, d) in degree_vector(g).into_iter().enumerate() {
            if !(d > 0.0) {
                out.push(Violation::NonPositiveDegree { node: k });
            }
        }
    }
    ValidationReport { violations: out }
}

fn check_label_shapes<'a>(
    field: &'static str,
    labels: impl Iterator<Item = &'a Label>,
    out: &mut Vec<Violation>,
) {
    let mut first = None;
    for (k, l) in labels.enumerate() {
        let s = l.shape();
        match first {
            None => first = Some(s),
            Some(f) if f != s => out.push(Violation::InconsistentLabelShape { field, index: k }),
            _ => {}
        }
    }
}

/// Check the dataset-wide label rules: label presence and shape must agree
/// across all graphs.
pub fn validate_dataset(graphs: &[LabeledGraph]) -> Result<()> {
    for g in graphs {
        g.ensure_valid()?;
    }
    let Some(first) = graphs.iter().find(|g| g.edge_count() > 0) else {
        return Ok(());
    };
    for (k, g) in graphs.iter().enumerate() {
        if g.node_label_shape() != graphs[0].node_label_shape() {
            return Err(Error::InvalidParameter(format!(
                "graph {k} node label shape differs from graph 0"
            )));
        }
        if g.edge_count() > 0 && g.edge_label_shape() != first.edge_label_shape() {
            return Err(Error::InvalidParameter(format!(
                "graph {k} edge label shape differs from the rest of the dataset"
            )));
        }
    }
    Ok(())
}

/// `d_i = sum_j w_ij + q_i` over the symmetric adjacency.
pub fn degree_vector(g: &LabeledGraph) -> Vec<f64> {
    let mut d = g.stop_prob.clone();
    for e in &g.edges {
        if e.i < d.len() && e.j < d.len() {
            d[e.i] += e.weight;
            d[e.j] += e.weight;
        }
    }
    d
}

/// Row-sparse view of `P = D^-1 A`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c == j)
            .map_or(0.0, |&(_, v)| v)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.rows.len();
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; n];
                for &(j, v) in row {
                    dense[j] += v;
                }
                dense
            })
            .collect()
    }
}

pub fn transition_matrix(g: &LabeledGraph) -> TransitionMatrix {
    let d = degree_vector(g);
    let mut rows = vec![Vec::new(); g.node_count()];
    for (i, j, w, _) in g.symmetric_entries() {
        rows[i].push((j, w / d[i]));
    }
    for row in &mut rows {
        row.sort_by_key(|&(j, _)| j);
    }
    TransitionMatrix { rows }
}
