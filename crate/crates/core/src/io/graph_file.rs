//! JSON graph files.
//!
//! ```json
//! {
//!   "name": "ethanol",
//!   "node_label": {"kind": "categorical"},
//!   "edge_label": {"kind": "vector", "dim": 1},
//!   "nodes": [{"id": 0, "label": 6}, {"id": 1, "label": 8, "pos": [0.0, 1.4, 0.0]}],
//!   "edges": [{"i": 0, "j": 1, "w": 1.0, "label": [1.43]}],
//!   "start_prob": [0.5, 0.5],
//!   "stop_prob": [0.05, 0.05]
//! }
//! ```
//!
//! Categorical labels are JSON integers, vector labels JSON arrays. Node ids
//! must be exactly `0..n` in any order. `node_label`, `edge_label`, labels,
//! `pos`, `w` (default 1), `start_prob` (default uniform) and `stop_prob`
//! (default a caller-supplied constant) are optional. Floats are written in
//! shortest round-trip form, so save followed by load is exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Label, LabelShape, LabeledGraph, DEFAULT_STOP_PROB};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LabelDecl {
    Categorical,
    Vector { dim: usize },
}

impl From<LabelShape> for LabelDecl {
    fn from(s: LabelShape) -> Self {
        match s {
            LabelShape::Categorical => LabelDecl::Categorical,
            LabelShape::Vector(dim) => LabelDecl::Vector { dim },
        }
    }
}

impl From<LabelDecl> for LabelShape {
    fn from(d: LabelDecl) -> Self {
        match d {
            LabelDecl::Categorical => LabelShape::Categorical,
            LabelDecl::Vector { dim } => LabelShape::Vector(dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum LabelValue {
    Cat(i64),
    Vector(Vec<f64>),
}

impl From<&Label> for LabelValue {
    fn from(l: &Label) -> Self {
        match l {
            Label::Cat(c) => LabelValue::Cat(*c),
            Label::Vector(v) => LabelValue::Vector(v.to_vec()),
        }
    }
}

impl From<LabelValue> for Label {
    fn from(v: LabelValue) -> Self {
        match v {
            LabelValue::Cat(c) => Label::Cat(c),
            LabelValue::Vector(v) => Label::vector(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<LabelValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<Vec<f64>>,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    i: usize,
    j: usize,
    #[serde(default = "unit_weight")]
    w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<LabelValue>,
}

/// On-disk mirror of a [`LabeledGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_label: Option<LabelDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_label: Option<LabelDecl>,
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start_prob: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop_prob: Option<Vec<f64>>,
}

fn check_shape(
    decl: &mut Option<LabelShape>,
    label: &LabelValue,
    at: impl Fn() -> String,
) -> std::result::Result<(), String> {
    let shape = match label {
        LabelValue::Cat(_) => LabelShape::Categorical,
        LabelValue::Vector(v) => LabelShape::Vector(v.len()),
    };
    match decl {
        None => *decl = Some(shape),
        Some(d) if *d != shape => {
            return Err(format!("{}: label is {shape}, declared {d}", at()));
        }
        _ => {}
    }
    Ok(())
}

impl GraphFile {
    pub fn from_graph(g: &LabeledGraph, name: &str) -> Self {
        let nodes = (0..g.node_count())
            .map(|k| NodeRecord {
                id: k,
                label: g.node_labels.as_ref().map(|l| (&l[k]).into()),
                pos: g.positions.as_ref().map(|p| p[k].clone()),
            })
            .collect();
        let edges = g
            .edges
            .iter()
            .map(|e| EdgeRecord {
                i: e.i,
                j: e.j,
                w: e.weight,
                label: e.label.as_ref().map(Into::into),
            })
            .collect();
        GraphFile {
            name: name.to_string(),
            node_label: g.node_label_shape().map(Into::into),
            edge_label: g.edge_label_shape().map(Into::into),
            nodes,
            edges,
            start_prob: Some(g.start_prob.clone()),
            stop_prob: Some(g.stop_prob.clone()),
        }
    }

    /// Build the graph, filling a missing `stop_prob` with `default_stop`.
    /// Structural errors name the offending field.
    pub fn into_graph(self, default_stop: f64) -> std::result::Result<LabeledGraph, String> {
        let n = self.nodes.len();
        let mut slot: Vec<Option<NodeRecord>> = vec![None; n];
        for (k, node) in self.nodes.into_iter().enumerate() {
            if node.id >= n {
                return Err(format!("nodes[{k}].id: id {} outside 0..{n}", node.id));
            }
            let id = node.id;
            if slot[id].is_some() {
                return Err(format!("nodes[{k}].id: duplicate id {id}"));
            }
            slot[id] = Some(node);
        }
        let nodes: Vec<NodeRecord> = slot.into_iter().map(|s| s.expect("ids are dense")).collect();

        let mut node_shape = self.node_label.map(LabelShape::from);
        let labeled = nodes.iter().filter(|r| r.label.is_some()).count();
        let node_labels = if labeled == 0 {
            if node_shape.is_some() && n > 0 {
                return Err("nodes: label shape declared but no node carries a label".into());
            }
            None
        } else if labeled < n {
            let k = nodes.iter().position(|r| r.label.is_none()).unwrap_or(0);
            return Err(format!("nodes[id={k}].label: missing while other nodes are labeled"));
        } else {
            let mut out = Vec::with_capacity(n);
            for r in &nodes {
                let l = r.label.clone().expect("all labeled");
                check_shape(&mut node_shape, &l, || format!("nodes[id={}].label", r.id))?;
                out.push(l.into());
            }
            Some(out)
        };

        let with_pos = nodes.iter().filter(|r| r.pos.is_some()).count();
        let positions = if with_pos == 0 {
            None
        } else if with_pos < n {
            return Err("nodes: `pos` must be given for every node or none".into());
        } else {
            Some(nodes.into_iter().map(|r| r.pos.expect("all positioned")).collect())
        };

        let mut edge_shape = self.edge_label.map(LabelShape::from);
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, e) in self.edges.into_iter().enumerate() {
            for (field, id) in [("i", e.i), ("j", e.j)] {
                if id >= n {
                    return Err(format!("edges[{k}].{field}: unknown node id {id}"));
                }
            }
            if let Some(l) = &e.label {
                check_shape(&mut edge_shape, l, || format!("edges[{k}].label"))?;
            }
            edges.push(Edge {
                i: e.i,
                j: e.j,
                weight: e.w,
                label: e.label.map(Into::into),
            });
        }

        let start_prob = match self.start_prob {
            Some(p) if p.len() != n => {
                return Err(format!("start_prob: {} entries for {n} nodes", p.len()));
            }
            Some(p) => p,
            None => vec![if n == 0 { 0.0 } else { 1.0 / n as f64 }; n],
        };
        let stop_prob = match self.stop_prob {
            Some(q) if q.len() != n => {
                return Err(format!("stop_prob: {} entries for {n} nodes", q.len()));
            }
            Some(q) => q,
            None => vec![default_stop; n],
        };
        Ok(LabeledGraph {
            node_labels,
            start_prob,
            stop_prob,
            edges,
            positions,
        })
    }
}

pub fn graph_to_json(g: &LabeledGraph, name: &str) -> String {
    serde_json::to_string_pretty(&GraphFile::from_graph(g, name)).expect("graph serializes")
}

/// Parse and validate a graph from JSON text. `origin` names the source in
/// error messages.
pub fn graph_from_json(text: &str, origin: &Path, default_stop: f64) -> Result<LabeledGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
    let g = file
        .into_graph(default_stop)
        .map_err(|m| Error::parse(origin, m))?;
    g.ensure_valid()?;
    Ok(g)
}

pub fn load_graph(path: &Path) -> Result<LabeledGraph> {
    load_graph_with(path, DEFAULT_STOP_PROB)
}

/// Load a graph file; `default_stop` fills a missing `stop_prob`.
pub fn load_graph_with(path: &Path, default_stop: f64) -> Result<LabeledGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    graph_from_json(&text, path, default_stop)
}

/// Write `g` as JSON, named after the file stem.
pub fn save_graph(g: &LabeledGraph, path: &Path) -> Result<()> {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    fs::write(path, graph_to_json(g, name)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledGraph> {
        graph_from_json(text, Path::new("t.json"), DEFAULT_STOP_PROB)
    }

    #[test]
    fn minimal_file() {
        let g = parse(r#"{"nodes": [{"id": 0}]}"#).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.start_prob, vec![1.0]);
        assert_eq!(g.stop_prob, vec![DEFAULT_STOP_PROB]);
    }

    #[test]
    fn unknown_node_id() {
        let err = parse(
            r#"{"nodes": [{"id": 0}, {"id": 1}, {"id": 2}],
                "edges": [{"i": 0, "j": 1}, {"i": 2, "j": 99}]}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("unknown node id"), "{err}");
        assert!(err.contains("edges[1].j"), "{err}");
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse("{\n\"nodes\": [\n{\"id\": 0,}]}").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn declared_shape_is_checked() {
        let err = parse(
            r#"{"node_label": {"kind": "vector", "dim": 2},
                "nodes": [{"id": 0, "label": [1.0, 2.0]}, {"id": 1, "label": [1.0]}]}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("nodes[id=1].label"), "{err}");
        assert!(parse(r#"{"nodes": [{"id": 0}, {"id": 0}]}"#).is_err());
    }

    #[test]
    fn invariant_violations_surface() {
        let err = parse(r#"{"nodes": [{"id": 0}, {"id": 1}], "edges": [{"i": 0, "j": 1, "w": -1}]}"#);
        assert!(matches!(err, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn round_trip_is_exact() {
        let mut g = LabeledGraph::with_stop_prob(3, 0.1 + 0.2);
        g.set_node_labels(vec![Label::Cat(-3), Label::Cat(7), Label::Cat(7)]);
        g.add_labeled_edge(0, 1, 1.0 / 3.0, Label::vector(vec![0.1, 1e-300]))
            .add_labeled_edge(2, 1, std::f64::consts::PI, Label::vector(vec![-2.5, 3.0]));
        g.start_prob = vec![0.2, 0.3, 0.5];
        g.positions = Some(vec![vec![0.0, 1.0], vec![2.0, 1.0 / 7.0], vec![3.0, 4.0]]);
        let back = parse(&graph_to_json(&g, "x")).unwrap();
        assert_eq!(back, g);
    }
}
