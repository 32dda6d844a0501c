//! Plain `i j [w]` edge lists for unlabeled graphs.
//!
//! One edge per line, zero-based node ids, optional weight (default 1).
//! Blank lines and lines starting with `#` are skipped. The node count is
//! one more than the largest id.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

pub fn parse_edge_list(text: &str, origin: &Path, stop_prob: f64) -> Result<LabeledGraph> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| Error::parse(origin, format!("line {}: {msg}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(at(format!("expected `i j [w]`, found {} fields", fields.len())));
        }
        let id = |s: &str| s.parse::<usize>().map_err(|_| at(format!("bad node id `{s}`")));
        let (i, j) = (id(fields[0])?, id(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| at(format!("bad weight `{s}`")))?,
            None => 1.0,
        };
        n = n.max(i + 1).max(j + 1);
        edges.push((i, j, w));
    }
    let mut g = LabeledGraph::with_stop_prob(n, stop_prob);
    for (i, j, w) in edges {
        g.add_edge(i, j, w);
    }
    g.ensure_valid()?;
    Ok(g)
}

pub fn load_edge_list(path: &Path, stop_prob: f64) -> Result<LabeledGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path, stop_prob)
}
