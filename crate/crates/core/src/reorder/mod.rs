//! Node reorderings that pack edges into few non-empty tiles.
//!
//! [`pbr_reorder`] partitions the nodes into consecutive groups of one tile
//! width and minimizes the number of group pairs joined by an edge.
//! [`rcm_reorder`] and [`morton_reorder`] are the bandwidth and
//! space-filling-curve baselines.

mod morton;
mod pbr;
mod rcm;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Edge, LabeledGraph};
use crate::tiles::TILE;

pub use morton::morton_reorder;
pub use pbr::{fm_refine, pbr_reorder, pbr_reorder_with, PartitionState, PbrOptions};
pub use rcm::rcm_reorder;

/// A bijection on node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    /// Build from the new order: `order[new] = old`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut forward = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            if old >= n || forward[old] != usize::MAX {
                return Err(Error::Permutation(format!(
                    "order is not a bijection on 0..{n} (entry {old})"
                )));
            }
            forward[old] = new;
        }
        Ok(Permutation {
            forward,
            inverse: order,
        })
    }

    /// Build from the old-to-new map: `forward[old] = new`.
    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let inv = Self::from_order(forward)?;
        Ok(inv.inverted())
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// New index of old node `old`.
    pub fn new_index(&self, old: usize) -> usize {
        self.forward[old]
    }

    /// Old index of the node now at `new`.
    pub fn old_index(&self, new: usize) -> usize {
        self.inverse[new]
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn inverted(&self) -> Self {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &f)| i == f)
    }
}

/// Relabel every node of `g` so that old node `v` becomes `perm.new_index(v)`.
pub fn apply_permutation(g: &LabeledGraph, perm: &Permutation) -> Result<LabeledGraph> {
    let n = g.node_count();
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    let gather = |v: &[f64]| perm.inverse().iter().map(|&old| v[old]).collect::<Vec<_>>();
    Ok(LabeledGraph {
        node_labels: g
            .node_labels
            .as_ref()
            .map(|ls| perm.inverse().iter().map(|&old| ls[old].clone()).collect()),
        start_prob: gather(&g.start_prob),
        stop_prob: gather(&g.stop_prob),
        edges: g
            .edges
            .iter()
            .map(|e| Edge {
                i: perm.new_index(e.i),
                j: perm.new_index(e.j),
                weight: e.weight,
                label: e.label.clone(),
            })
            .collect(),
        positions: g
            .positions
            .as_ref()
            .map(|ps| perm.inverse().iter().map(|&old| ps[old].clone()).collect()),
    })
}

/// Number of unordered pairs of distinct consecutive-`TILE` node groups,
/// under `perm`, that are joined by at least one edge.
pub fn objective(g: &LabeledGraph, perm: &Permutation) -> usize {
    objective_with(g, perm, TILE)
}

pub fn objective_with(g: &LabeledGraph, perm: &Permutation, group: usize) -> usize {
    let parts: Vec<usize> = (0..g.node_count())
        .map(|v| perm.new_index(v) / group)
        .collect();
    count_connected_pairs(g, &parts)
}

pub(crate) fn count_connected_pairs(g: &LabeledGraph, parts: &[usize]) -> usize {
    let mut pairs: Vec<(usize, usize)> = g
        .edges
        .iter()
        .filter_map(|e| {
            let (a, b) = (parts[e.i], parts[e.j]);
            (a != b).then_some((a.min(b), a.max(b)))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs.len()
}

/// Non-empty tile count of the reordered adjacency, counted without
/// building tiles.
pub fn nonempty_tiles(g: &LabeledGraph, perm: &Permutation) -> usize {
    let mut keys: Vec<(usize, usize)> = g
        .symmetric_entries()
        .map(|(i, j, _, _)| (perm.new_index(i) / TILE, perm.new_index(j) / TILE))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReorderMethod {
    None,
    Pbr,
    Rcm,
    Morton,
}

impl ReorderMethod {
    /// Compute the permutation for `g`. Morton order needs node positions.
    pub fn permutation(self, g: &LabeledGraph, seed: u64) -> Result<Permutation> {
        match self {
            ReorderMethod::None => Ok(Permutation::identity(g.node_count())),
            ReorderMethod::Pbr => Ok(pbr_reorder(g, seed)),
            ReorderMethod::Rcm => Ok(rcm_reorder(g)),
            ReorderMethod::Morton => {
                let pos = g.positions.as_ref().ok_or_else(|| {
                    Error::MissingCoordinates("morton order needs node positions".into())
                })?;
                morton_reorder(pos)
            }
        }
    }
}

impl fmt::Display for ReorderMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReorderMethod::None => "none",
            ReorderMethod::Pbr => "pbr",
            ReorderMethod::Rcm => "rcm",
            ReorderMethod::Morton => "morton",
        })
    }
}

impl FromStr for ReorderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "natural" => Ok(ReorderMethod::None),
            "pbr" => Ok(ReorderMethod::Pbr),
            "rcm" => Ok(ReorderMethod::Rcm),
            "morton" => Ok(ReorderMethod::Morton),
            other => Err(Error::InvalidParameter(format!("unknown reorder method `{other}`"))),
        }
    }
}
