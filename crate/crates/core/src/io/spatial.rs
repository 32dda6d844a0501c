//! Graphs from point clouds by a smooth distance cutoff.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Label, LabeledGraph};

/// Points of one dimensionality, each with a categorical label such as an
/// element number.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub coords: Vec<Vec<f64>>,
    pub labels: Vec<i64>,
}

impl PointCloud {
    pub fn new(coords: Vec<Vec<f64>>, labels: Vec<i64>) -> Result<Self> {
        if coords.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: coords.len(),
                found: labels.len(),
            });
        }
        if let Some(first) = coords.first() {
            if let Some(k) = coords.iter().position(|c| c.len() != first.len()) {
                return Err(Error::InvalidParameter(format!(
                    "point {k} has dimension {}, point 0 has {}",
                    coords[k].len(),
                    first.len()
                )));
            }
        }
        Ok(PointCloud { coords, labels })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Parse `label x y [z]` lines; `#` starts a comment line.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut coords = Vec::new();
        let mut labels = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |m: String| Error::parse(origin, format!("line {}: {m}", lineno + 1));
            let mut fields = line.split_whitespace();
            let label = fields.next().expect("non-empty line");
            labels.push(label.parse().map_err(|_| at(format!("bad label `{label}`")))?);
            let xs = fields
                .map(|s| s.parse::<f64>().map_err(|_| at(format!("bad coordinate `{s}`"))))
                .collect::<Result<Vec<_>>>()?;
            if !(2..=3).contains(&xs.len()) {
                return Err(at(format!("expected 2 or 3 coordinates, found {}", xs.len())));
            }
            coords.push(xs);
        }
        PointCloud::new(coords, labels).map_err(|e| Error::parse(origin, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// `(1 - (d/cutoff)²)²` inside the cutoff, zero outside.
pub fn spatial_weight(d: f64, cutoff: f64) -> f64 {
    if d < cutoff {
        let s = d / cutoff;
        (1.0 - s * s).powi(2)
    } else {
        0.0
    }
}

/// Connect points closer than `cutoff`. Edges carry the weight
/// [`spatial_weight`] and the distance as a scalar label; nodes carry the
/// point labels and coordinates. Coincident points are joined with weight 1.
pub fn spatial_graph(pc: &PointCloud, cutoff: f64) -> Result<LabeledGraph> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::InvalidParameter(format!("cutoff {cutoff} must be positive")));
    }
    let n = pc.len();
    let mut g = LabeledGraph::new(n);
    g.set_node_labels(pc.labels.iter().map(|&l| Label::Cat(l)).collect());
    g.positions = Some(pc.coords.clone());
    for a in 0..n {
        for b in a + 1..n {
            let d = pc.coords[a]
                .iter()
                .zip(&pc.coords[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if d < cutoff {
                g.add_labeled_edge(a, b, spatial_weight(d, cutoff), Label::scalar(d));
            }
        }
    }
    Ok(g)
}
