#![allow(dead_code)]

use mgk::io::Sampler;
use mgk::reorder::Permutation;
use mgk::{Label, LabeledGraph};

pub const CATEGORIES: u64 = 3;

/// Random graph with edge probability `density`, weights in `[0.5, 1.5)`,
/// stopping probabilities in `[0.05, 0.5)` and normalized random start
/// probabilities. Labeled graphs get categorical node labels and scalar
/// edge labels in `[0, 2)`.
pub fn random_graph(rng: &mut Sampler, n: usize, density: f64, labeled: bool) -> LabeledGraph {
    let mut g = LabeledGraph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.uniform() < density {
                let w = 0.5 + rng.uniform();
                if labeled {
                    g.add_labeled_edge(i, j, w, Label::scalar(2.0 * rng.uniform()));
                } else {
                    g.add_edge(i, j, w);
                }
            }
        }
    }
    if labeled {
        g.set_node_labels((0..n).map(|_| Label::Cat(rng.below(CATEGORIES) as i64)).collect());
    }
    let p: Vec<f64> = (0..n).map(|_| 0.1 + rng.uniform()).collect();
    let total: f64 = p.iter().sum();
    g.start_prob = p.iter().map(|x| x / total).collect();
    g.stop_prob = (0..n).map(|_| 0.05 + 0.45 * rng.uniform()).collect();
    g
}

/// Two random graphs with sizes uniform in `1..=max_n`.
pub fn random_pair(rng: &mut Sampler, max_n: usize, labeled: bool) -> (LabeledGraph, LabeledGraph) {
    let n = 1 + rng.below(max_n as u64) as usize;
    let m = 1 + rng.below(max_n as u64) as usize;
    let density = 0.1 + 0.4 * rng.uniform();
    (random_graph(rng, n, density, labeled), random_graph(rng, m, density, labeled))
}

pub fn random_permutation(rng: &mut Sampler, n: usize) -> Permutation {
    let mut order: Vec<usize> = (0..n).collect();
    for k in (1..n).rev() {
        let j = rng.below(k as u64 + 1) as usize;
        order.swap(k, j);
    }
    Permutation::from_order(order).expect("valid order")
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `max |a - b| / max |b|`.
pub fn rel_linf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn random_vector(rng: &mut Sampler, len: usize) -> Vec<f64> {
    (0..len).map(|_| 2.0 * rng.uniform() - 1.0).collect()
}
