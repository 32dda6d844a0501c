use crate::error::{Error, Result};
use crate::graph::{Label, LabeledGraph};

use super::KernelConfig;

/// Dense `n x n` weights and labels assembled straight from the edge list.
fn dense_adjacency(g: &LabeledGraph) -> (Vec<f64>, Vec<Option<&Label>>) {
    let n = g.node_count();
    let mut w = vec![0.0; n * n];
    let mut l = vec![None; n * n];
    for (i, j, weight, label) in g.symmetric_entries() {
        w[i * n + j] = weight;
        l[i * n + j] = label;
    }
    (w, l)
}

/// The explicit off-diagonal product matrix `(A ⊗ A') ⊙ (E κe⊗ E')`,
/// `nm x nm` row-major. Fails when `n * m > guard`.
pub fn naive_product_matrix(
    ga: &LabeledGraph,
    gb: &LabeledGraph,
    kernels: &KernelConfig,
    guard: usize,
) -> Result<Vec<f64>> {
    let (n, m) = (ga.node_count(), gb.node_count());
    let nm = n * m;
    if nm > guard {
        return Err(Error::GuardExceeded { size: nm, guard });
    }
    ga.ensure_valid()?;
    gb.ensure_valid()?;
    let resolved = kernels.resolve(ga, gb)?;
    let (wa, la) = dense_adjacency(ga);
    let (wb, lb) = dense_adjacency(gb);
    let mut out = vec![0.0; nm * nm];
    for i in 0..n {
        for j in 0..n {
            let a = wa[i * n + j];
            if a == 0.0 {
                continue;
            }
            for ip in 0..m {
                for jp in 0..m {
                    let b = wb[ip * m + jp];
                    if b == 0.0 {
                        continue;
                    }
                    let k = resolved.edge_value(la[i * n + j], lb[ip * m + jp]);
                    out[(i * m + ip) * nm + j * m + jp] = a * b * k;
                }
            }
        }
    }
    Ok(out)
}

/// Off-diagonal product applied through the explicit matrix.
pub fn naive_dense_apply(
    ga: &LabeledGraph,
    gb: &LabeledGraph,
    kernels: &KernelConfig,
    p: &[f64],
    guard: usize,
) -> Result<Vec<f64>> {
    let nm = ga.node_count() * gb.node_count();
    if p.len() != nm {
        return Err(Error::DimensionMismatch {
            expected: nm,
            found: p.len(),
        });
    }
    let l = naive_product_matrix(ga, gb, kernels, guard)?;
    Ok(l
        .chunks_exact(nm.max(1))
        .map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum())
        .collect())
}
