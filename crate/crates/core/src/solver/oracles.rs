use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Label, LabeledGraph};
use crate::operator::{naive_product_matrix, KernelConfig, DEFAULT_DENSE_GUARD};

use super::{contract, rhs, KernelResult};

fn check_guard(ga: &LabeledGraph, gb: &LabeledGraph, guard: usize) -> Result<usize> {
    let nm = ga.node_count() * gb.node_count();
    if nm > guard {
        Err(Error::GuardExceeded { size: nm, guard })
    } else {
        Ok(nm)
    }
}

/// Solve the product system densely by Cholesky factorization.
pub fn direct_solve_oracle(
    ga: &LabeledGraph,
    gb: &LabeledGraph,
    kernels: &KernelConfig,
    guard: usize,
) -> Result<KernelResult> {
    let nm = check_guard(ga, gb, guard)?;
    let off = naive_product_matrix(ga, gb, kernels, guard)?;
    let resolved = kernels.resolve(ga, gb)?;
    let vertex = resolved.vertex_values(ga, gb);
    let (da, db) = (ga.degree_vector(), gb.degree_vector());
    let m = gb.node_count();

    let mut sys = DMatrix::from_row_slice(nm, nm, &off);
    sys.neg_mut();
    for k in 0..nm {
        sys[(k, k)] += da[k / m] * db[k % m] / vertex[k];
    }
    let b = DVector::from_vec(rhs(ga, gb));
    let chol = sys.cholesky().ok_or(Error::Factorization)?;
    let x = chol.solve(&b);
    let x: Vec<f64> = x.iter().copied().collect();
    Ok(KernelResult {
        value: contract(&x, &ga.start_prob, &gb.start_prob),
        nodewise: x,
        rows: ga.node_count(),
        cols: m,
        iterations: 1,
        final_residual: 0.0,
        converged: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub max_sweeps: usize,
    /// Stop when the sup-norm change of a sweep falls below `tolerance`
    /// times the sup norm of the iterate.
    pub tolerance: f64,
    pub guard: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            max_sweeps: 100_000,
            tolerance: 1e-13,
            guard: DEFAULT_DENSE_GUARD,
        }
    }
}

/// Sweeps after which a growing change is declared divergence.
const GROWTH_LIMIT: usize = 5;

type WeightedAdjacency<'g> = Vec<Vec<(usize, f64, Option<&'g Label>)>>;

fn weighted_adjacency(g: &LabeledGraph) -> WeightedAdjacency<'_> {
    let mut adj = vec![Vec::new(); g.node_count()];
    for (i, j, w, l) in g.symmetric_entries() {
        adj[i].push((j, w, l));
    }
    adj
}

/// Iterate `R ← q× + T R` from `R = q×`, where
/// `T[(i,i'),(j,j')] = P_ij P'_i'j' κe(E_ij, E'_i'j') κv(j, j')` and
/// `P = D⁻¹A`. After `k` sweeps `R` is the walk sum truncated at length
/// `k + 1`. The kernel is `Σ p p' κv R` and the node-wise field `κv R`.
pub fn fixed_point_oracle(
    ga: &LabeledGraph,
    gb: &LabeledGraph,
    kernels: &KernelConfig,
    opts: &FixedPointOptions,
) -> Result<KernelResult> {
    let nm = check_guard(ga, gb, opts.guard)?;
    ga.ensure_valid()?;
    gb.ensure_valid()?;
    let resolved = kernels.resolve(ga, gb)?;
    let vertex = resolved.vertex_values(ga, gb);
    let (n, m) = (ga.node_count(), gb.node_count());
    let (da, db) = (ga.degree_vector(), gb.degree_vector());
    let (adj_a, adj_b) = (weighted_adjacency(ga), weighted_adjacency(gb));

    // transition operator in compressed rows
    let mut row_ptr = Vec::with_capacity(nm + 1);
    let mut cols = Vec::new();
    let mut coefs = Vec::new();
    row_ptr.push(0);
    for i in 0..n {
        for ip in 0..m {
            for &(j, w, l) in &adj_a[i] {
                for &(jp, wp, lp) in &adj_b[ip] {
                    let col = j * m + jp;
                    cols.push(col);
                    coefs.push(
                        (w / da[i]) * (wp / db[ip]) * resolved.edge_value(l, lp) * vertex[col],
                    );
                }
            }
            row_ptr.push(cols.len());
        }
    }

    let q: Vec<f64> = ga
        .stop_prob
        .iter()
        .flat_map(|&qa| gb.stop_prob.iter().map(move |&qb| qa * qb))
        .collect();
    let mut r = q.clone();
    let mut next = vec![0.0; nm];
    let mut prev_change = f64::INFINITY;
    let mut growth = 0;
    let mut sweeps = 0;
    let mut rel_change = f64::INFINITY;
    let mut converged = false;
    while sweeps < opts.max_sweeps {
        next.par_iter_mut().enumerate().for_each(|(row, out)| {
            let range = row_ptr[row]..row_ptr[row + 1];
            *out = q[row]
                + cols[range.clone()]
                    .iter()
                    .zip(&coefs[range])
                    .map(|(&c, &t)| t * r[c])
                    .sum::<f64>();
        });
        sweeps += 1;
        let change = next
            .iter()
            .zip(&r)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        let scale = next.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        std::mem::swap(&mut r, &mut next);
        if !change.is_finite() {
            return Err(Error::NoContraction(growth));
        }
        rel_change = if scale > 0.0 { change / scale } else { 0.0 };
        if rel_change < opts.tolerance {
            converged = true;
            break;
        }
        if change > prev_change {
            growth += 1;
            if growth >= GROWTH_LIMIT {
                return Err(Error::NoContraction(growth));
            }
        } else {
            growth = 0;
        }
        prev_change = change;
    }

    let x: Vec<f64> = r.iter().zip(&vertex).map(|(a, b)| a * b).collect();
    Ok(KernelResult {
        value: contract(&x, &ga.start_prob, &gb.start_prob),
        nodewise: x,
        rows: n,
        cols: m,
        iterations: sweeps,
        final_residual: rel_change,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::BaseKernel;

    fn single(label: i64) -> LabeledGraph {
        let mut g = LabeledGraph::with_stop_prob(1, 0.3);
        g.set_node_labels(vec![Label::Cat(label)]);
        g
    }

    fn p2() -> LabeledGraph {
        let mut g = LabeledGraph::with_stop_prob(2, 0.5);
        g.add_edge(0, 1, 1.0);
        g
    }

    fn delta_08() -> KernelConfig {
        KernelConfig::labeled(BaseKernel::KroneckerDelta { h: 0.8 }, BaseKernel::ConstantOne)
    }

    #[test]
    fn single_node_pair() {
        let (a, b) = (single(0), single(1));
        let d = direct_solve_oracle(&a, &b, &delta_08(), DEFAULT_DENSE_GUARD).unwrap();
        assert!((d.value - 0.072).abs() <= 1e-14);
        let f = fixed_point_oracle(&a, &b, &delta_08(), &FixedPointOptions::default()).unwrap();
        assert_eq!(f.iterations, 1);
        assert!((f.value - 0.072).abs() <= 1e-14);
    }

    #[test]
    fn p2_pair() {
        let g = p2();
        let k = KernelConfig::unlabeled();
        let d = direct_solve_oracle(&g, &g, &k, DEFAULT_DENSE_GUARD).unwrap();
        assert!((d.value - 0.45).abs() <= 1e-12);
        let f = fixed_point_oracle(&g, &g, &k, &FixedPointOptions::default()).unwrap();
        assert!(f.converged);
        assert!((f.value - 0.45).abs() <= 1e-10);
    }

    /// Explicit sum over all walk pairs of length up to `len`, on tiny graphs.
    fn truncated_walk_sum(g: &LabeledGraph, h: &LabeledGraph, len: usize) -> f64 {
        let pa = crate::graph::transition_matrix(g).to_dense();
        let pb = crate::graph::transition_matrix(h).to_dense();
        let (n, m) = (g.node_count(), h.node_count());
        let mut total = 0.0;
        // walks as node sequences of equal length in both graphs
        fn rec(
            path_a: &mut Vec<usize>,
            path_b: &mut Vec<usize>,
            left: usize,
            ctx: &(&Vec<Vec<f64>>, &Vec<Vec<f64>>, &LabeledGraph, &LabeledGraph),
            total: &mut f64,
        ) {
            let (pa, pb, g, h) = ctx;
            let (a0, b0) = (path_a[0], path_b[0]);
            let (al, bl) = (*path_a.last().unwrap(), *path_b.last().unwrap());
            let mut prob = g.start_prob[a0] * h.start_prob[b0];
            for w in path_a.windows(2) {
                prob *= pa[w[0]][w[1]];
            }
            for w in path_b.windows(2) {
                prob *= pb[w[0]][w[1]];
            }
            *total += prob * g.stop_prob[al] * h.stop_prob[bl];
            if left == 0 {
                return;
            }
            for x in 0..g.node_count() {
                for y in 0..h.node_count() {
                    if pa[al][x] > 0.0 && pb[bl][y] > 0.0 {
                        path_a.push(x);
                        path_b.push(y);
                        rec(path_a, path_b, left - 1, ctx, total);
                        path_a.pop();
                        path_b.pop();
                    }
                }
            }
        }
        for s in 0..n {
            for t in 0..m {
                rec(&mut vec![s], &mut vec![t], len - 1, &(&pa, &pb, g, h), &mut total);
            }
        }
        total
    }

    #[test]
    fn sweeps_equal_truncated_walk_sums() {
        let mut g = LabeledGraph::with_stop_prob(3, 0.4);
        g.add_edge(0, 1, 1.0).add_edge(1, 2, 2.0);
        let h = p2();
        let k = KernelConfig::unlabeled();
        for sweeps in 1..=5 {
            let opts = FixedPointOptions {
                max_sweeps: sweeps,
                tolerance: 0.0,
                ..FixedPointOptions::default()
            };
            let f = fixed_point_oracle(&g, &h, &k, &opts).unwrap();
            // R after `sweeps` sweeps covers walks of up to `sweeps + 1` nodes
            let want = truncated_walk_sum(&g, &h, sweeps + 1);
            assert!((f.value - want).abs() <= 1e-14 * want, "{sweeps}: {} vs {want}", f.value);
        }
    }

    #[test]
    fn guard_applies() {
        let g = LabeledGraph::new(65);
        let err = fixed_point_oracle(&g, &g, &KernelConfig::unlabeled(), &FixedPointOptions::default());
        assert!(matches!(err, Err(Error::GuardExceeded { .. })));
        assert!(direct_solve_oracle(&g, &g, &KernelConfig::unlabeled(), 4096).is_err());
    }
}
