//! Kernel values by preconditioned conjugate gradient, and two independent
//! oracles: a dense direct solve and the walk-sum fixed-point iteration.
//!
//! The kernel of graphs `G`, `G'` is
//!
//! `K = p×ᵀ x`, where `(D× V×⁻¹ − A× ⊙ E×) x = D× q×`,
//!
//! with `p× = p ⊗ p'`, `q× = q ⊗ q'`, `D× = diag(d ⊗ d')` and `V×` the
//! vertex-kernel values. `x`, reshaped to `n x m`, is the node-wise
//! similarity field.

mod oracles;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::operator::{KernelConfig, ProductOperator, DEFAULT_DENSE_GUARD};
use crate::reorder::{apply_permutation, Permutation, ReorderMethod};
use crate::tiles::{build_tiles, TiledMatrix};

pub use oracles::{direct_solve_oracle, fixed_point_oracle, FixedPointOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual tolerance: stop when `‖r‖ < tolerance · ‖b‖`.
    pub tolerance: f64,
    /// Iteration cap; `None` means `10 · n · m`.
    pub max_iterations: Option<usize>,
    /// Largest `n · m` accepted by the dense oracles.
    pub oracle_guard: usize,
    /// Serial, order-fixed operator application.
    pub deterministic: bool,
    /// Node order used by [`kernel`].
    pub reorder: ReorderMethod,
    pub reorder_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-10,
            max_iterations: None,
            oracle_guard: DEFAULT_DENSE_GUARD,
            deterministic: false,
            reorder: ReorderMethod::None,
            reorder_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelResult {
    pub value: f64,
    /// Node-wise similarity, row-major `rows x cols`.
    pub nodewise: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub iterations: usize,
    /// Relative residual `‖r‖ / ‖b‖` (or relative sweep change for the
    /// fixed-point oracle) at exit.
    pub final_residual: f64,
    pub converged: bool,
}

impl KernelResult {
    pub fn nodewise_at(&self, i: usize, ip: usize) -> f64 {
        self.nodewise[i * self.cols + ip]
    }

    /// `Σ p_i p'_i' nodewise[i][i']`.
    pub fn contract(&self, pa: &[f64], pb: &[f64]) -> f64 {
        contract(&self.nodewise, pa, pb)
    }

    /// Node-wise CSV, one row per node of the first graph.
    pub fn nodewise_csv(&self) -> String {
        let mut out = String::new();
        for row in self.nodewise.chunks(self.cols.max(1)) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn contract(x: &[f64], pa: &[f64], pb: &[f64]) -> f64 {
    let m = pb.len();
    pa.iter()
        .enumerate()
        .map(|(i, &a)| a * x[i * m..(i + 1) * m].iter().zip(pb).map(|(v, b)| v * b).sum::<f64>())
        .sum()
}

/// Right-hand side `(d ⊗ d') ⊙ (q ⊗ q')`.
pub(crate) fn rhs(ga: &LabeledGraph, gb: &LabeledGraph) -> Vec<f64> {
    let (da, db) = (ga.degree_vector(), gb.degree_vector());
    let mut b = Vec::with_capacity(da.len() * db.len());
    for (d, q) in da.iter().zip(&ga.stop_prob) {
        for (dp, qp) in db.iter().zip(&gb.stop_prob) {
            b.push(d * dp * q * qp);
        }
    }
    b
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradient on the operator of `ga`, `gb`.
///
/// Starts from zero. When the iteration cap is hit the iterate with the
/// smallest residual is returned with `converged = false`.
pub fn solve_pcg(
    op: &ProductOperator<'_>,
    ga: &LabeledGraph,
    gb: &LabeledGraph,
    cfg: &SolverConfig,
) -> Result<KernelResult> {
    cfg.validate()?;
    let (n, m) = (ga.node_count(), gb.node_count());
    if op.shape() != (n, m) {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            found: op.dim(),
        });
    }
    let nm = n * m;
    let max_it = cfg.max_iterations.unwrap_or(10 * nm).max(1);
    let b = rhs(ga, gb);
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();

    let bb = dot(&b, &b);
    let threshold = cfg.tolerance * cfg.tolerance * bb;
    let mut x = vec![0.0; nm];
    let mut r = b;
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(v, w)| v * w).collect();
    let mut dir = z.clone();
    let mut adir = vec![0.0; nm];
    let mut rz = dot(&r, &z);
    let mut rr = bb;
    let mut best = (rr, 0usize, x.clone());
    let mut iterations = 0;
    let mut converged = rr < threshold;

    while !converged && iterations < max_it {
        op.apply_into(&dir, &mut adir);
        let curvature = dot(&dir, &adir);
        if !(curvature > 0.0) {
            break;
        }
        let alpha = rz / curvature;
        for k in 0..nm {
            x[k] += alpha * dir[k];
            r[k] -= alpha * adir[k];
        }
        iterations += 1;
        rr = dot(&r, &r);
        if rr < threshold {
            converged = true;
            break;
        }
        if rr < best.0 {
            best = (rr, iterations, x.clone());
        }
        for k in 0..nm {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..nm {
            dir[k] = z[k] + beta * dir[k];
        }
    }
    if !converged && best.0 < rr {
        rr = best.0;
        x = best.2;
    }

    let value = contract(&x, &ga.start_prob, &gb.start_prob);
    Ok(KernelResult {
        value,
        nodewise: x,
        rows: n,
        cols: m,
        iterations,
        final_residual: if bb > 0.0 { (rr / bb).sqrt() } else { 0.0 },
        converged,
    })
}

/// A graph reordered and tiled once, ready to be paired many times.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    graph: LabeledGraph,
    permutation: Permutation,
    tiles: TiledMatrix,
}

impl PreparedGraph {
    pub fn new(g: &LabeledGraph, method: ReorderMethod, seed: u64) -> Result<Self> {
        g.ensure_valid()?;
        let permutation = method.permutation(g, seed)?;
        let graph = if permutation.is_identity() {
            g.clone()
        } else {
            apply_permutation(g, &permutation)?
        };
        let tiles = build_tiles(&graph);
        Ok(PreparedGraph {
            graph,
            permutation,
            tiles,
        })
    }

    /// The reordered graph.
    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    pub fn tiles(&self) -> &TiledMatrix {
        &self.tiles
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }
}

/// Kernel of two prepared graphs. The node-wise field is reported in the
/// original node order of both graphs.
pub fn kernel_prepared(
    a: &PreparedGraph,
    b: &PreparedGraph,
    kernels: &KernelConfig,
    cfg: &SolverConfig,
) -> Result<KernelResult> {
    let op = ProductOperator::new(&a.graph, &a.tiles, &b.graph, &b.tiles, kernels)?
        .with_deterministic(cfg.deterministic);
    let mut res = solve_pcg(&op, &a.graph, &b.graph, cfg)?;
    if !(a.permutation.is_identity() && b.permutation.is_identity()) {
        let (n, m) = (res.rows, res.cols);
        let mut orig = vec![0.0; n * m];
        for i in 0..n {
            let ni = a.permutation.new_index(i);
            for ip in 0..m {
                orig[i * m + ip] = res.nodewise[ni * m + b.permutation.new_index(ip)];
            }
        }
        res.nodewise = orig;
    }
    Ok(res)
}

/// Reorder (per `cfg.reorder`), tile, build the operator and solve.
/// Graphs without labels, or `kernels.unlabeled`, take the unit-kernel
/// path.
pub fn kernel(
    ga: &LabeledGraph,
    gb: &LabeledGraph,
    kernels: &KernelConfig,
    cfg: &SolverConfig,
) -> Result<KernelResult> {
    let a = PreparedGraph::new(ga, cfg.reorder, cfg.reorder_seed)?;
    let b = PreparedGraph::new(gb, cfg.reorder, cfg.reorder_seed)?;
    kernel_prepared(&a, &b, kernels, cfg)
}
