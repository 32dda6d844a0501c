//! Matrix-free product-graph operator.
//!
//! For graphs `G` (n nodes) and `G'` (m nodes) the operator acts on vectors
//! of length `n * m`, node pair `(i, i')` at flat index `i * m + i'`, as
//!
//! `y = diag(d ⊗ d' / κv) x - ((A ⊗ A') ⊙ (E κe⊗ E')) x`.
//!
//! The off-diagonal term is never materialized: it is evaluated tile pair
//! by tile pair from the two [`TiledMatrix`] structures, skipping every
//! pair where either tile is empty.

mod cost;
mod micro;
mod naive;

use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, KernelError, Result};
use crate::graph::{LabelShape, LabeledGraph};
use crate::kernels::BaseKernel;
use crate::tiles::{expand_tile, ExpandedTile, TiledMatrix, TILE, TILE_AREA};

pub use cost::{measure_counters, predict_costs, CostModel, CounterReport, Primitive, RawCounters};
pub use micro::{
    select_tile_kernel, tile_product_dense_dense, tile_product_dense_sparse,
    tile_product_sparse_dense, tile_product_sparse_sparse, EdgeSim, KernelEdges, Selection,
    SelectionThresholds, TileKernel, UnitEdges,
};
pub use naive::{naive_dense_apply, naive_product_matrix};

use micro::run_tile_kernel;

/// Largest `n * m` for which dense product matrices are formed.
pub const DEFAULT_DENSE_GUARD: usize = 4096;

/// Smallest vertex-kernel value used before inversion.
pub const DEFAULT_VERTEX_FLOOR: f64 = 1e-12;

/// Vertex and edge base kernels for one graph pair or dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub vertex: BaseKernel,
    pub edge: BaseKernel,
    /// Ignore all labels, as if both kernels were constant one.
    pub unlabeled: bool,
    pub vertex_floor: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            vertex: BaseKernel::ConstantOne,
            edge: BaseKernel::ConstantOne,
            unlabeled: false,
            vertex_floor: DEFAULT_VERTEX_FLOOR,
        }
    }
}

impl KernelConfig {
    pub fn unlabeled() -> Self {
        KernelConfig {
            unlabeled: true,
            ..Self::default()
        }
    }

    pub fn labeled(vertex: BaseKernel, edge: BaseKernel) -> Self {
        KernelConfig {
            vertex,
            edge,
            ..Self::default()
        }
    }

    /// Decide which kernels actually apply to the pair `(a, b)`.
    ///
    /// Labels present on both graphs are compared with the configured
    /// kernel. Labels absent from both are only accepted with the constant
    /// kernel. Labels present on one side only are an error. A graph
    /// without edges never needs an edge kernel.
    pub fn resolve<'k>(&'k self, a: &LabeledGraph, b: &LabeledGraph) -> Result<ResolvedKernels<'k>> {
        if !(self.vertex_floor > 0.0 && self.vertex_floor <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "vertex floor {} must lie in (0, 1]",
                self.vertex_floor
            )));
        }
        if self.unlabeled {
            return Ok(ResolvedKernels {
                vertex: None,
                edge: None,
                edge_shape: None,
                floor: self.vertex_floor,
            });
        }
        self.vertex.check_parameters()?;
        self.edge.check_parameters()?;

        let vertex = match (&a.node_labels, &b.node_labels) {
            (Some(la), Some(lb)) => {
                if let (Some(x), Some(y)) = (la.first(), lb.first()) {
                    self.vertex.eval(x, y)?;
                }
                Some(&self.vertex)
            }
            (None, None) if self.vertex.is_constant_one() => None,
            (None, None) => return Err(missing(&self.vertex, "graphs carry no node labels")),
            _ => return Err(missing(&self.vertex, "only one graph carries node labels")),
        };

        let (edge, edge_shape) = if a.edge_count() == 0 || b.edge_count() == 0 {
            (None, None)
        } else {
            match (a.has_edge_labels(), b.has_edge_labels()) {
                (true, true) => {
                    let x = a.edges[0].label.as_ref().expect("labeled edge");
                    let y = b.edges[0].label.as_ref().expect("labeled edge");
                    self.edge.eval(x, y)?;
                    (Some(&self.edge), Some(x.shape()))
                }
                (false, false) if self.edge.is_constant_one() => (None, None),
                (false, false) => return Err(missing(&self.edge, "graphs carry no edge labels")),
                _ => return Err(missing(&self.edge, "only one graph carries edge labels")),
            }
        };
        Ok(ResolvedKernels {
            vertex,
            edge,
            edge_shape,
            floor: self.vertex_floor,
        })
    }
}

fn missing(k: &BaseKernel, detail: &str) -> Error {
    Error::Kernel(KernelError::ShapeMismatch {
        kernel: k.name(),
        detail: detail.to_string(),
    })
}

/// Kernels after label resolution; `None` means constant one.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedKernels<'k> {
    pub vertex: Option<&'k BaseKernel>,
    pub edge: Option<&'k BaseKernel>,
    pub edge_shape: Option<LabelShape>,
    pub floor: f64,
}

impl ResolvedKernels<'_> {
    /// Floored vertex similarities, `n * m` in flat pair order.
    pub fn vertex_values(&self, a: &LabeledGraph, b: &LabeledGraph) -> Vec<f64> {
        let (n, m) = (a.node_count(), b.node_count());
        match (self.vertex, &a.node_labels, &b.node_labels) {
            (Some(k), Some(la), Some(lb)) => {
                let mut out = Vec::with_capacity(n * m);
                for x in la {
                    for y in lb {
                        out.push(k.value(x, y).max(self.floor));
                    }
                }
                out
            }
            _ => vec![1.0; n * m],
        }
    }

    /// Edge similarity of two optional labels (constant one when unlabeled).
    pub fn edge_value(&self, x: Option<&crate::graph::Label>, y: Option<&crate::graph::Label>) -> f64 {
        match self.edge {
            Some(k) => KernelEdges(k).sim(x, y),
            None => 1.0,
        }
    }

    /// Flops per fused contribution: multiply, multiply, add, plus the edge
    /// kernel's own cost.
    pub fn fused_flops(&self) -> u64 {
        3 + match (self.edge, self.edge_shape) {
            (Some(k), Some(shape)) => k.flop_count(shape),
            _ => 0,
        }
    }

    /// Bytes per edge label.
    pub fn label_bytes(&self) -> u64 {
        match (self.edge, self.edge_shape) {
            (Some(_), Some(LabelShape::Categorical)) => 8,
            (Some(_), Some(LabelShape::Vector(d))) => 8 * d as u64,
            _ => 0,
        }
    }
}

/// The product-graph system matrix of one graph pair, applied matrix-free.
pub struct ProductOperator<'g> {
    a: &'g TiledMatrix,
    b: &'g TiledMatrix,
    expanded_a: Vec<ExpandedTile<'g>>,
    expanded_b: Vec<ExpandedTile<'g>>,
    diag: Vec<f64>,
    edge: Option<BaseKernel>,
    fused_flops: u64,
    label_bytes: u64,
    selection: Selection,
    deterministic: bool,
    counters: Mutex<RawCounters>,
}

impl std::fmt::Debug for ProductOperator<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProductOperator")
            .field("n", &self.a.node_count())
            .field("m", &self.b.node_count())
            .field("labeled", &self.edge.is_some())
            .field("selection", &self.selection)
            .finish_non_exhaustive()
    }
}

/// Build the operator for `ga` and `gb` with their tiled adjacencies.
pub fn build_operator<'g>(
    ga: &LabeledGraph,
    ta: &'g TiledMatrix,
    gb: &LabeledGraph,
    tb: &'g TiledMatrix,
    kernels: &KernelConfig,
) -> Result<ProductOperator<'g>> {
    ProductOperator::new(ga, ta, gb, tb, kernels)
}

impl<'g> ProductOperator<'g> {
    pub fn new(
        ga: &LabeledGraph,
        ta: &'g TiledMatrix,
        gb: &LabeledGraph,
        tb: &'g TiledMatrix,
        kernels: &KernelConfig,
    ) -> Result<Self> {
        ga.ensure_valid()?;
        gb.ensure_valid()?;
        for (g, t) in [(ga, ta), (gb, tb)] {
            if g.node_count() != t.node_count() {
                return Err(Error::DimensionMismatch {
                    expected: g.node_count(),
                    found: t.node_count(),
                });
            }
        }
        let resolved = kernels.resolve(ga, gb)?;
        if resolved.edge.is_some() && !(ta.is_labeled() && tb.is_labeled()) {
            return Err(missing(&kernels.edge, "tiles were built without edge labels"));
        }
        let vertex = resolved.vertex_values(ga, gb);
        let (da, db) = (ga.degree_vector(), gb.degree_vector());
        let m = gb.node_count();
        let diag = vertex
            .iter()
            .enumerate()
            .map(|(k, &kv)| da[k / m] * db[k % m] / kv)
            .collect();
        let labeled = resolved.edge.is_some();
        Ok(ProductOperator {
            a: ta,
            b: tb,
            expanded_a: ta.tiles().iter().map(expand_tile).collect(),
            expanded_b: tb.tiles().iter().map(expand_tile).collect(),
            diag,
            edge: resolved.edge.cloned(),
            fused_flops: resolved.fused_flops(),
            label_bytes: resolved.label_bytes(),
            selection: Selection::Hybrid(SelectionThresholds::for_mode(labeled)),
            deterministic: false,
            counters: Mutex::new(RawCounters::default()),
        })
    }

    pub fn with_selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    /// Process output stripes serially in ascending order.
    pub fn with_deterministic(mut self, deterministic: bool) -> Self {
        self.deterministic = deterministic;
        self
    }

    pub fn selection(&self) -> Selection {
        self.selection
    }

    /// `(n, m)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.a.node_count(), self.b.node_count())
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn is_labeled(&self) -> bool {
        self.edge.is_some()
    }

    /// Entries of `D V^{-1}` in flat pair order.
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            })
        }
    }

    pub fn apply_diag(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p.len())?;
        Ok(p.iter().zip(&self.diag).map(|(x, d)| x * d).collect())
    }

    pub fn apply_offdiag(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p.len())?;
        let mut out = vec![0.0; self.dim()];
        self.offdiag_into(p, &mut out);
        Ok(out)
    }

    /// Diagonal minus off-diagonal term.
    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p.len())?;
        let mut out = vec![0.0; self.dim()];
        self.apply_into(p, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        self.offdiag_into(p, out);
        for ((o, x), d) in out.iter_mut().zip(p).zip(&self.diag) {
            *o = d * x - *o;
        }
    }

    fn offdiag_into(&self, p: &[f64], out: &mut [f64]) {
        let raw = match &self.edge {
            None => self.offdiag_with(&UnitEdges, p, out),
            Some(k) => self.offdiag_with(&KernelEdges(k), p, out),
        };
        self.counters.lock().expect("counter lock").merge(&raw);
    }

    fn offdiag_with<S: EdgeSim>(&self, sim: &S, p: &[f64], out: &mut [f64]) -> RawCounters {
        out.fill(0.0);
        let stripe = TILE * self.b.node_count();
        let work = |(ti, chunk): (usize, &mut [f64])| self.stripe(sim, ti, p, chunk);
        if self.deterministic {
            out.chunks_mut(stripe).enumerate().map(work).fold(
                RawCounters::default(),
                |mut acc, c| {
                    acc.merge(&c);
                    acc
                },
            )
        } else {
            out.par_chunks_mut(stripe)
                .enumerate()
                .map(work)
                .reduce(RawCounters::default, |mut acc, c| {
                    acc.merge(&c);
                    acc
                })
        }
    }

    /// Output rows of tile row `ti` of the first graph.
    fn stripe<S: EdgeSim>(&self, sim: &S, ti: usize, p: &[f64], chunk: &mut [f64]) -> RawCounters {
        let mut c = RawCounters::default();
        let (n, m) = self.shape();
        let labeled = u64::from(self.edge.is_some());
        let range_a = self.a.row_range(ti);
        if range_a.is_empty() {
            return c;
        }
        let rows_here = chunk.len() / m;
        let mut pblk = [0.0; TILE_AREA];
        for tj in 0..self.b.tile_dim() {
            let range_b = self.b.row_range(tj);
            if range_b.is_empty() {
                continue;
            }
            let mut acc = [0.0; TILE_AREA];
            for ka in range_a.clone() {
                let ta = &self.a.tiles()[ka];
                let ea = &self.expanded_a[ka];
                let nnz_a = ta.nnz() as u64;
                c.t1_outer_weights += nnz_a;
                c.t1_outer_labels += nnz_a * labeled;
                c.t1_outer_bitmaps += 1;
                for kb in range_b.clone() {
                    let tb = &self.b.tiles()[kb];
                    let eb = &self.expanded_b[kb];
                    gather(p, n, m, ta.col, tb.col, &mut pblk);
                    let kernel = self.selection.pick(ta.nnz(), tb.nnz());
                    run_tile_kernel(kernel, ta, ea, tb, eb, sim, &pblk, &mut acc);

                    let nnz_b = tb.nnz() as u64;
                    let area = TILE_AREA as u64;
                    c.tile_pairs[kernel.index()] += 1;
                    c.t1_vector += area;
                    let (fused, streamed, bitmaps, expanded) = match kernel {
                        TileKernel::DenseDense => (area * area, area, 0, 0),
                        TileKernel::DenseSparse => (area * nnz_b, nnz_b, 1, 0),
                        TileKernel::SparseDense => (nnz_a * area, area, 0, area),
                        TileKernel::SparseSparse => (nnz_a * nnz_b, nnz_b, 1, 0),
                    };
                    c.fused += fused;
                    c.t1_weights += streamed;
                    c.t1_labels += streamed * labeled;
                    c.t1_bitmaps += bitmaps;
                    if kernel != TileKernel::DenseDense {
                        c.t2_weights += fused;
                        c.t2_labels += fused * labeled;
                        c.t2_store_weights += expanded;
                        c.t2_store_labels += expanded * labeled;
                    }
                }
            }
            for i in 0..TILE.min(rows_here) {
                for ip in 0..TILE {
                    let col = tj * TILE + ip;
                    if col < m {
                        chunk[i * m + col] = acc[i * TILE + ip];
                        c.t1_store += 1;
                    }
                }
            }
        }
        c
    }

    /// Snapshot of the counters accumulated since construction or the last
    /// reset.
    pub fn counters(&self) -> RawCounters {
        *self.counters.lock().expect("counter lock")
    }

    pub fn reset_counters(&self) {
        *self.counters.lock().expect("counter lock") = RawCounters::default();
    }

    /// Cost model of this operator in double precision: `E` is the edge
    /// label size, `X` includes the edge kernel.
    pub fn native_cost_model(&self) -> CostModel {
        CostModel {
            e: self.label_bytes as f64,
            f: 8.0,
            x: self.fused_flops as f64,
            t: TILE as f64,
            r: TILE as f64,
        }
    }

    /// Counters converted under `model`.
    pub fn measure(&self, model: &CostModel) -> CounterReport {
        let (n, m) = self.shape();
        measure_counters(&self.counters(), model, n, m)
    }
}

/// `pblk[j * 8 + j'] = p[(J * 8 + j) * m + J' * 8 + j']`, zero outside.
#[inline]
fn gather(p: &[f64], n: usize, m: usize, col_a: usize, col_b: usize, pblk: &mut [f64; TILE_AREA]) {
    for j in 0..TILE {
        let row = col_a * TILE + j;
        for jp in 0..TILE {
            let col = col_b * TILE + jp;
            pblk[j * TILE + jp] = if row < n && col < m { p[row * m + col] } else { 0.0 };
        }
    }
}
