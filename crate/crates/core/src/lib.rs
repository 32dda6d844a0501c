//! Marginalized graph kernels by matrix-free conjugate gradient.
//!
//! Graphs are stored as bitmap-compressed 8x8 tiles, optionally reordered to
//! reduce the number of non-empty tiles, and paired through an on-the-fly
//! product operator that never materializes the product graph. A Jacobi
//! preconditioned conjugate gradient solve then yields the kernel value and
//! its node-wise field. Dense and fixed-point reference solvers, a byte and
//! flop counter model, a Gram-matrix driver and seeded generators round out
//! the crate.

pub mod error;
pub mod graph;
pub mod gram;
pub mod io;
pub mod kernels;
pub mod operator;
pub mod reorder;
pub mod solver;
pub mod tiles;

pub use error::{Error, KernelError, Result};
pub use graph::{Label, LabeledGraph};
pub use gram::{compute_gram, normalize_gram, GramResult};
pub use io::{gen_ba, gen_nws, load_graph, save_graph};
pub use kernels::BaseKernel;
pub use operator::KernelConfig;
pub use reorder::ReorderMethod;
pub use solver::{kernel, KernelResult, SolverConfig};
