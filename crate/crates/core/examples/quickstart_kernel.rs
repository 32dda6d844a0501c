//! Similarity of two small labeled molecules-like graphs.
//!
//! Run with `cargo run --example quickstart_kernel`.

use mgk::{kernel, BaseKernel, KernelConfig, Label, LabeledGraph, SolverConfig};

fn ring(n: usize, labels: &[i64]) -> LabeledGraph {
    let mut g = LabeledGraph::new(n);
    for i in 0..n {
        g.add_labeled_edge(i, (i + 1) % n, 1.0, Label::scalar(1.5));
    }
    g.set_node_labels(labels.iter().map(|&c| Label::Cat(c)).collect());
    g
}

fn main() -> mgk::Result<()> {
    let benzene = ring(6, &[6; 6]);
    let pyridine = ring(6, &[7, 6, 6, 6, 6, 6]);

    let kernels = KernelConfig::labeled(
        BaseKernel::KroneckerDelta { h: 0.3 },
        BaseKernel::SquareExponential { alpha: 2.0 },
    );
    let cfg = SolverConfig::default();

    let kaa = kernel(&benzene, &benzene, &kernels, &cfg)?;
    let kbb = kernel(&pyridine, &pyridine, &kernels, &cfg)?;
    let kab = kernel(&benzene, &pyridine, &kernels, &cfg)?;
    println!("K(benzene, benzene)   = {:.6e}", kaa.value);
    println!("K(pyridine, pyridine) = {:.6e}", kbb.value);
    println!("K(benzene, pyridine)  = {:.6e}", kab.value);
    println!("normalized            = {:.6}", kab.value / (kaa.value * kbb.value).sqrt());
    println!("PCG iterations {}, relative residual {:.2e}", kab.iterations, kab.final_residual);

    println!("\nnode-wise similarity, nitrogen row:");
    let row: Vec<String> = (0..6).map(|j| format!("{:.3e}", kab.nodewise_at(0, j))).collect();
    println!("  {}", row.join("  "));
    Ok(())
}
