//! Pairwise kernel matrix of a generated dataset, normalized, written as
//! CSV and as the binary GRAM format, then read back.
//!
//! Run with `cargo run --release --example gram_matrix`.

use mgk::gram::{eigenvalue_range, load_gram_bin, save_gram_bin, save_gram_csv};
use mgk::{
    compute_gram, gen_ba, gen_nws, normalize_gram, BaseKernel, KernelConfig, Label, LabeledGraph,
    ReorderMethod, SolverConfig,
};

/// Label every node with its degree, capped at 5.
fn degree_labeled(mut g: LabeledGraph) -> LabeledGraph {
    let labels = g.neighbors().iter().map(|l| Label::Cat(l.len().min(5) as i64)).collect();
    g.set_node_labels(labels);
    g
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut dataset = Vec::new();
    let mut ids = Vec::new();
    for s in 0..6 {
        dataset.push(degree_labeled(gen_nws(30 + 10 * s as usize, 3, 0.1, s)?));
        ids.push(format!("nws{s}"));
        dataset.push(degree_labeled(gen_ba(30 + 10 * s as usize, 2, s)?));
        ids.push(format!("ba{s}"));
    }
    let kernels = KernelConfig::labeled(BaseKernel::KroneckerDelta { h: 0.2 }, BaseKernel::ConstantOne);
    let cfg = SolverConfig { reorder: ReorderMethod::Pbr, ..SolverConfig::default() };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let gram = compute_gram(&dataset, &kernels, &cfg, workers)?;
    println!(
        "{} graphs, {} pairs in {:.2?}, all converged: {}",
        gram.size,
        gram.order.len(),
        gram.wall_time,
        gram.all_converged()
    );

    let norm = normalize_gram(&gram.values, gram.size)?;
    let (lo, hi) = eigenvalue_range(&norm, gram.size);
    println!("normalized eigenvalues in [{lo:.3e}, {hi:.3e}]");
    for (a, id) in ids.iter().enumerate().take(4) {
        let row: Vec<String> = (0..4).map(|b| format!("{:.4}", norm[a * gram.size + b])).collect();
        println!("{id:>5}  {}", row.join(" "));
    }

    let dir = std::env::temp_dir().join("mgk-gram-example");
    std::fs::create_dir_all(&dir)?;
    save_gram_csv(&dir.join("gram.csv"), &ids, &norm)?;
    save_gram_bin(&dir.join("gram.bin"), &norm, gram.size)?;
    let (size, back) = load_gram_bin(&dir.join("gram.bin"))?;
    println!("wrote {} (binary round trip exact: {})", dir.display(), size == gram.size && back == norm);
    Ok(())
}
