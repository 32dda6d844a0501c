//! Graphs built from 3-D point clouds with a smooth distance cutoff, saved
//! in the JSON graph format and compared under Morton ordering.
//!
//! Run with `cargo run --example spatial_graphs`.

use std::path::Path;

use mgk::io::{spatial_graph, PointCloud};
use mgk::{kernel, load_graph, save_graph, BaseKernel, KernelConfig, ReorderMethod, SolverConfig};

const WATER: &str = "8 0.000 0.000 0.000\n1 0.957 0.000 0.000\n1 -0.240 0.927 0.000\n";
const METHANOL: &str = "6 0.000 0.000 0.000\n8 1.430 0.000 0.000\n1 1.750 0.900 0.000\n\
                        1 -0.360 1.030 0.000\n1 -0.360 -0.510 0.890\n1 -0.360 -0.510 -0.890\n";

fn main() -> mgk::Result<()> {
    let cutoff = 2.0;
    let water = spatial_graph(&PointCloud::parse(WATER, Path::new("water"))?, cutoff)?;
    let methanol = spatial_graph(&PointCloud::parse(METHANOL, Path::new("methanol"))?, cutoff)?;
    for (name, g) in [("water", &water), ("methanol", &methanol)] {
        println!("{name}: {} atoms, {} bonds within {cutoff}", g.node_count(), g.edge_count());
        for e in &g.edges {
            println!("  {}-{}  weight {:.4}  label {:?}", e.i, e.j, e.weight, e.label);
        }
    }

    let path = std::env::temp_dir().join("mgk-methanol.json");
    save_graph(&methanol, &path)?;
    assert_eq!(load_graph(&path)?, methanol);
    println!("saved {}", path.display());

    let kernels = KernelConfig::labeled(
        BaseKernel::KroneckerDelta { h: 0.2 },
        BaseKernel::SquareExponential { alpha: 4.0 },
    );
    for reorder in [ReorderMethod::None, ReorderMethod::Morton] {
        let cfg = SolverConfig { reorder, ..SolverConfig::default() };
        let r = kernel(&water, &methanol, &kernels, &cfg)?;
        println!("K(water, methanol) with {reorder} order = {:.12e}", r.value);
    }
    Ok(())
}
