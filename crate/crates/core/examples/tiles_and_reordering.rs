//! How node order changes the number of non-empty 8x8 tiles, and that the
//! kernel value does not depend on it.
//!
//! Run with `cargo run --release --example tiles_and_reordering`.

use mgk::reorder::{apply_permutation, nonempty_tiles, Permutation};
use mgk::tiles::{build_tiles, tile_histogram};
use mgk::{gen_ba, gen_nws, kernel, KernelConfig, ReorderMethod, SolverConfig};

fn main() -> mgk::Result<()> {
    let graphs = [("small-world", gen_nws(400, 3, 0.1, 7)?), ("scale-free", gen_ba(400, 3, 7)?)];
    for (name, g) in &graphs {
        println!("{name}: {} nodes, {} edges", g.node_count(), g.edge_count());
        let natural = nonempty_tiles(g, &Permutation::identity(g.node_count()));
        println!("  {:<8} {natural:>6} tiles", "natural");
        for method in [ReorderMethod::Rcm, ReorderMethod::Pbr] {
            let perm = method.permutation(g, 0)?;
            println!("  {:<8} {:>6} tiles", method.to_string(), nonempty_tiles(g, &perm));
        }
    }

    let (_, g) = &graphs[0];
    let perm = ReorderMethod::Pbr.permutation(g, 0)?;
    let tiled = build_tiles(&apply_permutation(g, &perm)?);
    println!("\nsmall-world after PBR:\n{}", tile_histogram(&tiled).render());

    let other = gen_nws(64, 2, 0.3, 8)?;
    let kernels = KernelConfig::unlabeled();
    for reorder in [ReorderMethod::None, ReorderMethod::Rcm, ReorderMethod::Pbr] {
        let cfg = SolverConfig { reorder, ..SolverConfig::default() };
        println!("K with {:<6} = {:.15e}", reorder.to_string(), kernel(g, &other, &kernels, &cfg)?.value);
    }
    Ok(())
}
