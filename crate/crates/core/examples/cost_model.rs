//! Predicted operation and byte counts of the four product primitives, and
//! the counters measured from the tiled operator.
//!
//! Run with `cargo run --example cost_model`.

use mgk::operator::{predict_costs, CostModel, CounterReport, Primitive, ProductOperator};
use mgk::tiles::build_tiles;
use mgk::{KernelConfig, LabeledGraph};

fn complete(n: usize) -> LabeledGraph {
    let mut g = LabeledGraph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            g.add_edge(i, j, 1.0);
        }
    }
    g
}

fn main() -> mgk::Result<()> {
    let (n, m) = (32, 24);
    let model = CostModel::new(8.0, 8.0, 5.0);
    println!("{}", CounterReport::CSV_HEADER);
    for p in Primitive::ALL {
        println!("{}", predict_costs(&model, n, m, p).csv_row());
    }

    let unit = CostModel::new(0.0, 8.0, 3.0);
    let (a, b) = (complete(n), complete(m));
    let (ta, tb) = (build_tiles(&a), build_tiles(&b));
    let op = ProductOperator::new(&a, &ta, &b, &tb, &KernelConfig::unlabeled())?;
    op.apply_offdiag(&vec![1.0; n * m])?;
    let measured = op.measure(&unit);
    let predicted = predict_costs(&unit, n, m, Primitive::TilingBlocking);
    println!("\nunlabeled tiling-blocking on complete graphs");
    println!("{:<14} {:>12} {:>12}", "", "predicted", "measured");
    for (name, p, q) in [
        ("flops", predicted.flops, measured.flops),
        ("tier-1 load", predicted.t1_load, measured.t1_load),
        ("tier-1 store", predicted.t1_store, measured.t1_store),
        ("tier-2 load", predicted.t2_load, measured.t2_load),
        ("tier-2 store", predicted.t2_store, measured.t2_store),
    ] {
        println!("{name:<14} {p:>12} {q:>12}");
    }
    Ok(())
}
