//! Cross-check the tiled PCG solver against a dense Cholesky solve and a
//! fixed-point walk summation.
//!
//! Run with `cargo run --release --example oracles`.

use mgk::solver::{direct_solve_oracle, fixed_point_oracle, FixedPointOptions};
use mgk::{gen_ba, gen_nws, kernel, KernelConfig, SolverConfig};

fn main() -> mgk::Result<()> {
    let pairs = [
        (gen_nws(20, 2, 0.2, 1)?, gen_nws(17, 3, 0.1, 2)?),
        (gen_ba(24, 2, 3)?, gen_ba(30, 3, 4)?),
        (gen_nws(9, 1, 0.0, 5)?, gen_ba(40, 4, 6)?),
    ];
    let kernels = KernelConfig::unlabeled();
    let cfg = SolverConfig::default();

    println!("{:>6} {:>6} {:>16} {:>10} {:>10} {:>6}", "n", "m", "PCG", "|direct|", "|fixed|", "iters");
    for (a, b) in &pairs {
        let pcg = kernel(a, b, &kernels, &cfg)?;
        let direct = direct_solve_oracle(a, b, &kernels, cfg.oracle_guard)?;
        let fixed = fixed_point_oracle(a, b, &kernels, &FixedPointOptions::default())?;
        let rel = |x: f64| (x - pcg.value).abs() / pcg.value.abs();
        println!(
            "{:>6} {:>6} {:>16.9e} {:>10.2e} {:>10.2e} {:>6}",
            a.node_count(),
            b.node_count(),
            pcg.value,
            rel(direct.value),
            rel(fixed.value),
            pcg.iterations
        );
    }
    Ok(())
}
