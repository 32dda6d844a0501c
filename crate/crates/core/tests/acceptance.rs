//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! gating failure.

mod common;

use std::time::{Duration, Instant};

use common::{random_graph, random_pair, random_permutation, random_vector, rel_diff, rel_linf};
use mgk::gram::{compute_gram, eigenvalue_range, normalize_gram};
use mgk::io::{gen_ba, gen_nws, spatial_graph, PointCloud, Sampler};
use mgk::operator::{
    naive_dense_apply, predict_costs, tile_product_dense_dense, tile_product_dense_sparse,
    tile_product_sparse_dense, tile_product_sparse_sparse, CostModel, KernelConfig, KernelEdges,
    Primitive, ProductOperator, Selection, TileKernel, DEFAULT_DENSE_GUARD,
};
use mgk::reorder::{
    apply_permutation, nonempty_tiles, objective_with, pbr_reorder, pbr_reorder_with, Permutation,
    PbrOptions, ReorderMethod,
};
use mgk::solver::{direct_solve_oracle, fixed_point_oracle, kernel, FixedPointOptions, SolverConfig};
use mgk::tiles::{build_tiles, Tile, TILE_AREA};
use mgk::{BaseKernel, Label, LabeledGraph};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn labeled_kernels() -> KernelConfig {
    KernelConfig::labeled(
        BaseKernel::KroneckerDelta { h: 0.5 },
        BaseKernel::SquareExponential { alpha: 1.0 },
    )
}

fn kernels_for(labeled: bool) -> KernelConfig {
    if labeled {
        labeled_kernels()
    } else {
        KernelConfig::unlabeled()
    }
}

fn oracle_triad() -> Outcome {
    let start = Instant::now();
    let mut rng = Sampler::new(0x7121);
    let cfg = SolverConfig::default();
    let fp = FixedPointOptions::default();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for trial in 0..200 {
        let labeled = trial % 2 == 0;
        let (a, b) = random_pair(&mut rng, 24, labeled);
        let k = kernels_for(labeled);
        let run = || -> mgk::Result<(f64, f64, f64)> {
            let cg = kernel(&a, &b, &k, &cfg)?;
            if !cg.converged {
                return Err(mgk::Error::InvalidParameter("cg did not converge".into()));
            }
            let direct = direct_solve_oracle(&a, &b, &k, DEFAULT_DENSE_GUARD)?;
            let fixed = fixed_point_oracle(&a, &b, &k, &fp)?;
            if !fixed.converged {
                return Err(mgk::Error::InvalidParameter("fixed point did not converge".into()));
            }
            Ok((cg.value, direct.value, fixed.value))
        };
        match run() {
            Ok((c, d, f)) => {
                let err = rel_diff(c, d).max(rel_diff(c, f)).max(rel_diff(d, f));
                worst = worst.max(err);
                if err > 1e-6 {
                    failures.push(format!("trial {trial}: {c} {d} {f}"));
                }
            }
            Err(e) => failures.push(format!("trial {trial}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "200 pairs, worst pairwise relative difference {worst:.2e} (limit 1e-6), {:.1} s (limit 60 s){}",
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn closed_forms() -> Outcome {
    let mut a = LabeledGraph::with_stop_prob(1, 0.3);
    a.set_node_labels(vec![Label::Cat(0)]);
    let mut b = LabeledGraph::with_stop_prob(1, 0.3);
    b.set_node_labels(vec![Label::Cat(1)]);
    let k = KernelConfig::labeled(BaseKernel::KroneckerDelta { h: 0.8 }, BaseKernel::ConstantOne);
    let single = kernel(&a, &b, &k, &SolverConfig::default()).map(|r| r.value);
    let want_single = 1.0 * 1.0 * 0.8 * 0.3 * 0.3;

    let mut p2 = LabeledGraph::with_stop_prob(2, 0.5);
    p2.add_edge(0, 1, 1.0);
    let pair = kernel(&p2, &p2, &KernelConfig::unlabeled(), &SolverConfig::default()).map(|r| r.value);

    match (single, pair) {
        (Ok(s), Ok(p)) => {
            let e1 = (s - want_single).abs();
            let e2 = (p - 0.45).abs();
            Outcome::new(
                e1 <= 1e-14 && e2 <= 1e-10,
                format!("single-node {s} vs {want_single} (|diff| {e1:.1e}), P2xP2 {p} vs 0.45 (|diff| {e2:.1e})"),
            )
        }
        (s, p) => Outcome::new(false, format!("solver error: {s:?} {p:?}")),
    }
}

fn matrix_free_equivalence() -> Outcome {
    let mut rng = Sampler::new(0xe9);
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for trial in 0..1000 {
        let labeled = trial % 2 == 1;
        let (a, b) = random_pair(&mut rng, 20, labeled);
        let k = kernels_for(labeled);
        let p = random_vector(&mut rng, a.node_count() * b.node_count());
        let (ta, tb) = (build_tiles(&a), build_tiles(&b));
        let got = ProductOperator::new(&a, &ta, &b, &tb, &k).and_then(|op| op.apply_offdiag(&p));
        let want = naive_dense_apply(&a, &b, &k, &p, DEFAULT_DENSE_GUARD);
        match (got, want) {
            (Ok(g), Ok(w)) => worst = worst.max(rel_linf(&g, &w)),
            (g, w) => errors.push(format!("trial {trial}: {:?} {:?}", g.err(), w.err())),
        }
    }
    Outcome::new(
        errors.is_empty() && worst <= 1e-12,
        format!("1000 pairs, worst relative L-inf {worst:.2e} (limit 1e-12){}", errors.join("; ")),
    )
}

fn complete_graph(n: usize) -> LabeledGraph {
    let mut g = LabeledGraph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            g.add_edge(i, j, 1.0);
        }
    }
    g
}

fn counter_exactness() -> Outcome {
    let model = CostModel::UNLABELED_F32;
    let mut notes = Vec::new();
    let mut pass = true;
    for n in [8usize, 16, 32] {
        let g = complete_graph(n);
        let t = build_tiles(&g);
        let op = ProductOperator::new(&g, &t, &g, &t, &KernelConfig::unlabeled()).expect("operator");
        op.apply_offdiag(&vec![1.0; n * n]).expect("apply");
        let got = op.measure(&model);
        let nm2 = (n * n * n * n) as f64;
        let flops = nm2 * model.x;
        let load = nm2 * (model.e + 2.0 * model.f) / (model.t * model.t);
        let ok = got.flops == flops && got.t1_load == load;
        pass &= ok;
        notes.push(format!("n=m={n}: flops {} / {flops}, t1 load {} / {load}", got.flops, got.t1_load));
    }

    // Closed-form cells at (E, F, X, t, r) = (0, 4, 3, 8, 8), n = m = 16.
    type Cells = (f64, f64, f64, f64, f64, f64, Option<f64>);
    let table: [(Primitive, Cells); 4] = [
        (Primitive::Naive, (131072.0, 262144.0, 1024.0, 0.0, 0.0, 0.5, None)),
        (
            Primitive::SharedTiling,
            (196608.0, 8192.0, 1024.0, 557056.0, 8192.0, 24.0, Some(3.0 / 8.5)),
        ),
        (
            Primitive::RegisterBlocking,
            (196608.0, 8192.0, 1024.0, 262144.0, 4096.0, 24.0, Some(3.0 / 4.0625)),
        ),
        (
            Primitive::TilingBlocking,
            (196608.0, 8192.0, 1024.0, 65536.0, 4096.0, 24.0, Some(3.0)),
        ),
    ];
    let mut cells = 0;
    for (prim, want) in table {
        let r = predict_costs(&model, 16, 16, prim);
        let got = (r.flops, r.t1_load, r.t1_store, r.t2_load, r.t2_store, r.ai1, r.ai2);
        cells += 7;
        if got != want {
            pass = false;
            notes.push(format!("{prim}: got {got:?}, want {want:?}"));
        }
    }
    notes.push(format!("{cells} predicted cells checked"));
    Outcome::new(pass, notes.join("; "))
}

fn random_tile(rng: &mut Sampler, nnz: usize) -> Tile {
    let mut slots: Vec<usize> = (0..TILE_AREA).collect();
    for k in 0..nnz {
        let j = k + rng.below((TILE_AREA - k) as u64) as usize;
        slots.swap(k, j);
    }
    let bitmap = slots[..nnz].iter().fold(0u64, |b, &s| b | (1 << s));
    Tile {
        row: 0,
        col: 0,
        bitmap,
        weights: (0..nnz).map(|_| 0.5 + rng.uniform()).collect(),
        labels: Some((0..nnz).map(|_| Label::scalar(2.0 * rng.uniform())).collect()),
    }
}

fn sparsity() -> Outcome {
    let mut rng = Sampler::new(0x5a);
    let edge = BaseKernel::SquareExponential { alpha: 1.0 };
    let sim = KernelEdges(&edge);
    let mut worst_micro = 0.0f64;
    for nnz_a in 1..=TILE_AREA {
        for nnz_b in 1..=TILE_AREA {
            let (a, b) = (random_tile(&mut rng, nnz_a), random_tile(&mut rng, nnz_b));
            let (ea, eb) = (a.expand(), b.expand());
            let mut p = [0.0; TILE_AREA];
            p.iter_mut().for_each(|v| *v = 2.0 * rng.uniform() - 1.0);
            let mut reference = [0.0; TILE_AREA];
            tile_product_dense_dense(&ea, &eb, &sim, &p, &mut reference);
            let mut ds = [0.0; TILE_AREA];
            tile_product_dense_sparse(&ea, &b, &sim, &p, &mut ds);
            let mut sd = [0.0; TILE_AREA];
            tile_product_sparse_dense(&a, &eb, &sim, &p, &mut sd);
            let mut ss = [0.0; TILE_AREA];
            tile_product_sparse_sparse(&a, &b, &sim, &p, &mut ss);
            for v in [&ds, &sd, &ss] {
                worst_micro = worst_micro.max(rel_linf(v, &reference));
            }
        }
    }

    let mut worst_hybrid = 0.0f64;
    let mut hybrid_pairs = [0u64; 4];
    for trial in 0..60 {
        let labeled = trial % 2 == 0;
        let (a, b) = if trial < 40 {
            let n = 1 + rng.below(48) as usize;
            let m = 1 + rng.below(48) as usize;
            let density = 0.02 + 0.6 * rng.uniform();
            (random_graph(&mut rng, n, density, labeled), random_graph(&mut rng, m, density, labeled))
        } else {
            let s = trial as u64;
            (gen_nws(96, 3, 0.1, s).unwrap(), gen_ba(64, 6, s).unwrap())
        };
        let k = if trial < 40 { kernels_for(labeled) } else { KernelConfig::unlabeled() };
        let (ta, tb) = (build_tiles(&a), build_tiles(&b));
        let p = random_vector(&mut rng, a.node_count() * b.node_count());
        let hybrid = ProductOperator::new(&a, &ta, &b, &tb, &k).expect("operator");
        let dense = ProductOperator::new(&a, &ta, &b, &tb, &k)
            .expect("operator")
            .with_selection(Selection::Always(TileKernel::DenseDense));
        let h = hybrid.apply_offdiag(&p).expect("apply");
        let d = dense.apply_offdiag(&p).expect("apply");
        worst_hybrid = worst_hybrid.max(rel_linf(&h, &d));
        let c = hybrid.counters();
        for kind in TileKernel::ALL {
            hybrid_pairs[kind.index()] += c.pairs_of(kind);
        }
    }

    let bound = (96u64 / 8).pow(4);
    let mut max_pairs = 0;
    for s in 0..8 {
        let (a, b) = (gen_nws(96, 3, 0.1, 2 * s).unwrap(), gen_nws(96, 3, 0.1, 2 * s + 1).unwrap());
        let (ta, tb) = (build_tiles(&a), build_tiles(&b));
        let op = ProductOperator::new(&a, &ta, &b, &tb, &KernelConfig::unlabeled()).expect("operator");
        op.apply_offdiag(&vec![1.0; 96 * 96]).expect("apply");
        max_pairs = max_pairs.max(op.counters().total_tile_pairs());
    }
    let used = hybrid_pairs.iter().filter(|&&c| c > 0).count();
    Outcome::new(
        worst_micro <= 1e-12 && worst_hybrid <= 1e-12 && max_pairs < bound,
        format!(
            "micro-kernels over all 4096 (nnzA, nnzB): worst {worst_micro:.2e}; hybrid vs dense: worst {worst_hybrid:.2e} \
             ({used}/4 variants exercised); NWS tile pairs at most {max_pairs} < {bound}"
        ),
    )
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2] as f64
    } else {
        (v[k / 2 - 1] + v[k / 2]) as f64 / 2.0
    }
}

fn reordering() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, graphs) in [
        ("NWS(96,3,0.1)", (0..32).map(|s| gen_nws(96, 3, 0.1, s).unwrap()).collect::<Vec<_>>()),
        ("BA(96,6)", (0..32).map(|s| gen_ba(96, 6, s).unwrap()).collect()),
    ] {
        let (mut nat, mut pbr, mut rcm) = (Vec::new(), Vec::new(), Vec::new());
        for g in &graphs {
            let n = g.node_count();
            nat.push(nonempty_tiles(g, &Permutation::identity(n)));
            pbr.push(nonempty_tiles(g, &pbr_reorder(g, 0)));
            rcm.push(nonempty_tiles(g, &ReorderMethod::Rcm.permutation(g, 0).unwrap()));
        }
        let never_worse = nat.iter().zip(&pbr).all(|(n, p)| p <= n);
        let (mn, mp, mr) = (median(nat), median(pbr), median(rcm));
        pass &= never_worse && mp <= mr;
        notes.push(format!(
            "{name}: PBR <= natural on every graph: {never_worse}; median tiles natural {mn}, PBR {mp}, RCM {mr}"
        ));
    }

    let mut four = LabeledGraph::new(4);
    four.add_edge(0, 2, 1.0).add_edge(1, 3, 1.0);
    let opts = PbrOptions {
        group: 2,
        ..PbrOptions::default()
    };
    let perm = pbr_reorder_with(&four, &opts);
    let obj = objective_with(&four, &perm, 2);
    pass &= obj == 0;
    notes.push(format!("4-node instance objective {obj}"));

    let mut rng = Sampler::new(0x40);
    let mut worst = 0.0f64;
    let cfg = SolverConfig::default();
    let methods = [ReorderMethod::Pbr, ReorderMethod::Rcm, ReorderMethod::Morton];
    for s in 0..6u64 {
        let pairs = [
            (gen_nws(96, 3, 0.1, s).unwrap(), gen_ba(96, 6, s).unwrap(), KernelConfig::unlabeled()),
            {
                let (a, b) = random_pair(&mut rng, 40, true);
                (a, b, labeled_kernels())
            },
            (spatial(&mut rng, 30), spatial(&mut rng, 45), labeled_kernels()),
        ];
        for (a, b, k) in pairs {
            let base = kernel(&a, &b, &k, &cfg).unwrap().value;
            for method in methods {
                if method == ReorderMethod::Morton && a.positions.is_none() {
                    continue;
                }
                let c = SolverConfig {
                    reorder: method,
                    reorder_seed: s,
                    ..cfg
                };
                worst = worst.max(rel_diff(base, kernel(&a, &b, &k, &c).unwrap().value));
            }
        }
    }
    pass &= worst <= 1e-8;
    notes.push(format!("kernel change under reordering {worst:.2e} (limit 1e-8)"));
    Outcome::new(pass, notes.join("; "))
}

fn spatial(rng: &mut Sampler, n: usize) -> LabeledGraph {
    let coords = (0..n)
        .map(|_| (0..3).map(|_| 6.0 * rng.uniform()).collect())
        .collect();
    let labels = (0..n).map(|_| rng.below(3) as i64).collect();
    spatial_graph(&PointCloud::new(coords, labels).unwrap(), 2.0).unwrap()
}

fn invariance() -> Outcome {
    let mut rng = Sampler::new(0x1a);
    let cfg = SolverConfig::default();
    let (mut worst_perm, mut worst_swap) = (0.0f64, 0.0f64);
    for trial in 0..100 {
        let labeled = trial % 2 == 0;
        let (a, b) = random_pair(&mut rng, 32, labeled);
        let k = kernels_for(labeled);
        let base = kernel(&a, &b, &k, &cfg).unwrap().value;
        let pa = random_permutation(&mut rng, a.node_count());
        let pb = random_permutation(&mut rng, b.node_count());
        let (ra, rb) = (apply_permutation(&a, &pa).unwrap(), apply_permutation(&b, &pb).unwrap());
        worst_perm = worst_perm.max(rel_diff(base, kernel(&ra, &rb, &k, &cfg).unwrap().value));
        worst_swap = worst_swap.max(rel_diff(base, kernel(&b, &a, &k, &cfg).unwrap().value));
    }

    let dataset: Vec<LabeledGraph> = (0..32)
        .map(|_| {
            let n = 4 + rng.below(37) as usize;
            let density = 0.08 + 0.3 * rng.uniform();
            random_graph(&mut rng, n, density, true)
        })
        .collect();
    let k = labeled_kernels();
    let runs: Vec<_> = [1, 2, 4, 7]
        .iter()
        .map(|&w| compute_gram(&dataset, &k, &cfg, w).unwrap())
        .collect();
    let g = &runs[0];
    let n = g.size;
    let symmetric = (0..n).all(|a| (0..n).all(|b| g.get(a, b).to_bits() == g.get(b, a).to_bits()));
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let deterministic = runs.iter().all(|r| bits(&r.values) == bits(&g.values));
    let normalized = normalize_gram(&g.values, n).unwrap();
    let (lo, hi) = eigenvalue_range(&normalized, n);
    let psd = lo >= -1e-8 * hi;
    let pass = worst_perm <= 1e-8 && worst_swap <= 1e-10 && symmetric && deterministic && psd && g.all_converged();
    Outcome::new(
        pass,
        format!(
            "permutation {worst_perm:.2e} (limit 1e-8), swap {worst_swap:.2e} (limit 1e-10), \
             Gram symmetric {symmetric}, workers 1/2/4/7 bit-identical {deterministic}, \
             normalized eigenvalues [{lo:.3e}, {hi:.3e}]"
        ),
    )
}

/// Dense on-the-fly product without tiles, the untiled reference loop.
fn dense_on_the_fly(a: &LabeledGraph, b: &LabeledGraph, p: &[f64]) -> Vec<f64> {
    let dense = |g: &LabeledGraph| {
        let n = g.node_count();
        let mut w = vec![0.0; n * n];
        for (i, j, x, _) in g.symmetric_entries() {
            w[i * n + j] = x;
        }
        w
    };
    let (n, m) = (a.node_count(), b.node_count());
    let (wa, wb) = (dense(a), dense(b));
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for ip in 0..m {
            let mut s = 0.0;
            for j in 0..n {
                for jp in 0..m {
                    s += wa[i * n + j] * wb[ip * m + jp] * p[j * m + jp];
                }
            }
            out[i * m + ip] = s;
        }
    }
    out
}

fn soft_performance() -> Outcome {
    let (a, b) = (gen_nws(96, 3, 0.1, 1).unwrap(), gen_nws(96, 3, 0.1, 2).unwrap());
    let (ta, tb) = (build_tiles(&a), build_tiles(&b));
    let op = ProductOperator::new(&a, &ta, &b, &tb, &KernelConfig::unlabeled()).unwrap();
    let p = vec![1.0; 96 * 96];
    let reps = 5;
    let t0 = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(op.apply_offdiag(&p).unwrap());
    }
    let tiled = t0.elapsed() / reps;
    let t1 = Instant::now();
    let dense = std::hint::black_box(dense_on_the_fly(&a, &b, &p));
    let untiled = t1.elapsed();
    let agree = rel_linf(&op.apply_offdiag(&p).unwrap(), &dense) <= 1e-12;
    Outcome::new(
        agree && tiled < untiled,
        format!(
            "NWS(96,3,0.1) pair: tiled {:.3} ms vs untiled dense {:.3} ms",
            tiled.as_secs_f64() * 1e3,
            untiled.as_secs_f64() * 1e3
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, bool); 8] = [
        ("oracle triad", oracle_triad, true),
        ("closed forms", closed_forms, true),
        ("matrix-free equivalence", matrix_free_equivalence, true),
        ("counter exactness", counter_exactness, true),
        ("sparsity exploitation", sparsity, true),
        ("reordering", reordering, true),
        ("invariance suite", invariance, true),
        ("tiled faster than untiled (non-gating)", soft_performance, false),
    ];
    let mut failed = 0;
    for (name, check, gating) in criteria {
        let start = Instant::now();
        let out = check();
        let tag = match (out.pass, gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "SOFT-FAIL",
        };
        if !out.pass && gating {
            failed += 1;
        }
        println!("[{tag}] {name} ({:.1} s): {}", start.elapsed().as_secs_f64(), out.detail);
    }
    println!("acceptance: {} gating criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
