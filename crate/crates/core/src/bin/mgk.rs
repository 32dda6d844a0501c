//! Command-line front end: kernels, Gram matrices, reordering, tile
//! statistics, cost-model counters and graph generation.

use std::error::Error as StdError;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mgk::gram::{compute_gram, normalize_gram, save_gram_bin, save_gram_csv};
use mgk::graph::{LabeledGraph, DEFAULT_STOP_PROB, MIN_STOP_PROB};
use mgk::io::{gen_ba, gen_nws, load_dataset, read_graph, save_graph};
use mgk::operator::{predict_costs, CostModel, KernelConfig, Primitive, ProductOperator};
use mgk::reorder::{apply_permutation, nonempty_tiles, objective, Permutation, ReorderMethod};
use mgk::solver::{kernel, SolverConfig};
use mgk::tiles::{build_tiles, tile_histogram};
use mgk::BaseKernel;

type CliResult<T = ()> = Result<T, Box<dyn StdError>>;

#[derive(Parser)]
#[command(name = "mgk", version, about = "Marginalized graph kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel value of one graph pair.
    Kernel(KernelArgs),
    /// Kernel matrix of a dataset.
    Gram(GramArgs),
    /// Node permutation of a graph and its tile objective.
    Reorder(ReorderArgs),
    /// Tile occupancy histogram and per-tile dump.
    Tiles(TilesArgs),
    /// Predicted and measured operation and byte counts.
    Bench(BenchArgs),
    /// Synthetic graph files.
    Gen(GenArgs),
}

#[derive(Args)]
struct KernelOpts {
    /// Ignore labels: vertex and edge kernels are both 1.
    #[arg(long)]
    unlabeled: bool,
    /// Vertex kernel: const1, delta:H, se:ALPHA or poly:C0,C1,...
    #[arg(long, default_value = "const1")]
    vkernel: BaseKernel,
    /// Edge kernel, same grammar as --vkernel.
    #[arg(long, default_value = "const1")]
    ekernel: BaseKernel,
    /// Stopping probability for graphs whose file does not provide one.
    #[arg(long, default_value_t = DEFAULT_STOP_PROB)]
    q: f64,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value = "none")]
    reorder: ReorderMethod,
}

impl KernelOpts {
    fn kernels(&self) -> KernelConfig {
        if self.unlabeled {
            KernelConfig::unlabeled()
        } else {
            KernelConfig::labeled(self.vkernel.clone(), self.ekernel.clone())
        }
    }

    fn solver(&self, deterministic: bool) -> SolverConfig {
        SolverConfig {
            tolerance: self.tol,
            deterministic,
            reorder: self.reorder,
            ..SolverConfig::default()
        }
    }

    fn stop_prob(&self) -> CliResult<f64> {
        if !(MIN_STOP_PROB..=1.0).contains(&self.q) {
            return Err(format!("--q {} outside [{MIN_STOP_PROB}, 1]", self.q).into());
        }
        Ok(self.q)
    }
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    graph_a: PathBuf,
    #[arg(long)]
    graph_b: PathBuf,
    #[command(flatten)]
    opts: KernelOpts,
    /// Write the node-wise similarity matrix as CSV.
    #[arg(long)]
    nodewise: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GramFormat {
    Csv,
    Bin,
}

#[derive(Args)]
struct GramArgs {
    /// Directory of graph files, or a file listing one graph path per line.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: GramFormat,
    /// Scale to a unit diagonal.
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Fixed-order serial operator inside each pair.
    #[arg(long)]
    deterministic: bool,
    #[command(flatten)]
    opts: KernelOpts,
}

#[derive(Args)]
struct ReorderArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    method: ReorderMethod,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the reordered graph.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TilesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "none")]
    reorder: ReorderMethod,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value = "tiling-blocking")]
    primitive: Primitive,
    /// Bytes per edge label.
    #[arg(long = "E", default_value_t = 0.0)]
    e: f64,
    /// Bytes per float.
    #[arg(long = "F", default_value_t = 4.0)]
    f: f64,
    /// Flops per fused multiply-kernel-accumulate.
    #[arg(long = "X", default_value_t = 3.0)]
    x: f64,
    /// Run the operator once on complete graphs and report its counters.
    #[arg(long)]
    measure: bool,
    /// Emit CSV rows instead of the text report.
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenModel {
    Nws,
    Ba,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: GenModel,
    #[arg(long)]
    n: usize,
    /// Ring neighbors (nws).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Shortcut probability (nws).
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Edges per new node (ba).
    #[arg(long, default_value_t = 6)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Graph `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn run_kernel(args: KernelArgs) -> CliResult {
    let q = args.opts.stop_prob()?;
    let a = read_graph(&args.graph_a, q)?;
    let b = read_graph(&args.graph_b, q)?;
    let r = kernel(&a, &b, &args.opts.kernels(), &args.opts.solver(false))?;
    println!("value {:e}", r.value);
    println!("iterations {}", r.iterations);
    println!("residual {:e}", r.final_residual);
    println!("converged {}", r.converged);
    if let Some(path) = args.nodewise {
        write(&path, r.nodewise_csv())?;
    }
    if !r.converged {
        return Err("solver did not converge".into());
    }
    Ok(())
}

fn run_gram(args: GramArgs) -> CliResult {
    let q = args.opts.stop_prob()?;
    let entries = load_dataset(&args.dataset, q)?;
    let ids: Vec<String> = entries.iter().map(|e| e.id.clone()).collect();
    let graphs: Vec<LabeledGraph> = entries.into_iter().map(|e| e.graph).collect();
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = compute_gram(
        &graphs,
        &args.opts.kernels(),
        &args.opts.solver(args.deterministic),
        workers,
    )?;
    let values = if args.normalize {
        normalize_gram(&result.values, result.size)?
    } else {
        result.values.clone()
    };
    match args.format {
        GramFormat::Csv => save_gram_csv(&args.out, &ids, &values)?,
        GramFormat::Bin => save_gram_bin(&args.out, &values, result.size)?,
    }
    let unconverged = result.converged.iter().filter(|c| !**c).count();
    eprintln!(
        "{} graphs, {} pairs, {} workers, {:.3} s",
        result.size,
        result.order.len(),
        workers,
        result.wall_time.as_secs_f64()
    );
    for (a, b, msg) in &result.failures {
        eprintln!("pair ({}, {}) failed: {msg}", ids[*a], ids[*b]);
    }
    if unconverged > 0 {
        eprintln!("{} matrix entries flagged as not converged", unconverged);
    }
    Ok(())
}

fn run_reorder(args: ReorderArgs) -> CliResult {
    let g = read_graph(&args.graph, DEFAULT_STOP_PROB)?;
    let perm = args.method.permutation(&g, args.seed)?;
    let natural = Permutation::identity(g.node_count());
    let order: Vec<String> = perm.inverse().iter().map(|v| v.to_string()).collect();
    println!("order {}", order.join(" "));
    println!("objective {} -> {}", objective(&g, &natural), objective(&g, &perm));
    println!("nonempty_tiles {} -> {}", nonempty_tiles(&g, &natural), nonempty_tiles(&g, &perm));
    if let Some(out) = args.out {
        save_graph(&apply_permutation(&g, &perm)?, &out)?;
    }
    Ok(())
}

fn run_tiles(args: TilesArgs) -> CliResult {
    let g = read_graph(&args.graph, DEFAULT_STOP_PROB)?;
    let perm = args.reorder.permutation(&g, 0)?;
    let g = apply_permutation(&g, &perm)?;
    let tiles = build_tiles(&g);
    print!("{}", tile_histogram(&tiles).render());
    print!("{}", tiles.debug_dump());
    Ok(())
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

fn run_bench(args: BenchArgs) -> CliResult {
    let model = CostModel::new(args.e, args.f, args.x);
    model.validate()?;
    let predicted = predict_costs(&model, args.n, args.m, args.primitive);
    let measured = if args.measure {
        if args.primitive != Primitive::TilingBlocking {
            return Err("--measure is only available for the tiling-blocking primitive".into());
        }
        let (a, b) = (complete_graph(args.n), complete_graph(args.m));
        let (ta, tb) = (build_tiles(&a), build_tiles(&b));
        let op = ProductOperator::new(&a, &ta, &b, &tb, &KernelConfig::unlabeled())?;
        op.apply_offdiag(&vec![1.0; args.n * args.m])?;
        Some(op.measure(&model))
    } else {
        None
    };
    if args.csv {
        println!("source,{}", mgk::operator::CounterReport::CSV_HEADER);
        println!("predicted,{}", predicted.csv_row());
        if let Some(m) = &measured {
            println!("measured,{}", m.csv_row());
        }
        return Ok(());
    }
    println!("predicted\n{predicted}");
    if let Some(m) = measured {
        println!("measured\n{m}");
        let same = |x: f64, y: f64| if x == y { "equal" } else { "differs" };
        println!("flops          {}", same(m.flops, predicted.flops));
        println!("tier-1 load    {}", same(m.t1_load, predicted.t1_load));
        println!("tier-1 store   {}", same(m.t1_store, predicted.t1_store));
        println!("tier-2 load    {}", same(m.t2_load, predicted.t2_load));
        println!("tier-2 store   {}", same(m.t2_store, predicted.t2_store));
    }
    Ok(())
}

fn run_gen(args: GenArgs) -> CliResult {
    fs::create_dir_all(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    let prefix = match args.model {
        GenModel::Nws => "nws",
        GenModel::Ba => "ba",
    };
    for i in 0..args.count {
        let seed = args.seed.wrapping_add(i as u64);
        let g = match args.model {
            GenModel::Nws => gen_nws(args.n, args.k, args.p, seed)?,
            GenModel::Ba => gen_ba(args.n, args.m, seed)?,
        };
        save_graph(&g, &args.out.join(format!("{prefix}_{i:04}.json")))?;
    }
    Ok(())
}

fn write(path: &Path, text: String) -> CliResult {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Kernel(a) => run_kernel(a),
        Command::Gram(a) => run_gram(a),
        Command::Reorder(a) => run_reorder(a),
        Command::Tiles(a) => run_tiles(a),
        Command::Bench(a) => run_bench(a),
        Command::Gen(a) => run_gen(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
