//! All-pairs kernel matrices over a dataset.
//!
//! Pairs are scheduled longest first by an `nnz_a · nnz_b` cost estimate
//! and consumed from a shared queue by a fixed number of worker threads.
//! Every graph is reordered and tiled once up front. A pair that fails or
//! does not converge is stored as NaN and flagged; the batch never aborts.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{validate_dataset, LabeledGraph};
use crate::operator::KernelConfig;
use crate::solver::{kernel_prepared, PreparedGraph, SolverConfig};

/// Per-graph size figures used for scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub nodes: usize,
    /// Stored adjacency nonzeros, twice the edge count.
    pub nnz: usize,
}

impl GraphStats {
    pub fn of(g: &LabeledGraph) -> Self {
        GraphStats {
            nodes: g.node_count(),
            nnz: 2 * g.edge_count(),
        }
    }
}

/// Estimated cost `n_a n_b (nnz_a / n_a) (nnz_b / n_b)` of one pair, in
/// the equivalent integer form `nnz_a · nnz_b`.
pub fn pair_cost(a: GraphStats, b: GraphStats) -> u128 {
    a.nnz as u128 * b.nnz as u128
}

/// All unordered pairs `(a, b)`, `a <= b`, by descending cost, ties in
/// lexicographic order.
pub fn schedule_pairs(stats: &[GraphStats]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..stats.len())
        .flat_map(|a| (a..stats.len()).map(move |b| (a, b)))
        .collect();
    pairs.sort_by(|&(a, b), &(c, d)| {
        pair_cost(stats[c], stats[d])
            .cmp(&pair_cost(stats[a], stats[b]))
            .then((a, b).cmp(&(c, d)))
    });
    pairs
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramResult {
    pub size: usize,
    /// Row-major `size x size` kernel values.
    pub values: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    /// Pairs that raised an error, with the message.
    pub failures: Vec<(usize, usize, String)>,
    pub wall_time: Duration,
    pub order: Vec<(usize, usize)>,
}

impl GramResult {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.size + b]
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

struct PairOutcome {
    pair: (usize, usize),
    value: f64,
    iterations: usize,
    converged: bool,
    error: Option<String>,
}

/// Kernel values of every pair of `dataset`, diagonal included, computed by
/// `workers` threads. The values do not depend on the worker count.
pub fn compute_gram(
    dataset: &[LabeledGraph],
    kernels: &KernelConfig,
    cfg: &SolverConfig,
    workers: usize,
) -> Result<GramResult> {
    let start = Instant::now();
    validate_dataset(dataset)?;
    cfg.validate()?;
    let prepared = dataset
        .iter()
        .map(|g| PreparedGraph::new(g, cfg.reorder, cfg.reorder_seed))
        .collect::<Result<Vec<_>>>()?;
    let stats: Vec<GraphStats> = dataset.iter().map(GraphStats::of).collect();
    let order = schedule_pairs(&stats);

    let next = AtomicUsize::new(0);
    let outcomes: Vec<PairOutcome> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers.max(1))
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        let Some(&(a, b)) = order.get(k) else { break };
                        local.push(match kernel_prepared(&prepared[a], &prepared[b], kernels, cfg) {
                            Ok(r) => PairOutcome {
                                pair: (a, b),
                                value: if r.converged { r.value } else { f64::NAN },
                                iterations: r.iterations,
                                converged: r.converged,
                                error: None,
                            },
                            Err(e) => PairOutcome {
                                pair: (a, b),
                                value: f64::NAN,
                                iterations: 0,
                                converged: false,
                                error: Some(e.to_string()),
                            },
                        });
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("gram worker panicked"))
            .collect()
    });

    let size = dataset.len();
    let mut values = vec![f64::NAN; size * size];
    let mut iterations = vec![0; size * size];
    let mut converged = vec![false; size * size];
    let mut failures = Vec::new();
    for o in outcomes {
        let (a, b) = o.pair;
        for (x, y) in [(a, b), (b, a)] {
            values[x * size + y] = o.value;
            iterations[x * size + y] = o.iterations;
            converged[x * size + y] = o.converged;
        }
        if let Some(msg) = o.error {
            failures.push((a, b, msg));
        }
    }
    failures.sort_by_key(|f| (f.0, f.1));
    Ok(GramResult {
        size,
        values,
        iterations,
        converged,
        failures,
        wall_time: start.elapsed(),
        order,
    })
}

/// `K[a][b] / sqrt(K[a][a] K[b][b])` with an exact unit diagonal. NaN
/// entries stay NaN.
pub fn normalize_gram(values: &[f64], size: usize) -> Result<Vec<f64>> {
    if values.len() != size * size {
        return Err(Error::DimensionMismatch {
            expected: size * size,
            found: values.len(),
        });
    }
    let diag: Vec<f64> = (0..size).map(|a| values[a * size + a]).collect();
    if let Some(index) = diag.iter().position(|&d| d <= 0.0) {
        return Err(Error::NonPositiveDiagonal {
            index,
            value: diag[index],
        });
    }
    let mut out = vec![0.0; size * size];
    for a in 0..size {
        for b in 0..size {
            out[a * size + b] = if a == b && !diag[a].is_nan() {
                1.0
            } else {
                values[a * size + b] / (diag[a] * diag[b]).sqrt()
            };
        }
    }
    Ok(out)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigenvalue_range(values: &[f64], size: usize) -> (f64, f64) {
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(size, size, values)).eigenvalues;
    eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Header row of ids, then one row of values per graph.
pub fn write_gram_csv<W: Write>(mut w: W, ids: &[String], values: &[f64]) -> std::io::Result<()> {
    writeln!(w, "{}", ids.join(","))?;
    for row in values.chunks(ids.len().max(1)) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn save_gram_csv(path: &Path, ids: &[String], values: &[f64]) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_gram_csv(std::io::BufWriter::new(f), ids, values).map_err(|e| Error::io(path, e))
}

/// Read a CSV written by [`save_gram_csv`]: `(ids, values)`.
pub fn load_gram_csv(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(f).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::parse(path, "empty file")),
    };
    let ids: Vec<String> = if header.is_empty() {
        Vec::new()
    } else {
        header.split(',').map(str::to_string).collect()
    };
    let mut values = Vec::with_capacity(ids.len() * ids.len());
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        for (col, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::parse(path, format!("line {}, column {}: bad number `{cell}`", row + 2, col + 1))
            })?;
            values.push(v);
        }
    }
    if values.len() != ids.len() * ids.len() {
        return Err(Error::parse(
            path,
            format!("expected {} values, found {}", ids.len() * ids.len(), values.len()),
        ));
    }
    Ok((ids, values))
}

const GRAM_MAGIC: &[u8; 4] = b"GRAM";
const GRAM_VERSION: u8 = 1;

/// `GRAM`, version byte 1, `u64` LE count `N`, then `N²` LE `f64` row-major.
pub fn encode_gram(values: &[f64], size: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(13 + 8 * values.len());
    out.extend_from_slice(GRAM_MAGIC);
    out.push(GRAM_VERSION);
    out.extend_from_slice(&(size as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Inverse of [`encode_gram`]: `(size, values)`.
pub fn decode_gram(bytes: &[u8]) -> std::result::Result<(usize, Vec<f64>), String> {
    if bytes.len() < 13 || &bytes[..4] != GRAM_MAGIC {
        return Err("missing GRAM header".into());
    }
    if bytes[4] != GRAM_VERSION {
        return Err(format!("unsupported version {}", bytes[4]));
    }
    let size = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes")) as usize;
    let body = &bytes[13..];
    let expected = size.checked_mul(size).and_then(|c| c.checked_mul(8));
    if expected != Some(body.len()) {
        return Err(format!("body holds {} bytes, expected {size}² doubles", body.len()));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((size, values))
}

pub fn save_gram_bin(path: &Path, values: &[f64], size: usize) -> Result<()> {
    fs::write(path, encode_gram(values, size)).map_err(|e| Error::io(path, e))
}

pub fn load_gram_bin(path: &Path) -> Result<(usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_gram(&bytes).map_err(|m| Error::parse(path, m))
}
