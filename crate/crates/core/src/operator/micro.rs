//! Tile-pair products.
//!
//! Every variant accumulates, for one tile `A` of the first graph and one
//! tile `B` of the second,
//!
//! `acc[i * 8 + i'] += A[i][j] * B[i'][j'] * sim(E[i][j], E'[i'][j']) * p[j * 8 + j']`
//!
//! over all local `(i, i', j, j')`. They differ only in how they visit the
//! nonzeros and therefore in summation order.

use crate::graph::Label;
use crate::tiles::{ExpandedTile, Tile, TILE, TILE_AREA};

/// Edge-label similarity used inside the tile products.
pub trait EdgeSim: Sync {
    fn sim(&self, a: Option<&Label>, b: Option<&Label>) -> f64;
}

/// Unlabeled edges: every pair of edges is fully similar.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitEdges;

impl EdgeSim for UnitEdges {
    #[inline(always)]
    fn sim(&self, _: Option<&Label>, _: Option<&Label>) -> f64 {
        1.0
    }
}

/// Labeled edges compared with a base kernel. Missing labels (zero slots
/// of an expanded block) contribute nothing.
#[derive(Debug, Clone, Copy)]
pub struct KernelEdges<'k>(pub &'k crate::kernels::BaseKernel);

impl EdgeSim for KernelEdges<'_> {
    #[inline]
    fn sim(&self, a: Option<&Label>, b: Option<&Label>) -> f64 {
        match (a, b) {
            (Some(x), Some(y)) => self.0.value(x, y),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TileKernel {
    DenseDense,
    /// First tile expanded, second bit-scanned.
    DenseSparse,
    /// First tile bit-scanned, second expanded.
    SparseDense,
    SparseSparse,
}

impl TileKernel {
    pub const ALL: [TileKernel; 4] = [
        TileKernel::DenseDense,
        TileKernel::DenseSparse,
        TileKernel::SparseDense,
        TileKernel::SparseSparse,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Nonzero-count crossovers between the tile-product variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionThresholds {
    /// Sparse x sparse when the sparser tile has at most this many nonzeros...
    pub sparse: usize,
    /// ...and the denser one at most this many.
    pub sparse_max: usize,
    /// Dense x dense when both tiles have at least this many nonzeros.
    pub dense: usize,
}

impl SelectionThresholds {
    pub const UNLABELED: Self = SelectionThresholds {
        sparse: 10,
        sparse_max: 10,
        dense: 24,
    };
    pub const LABELED: Self = SelectionThresholds {
        sparse: 16,
        sparse_max: 16,
        dense: 32,
    };

    pub fn for_mode(labeled: bool) -> Self {
        if labeled {
            Self::LABELED
        } else {
            Self::UNLABELED
        }
    }
}

/// How tile pairs are mapped to product variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Hybrid(SelectionThresholds),
    Always(TileKernel),
}

impl Selection {
    #[inline]
    pub fn pick(&self, nnz_a: usize, nnz_b: usize) -> TileKernel {
        match self {
            Selection::Hybrid(th) => select_tile_kernel(nnz_a, nnz_b, th),
            Selection::Always(k) => *k,
        }
    }
}

/// Pick the product variant for tiles with `nnz_a` and `nnz_b` nonzeros.
/// Mixed pairs expand the denser tile.
pub fn select_tile_kernel(nnz_a: usize, nnz_b: usize, th: &SelectionThresholds) -> TileKernel {
    let (lo, hi) = (nnz_a.min(nnz_b), nnz_a.max(nnz_b));
    if lo <= th.sparse && hi <= th.sparse_max {
        TileKernel::SparseSparse
    } else if lo >= th.dense {
        TileKernel::DenseDense
    } else if nnz_a >= nnz_b {
        TileKernel::DenseSparse
    } else {
        TileKernel::SparseDense
    }
}

/// All `64 x 64` slot pairs in ascending `(i, i', j, j')` order.
pub fn tile_product_dense_dense<S: EdgeSim>(
    a: &ExpandedTile<'_>,
    b: &ExpandedTile<'_>,
    sim: &S,
    p: &[f64; TILE_AREA],
    acc: &mut [f64; TILE_AREA],
) {
    for i in 0..TILE {
        for ip in 0..TILE {
            let mut s = acc[i * TILE + ip];
            for j in 0..TILE {
                let wa = a.weights[i * TILE + j];
                let la = a.labels[i * TILE + j];
                for jp in 0..TILE {
                    let wb = b.weights[ip * TILE + jp];
                    let k = sim.sim(la, b.labels[ip * TILE + jp]);
                    s += wa * wb * k * p[j * TILE + jp];
                }
            }
            acc[i * TILE + ip] = s;
        }
    }
}

/// Expanded rows of `a` against the set bits of `b`.
pub fn tile_product_dense_sparse<S: EdgeSim>(
    a: &ExpandedTile<'_>,
    b: &Tile,
    sim: &S,
    p: &[f64; TILE_AREA],
    acc: &mut [f64; TILE_AREA],
) {
    for i in 0..TILE {
        for j in 0..TILE {
            let wa = a.weights[i * TILE + j];
            let la = a.labels[i * TILE + j];
            for (bit, wb, lb) in b.entries() {
                let (ip, jp) = (bit / TILE, bit % TILE);
                acc[i * TILE + ip] += wa * wb * sim.sim(la, lb) * p[j * TILE + jp];
            }
        }
    }
}

/// Set bits of `a` against the expanded rows of `b`.
pub fn tile_product_sparse_dense<S: EdgeSim>(
    a: &Tile,
    b: &ExpandedTile<'_>,
    sim: &S,
    p: &[f64; TILE_AREA],
    acc: &mut [f64; TILE_AREA],
) {
    for (bit, wa, la) in a.entries() {
        let (i, j) = (bit / TILE, bit % TILE);
        for ip in 0..TILE {
            for jp in 0..TILE {
                let wb = b.weights[ip * TILE + jp];
                acc[i * TILE + ip] +=
                    wa * wb * sim.sim(la, b.labels[ip * TILE + jp]) * p[j * TILE + jp];
            }
        }
    }
}

/// Set bits of `a` against set bits of `b`.
pub fn tile_product_sparse_sparse<S: EdgeSim>(
    a: &Tile,
    b: &Tile,
    sim: &S,
    p: &[f64; TILE_AREA],
    acc: &mut [f64; TILE_AREA],
) {
    for (bit_a, wa, la) in a.entries() {
        let (i, j) = (bit_a / TILE, bit_a % TILE);
        for (bit_b, wb, lb) in b.entries() {
            let (ip, jp) = (bit_b / TILE, bit_b % TILE);
            acc[i * TILE + ip] += wa * wb * sim.sim(la, lb) * p[j * TILE + jp];
        }
    }
}

/// Run the chosen variant. `ea`/`eb` must be the expansions of `a`/`b`.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn run_tile_kernel<S: EdgeSim>(
    kernel: TileKernel,
    a: &Tile,
    ea: &ExpandedTile<'_>,
    b: &Tile,
    eb: &ExpandedTile<'_>,
    sim: &S,
    p: &[f64; TILE_AREA],
    acc: &mut [f64; TILE_AREA],
) {
    match kernel {
        TileKernel::DenseDense => tile_product_dense_dense(ea, eb, sim, p, acc),
        TileKernel::DenseSparse => tile_product_dense_sparse(ea, b, sim, p, acc),
        TileKernel::SparseDense => tile_product_sparse_dense(a, eb, sim, p, acc),
        TileKernel::SparseSparse => tile_product_sparse_sparse(a, b, sim, p, acc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::BaseKernel;
    use crate::tiles::expand_tile;
    use proptest::prelude::*;

    fn tile_from_bits(bitmap: u64, seed: u64, labeled: bool) -> Tile {
        let nnz = bitmap.count_ones() as usize;
        let weights: Vec<f64> = (0..nnz)
            .map(|k| 0.25 + ((seed.wrapping_mul(31).wrapping_add(k as u64 * 17)) % 97) as f64 / 50.0)
            .collect();
        let labels = labeled.then(|| {
            (0..nnz)
                .map(|k| Label::scalar(((seed + k as u64 * 7) % 13) as f64 / 6.0))
                .collect()
        });
        Tile {
            row: 0,
            col: 0,
            bitmap,
            weights,
            labels,
        }
    }

    fn reference<S: EdgeSim>(a: &Tile, b: &Tile, sim: &S, p: &[f64; 64]) -> [f64; 64] {
        let ea = expand_tile(a);
        let eb = expand_tile(b);
        let mut out = [0.0; 64];
        for i in 0..8 {
            for ip in 0..8 {
                for j in 0..8 {
                    for jp in 0..8 {
                        let (x, y) = (i * 8 + j, ip * 8 + jp);
                        if ea.weights[x] != 0.0 && eb.weights[y] != 0.0 {
                            out[i * 8 + ip] += ea.weights[x]
                                * eb.weights[y]
                                * sim.sim(ea.labels[x], eb.labels[y])
                                * p[j * 8 + jp];
                        }
                    }
                }
            }
        }
        out
    }

    fn all_variants<S: EdgeSim>(a: &Tile, b: &Tile, sim: &S, p: &[f64; 64]) -> Vec<[f64; 64]> {
        let (ea, eb) = (expand_tile(a), expand_tile(b));
        TileKernel::ALL
            .iter()
            .map(|&k| {
                let mut acc = [0.0; 64];
                run_tile_kernel(k, a, &ea, b, &eb, sim, p, &mut acc);
                acc
            })
            .collect()
    }

    fn rel_err(x: &[f64], y: &[f64]) -> f64 {
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
    }

    #[test]
    fn full_tiles_of_ones() {
        let ones = Tile {
            row: 0,
            col: 0,
            bitmap: u64::MAX,
            weights: vec![1.0; 64],
            labels: None,
        };
        let p = [1.0; 64];
        for acc in all_variants(&ones, &ones, &UnitEdges, &p) {
            assert!(acc.iter().all(|&v| v == 64.0));
        }
    }

    #[test]
    fn single_bits_give_one_contribution() {
        let a = tile_from_bits(1 << 10, 1, false); // (1, 2)
        let b = tile_from_bits(1 << 45, 2, false); // (5, 5)
        let mut p = [0.0; 64];
        p[2 * 8 + 5] = 3.0;
        for acc in all_variants(&a, &b, &UnitEdges, &p) {
            let nonzero: Vec<usize> = (0..64).filter(|&k| acc[k] != 0.0).collect();
            assert_eq!(nonzero, vec![8 + 5]);
            assert_eq!(acc[13], a.weights[0] * b.weights[0] * 3.0);
        }
    }

    #[test]
    fn empty_tile_is_a_no_op() {
        let zero = tile_from_bits(0, 0, false);
        let full = tile_from_bits(u64::MAX, 3, false);
        let p = [0.5; 64];
        for acc in all_variants(&zero, &full, &UnitEdges, &p)
            .into_iter()
            .chain(all_variants(&full, &zero, &UnitEdges, &p))
        {
            assert!(acc.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn dense_dense_matches_quadruple_loop() {
        let a = tile_from_bits(0xF0F0_1234_FFFF_0001, 5, true);
        let b = tile_from_bits(0x0FF0_AAAA_5555_8000, 6, true);
        let k = BaseKernel::SquareExponential { alpha: 1.0 };
        let p: [f64; 64] = std::array::from_fn(|x| 0.1 + x as f64 / 64.0);
        let want = reference(&a, &b, &KernelEdges(&k), &p);
        let mut got = [0.0; 64];
        tile_product_dense_dense(&expand_tile(&a), &expand_tile(&b), &KernelEdges(&k), &p, &mut got);
        assert!(rel_err(&got, &want) <= 1e-15);
    }

    #[test]
    fn selection_examples() {
        let u = SelectionThresholds::UNLABELED;
        let l = SelectionThresholds::LABELED;
        assert_eq!(select_tile_kernel(4, 4, &u), TileKernel::SparseSparse);
        assert_eq!(select_tile_kernel(16, 16, &l), TileKernel::SparseSparse);
        assert_eq!(select_tile_kernel(64, 64, &u), TileKernel::DenseDense);
        assert_eq!(select_tile_kernel(64, 64, &l), TileKernel::DenseDense);
        assert_eq!(select_tile_kernel(40, 3, &u), TileKernel::DenseSparse);
        assert_eq!(select_tile_kernel(3, 40, &u), TileKernel::SparseDense);
        for k in TileKernel::ALL {
            assert_eq!(Selection::Always(k).pick(1, 64), k);
        }
    }

    proptest! {
        #[test]
        fn variants_agree(bits_a in 1u64.., bits_b in 1u64.., seed in 0u64..1000, labeled in any::<bool>()) {
            let a = tile_from_bits(bits_a, seed, labeled);
            let b = tile_from_bits(bits_b, seed + 1, labeled);
            let p: [f64; 64] = std::array::from_fn(|x| ((x as u64 * 37 + seed) % 11) as f64 / 7.0 - 0.5);
            let k = BaseKernel::SquareExponential { alpha: 0.7 };
            let results = if labeled {
                all_variants(&a, &b, &KernelEdges(&k), &p)
            } else {
                all_variants(&a, &b, &UnitEdges, &p)
            };
            let want = if labeled { reference(&a, &b, &KernelEdges(&k), &p) } else { reference(&a, &b, &UnitEdges, &p) };
            for r in results {
                prop_assert!(rel_err(&r, &want) <= 1e-12);
            }
        }
    }
}
