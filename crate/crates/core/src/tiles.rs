//! Two-level sparse storage for symmetric adjacency matrices.
//!
//! The matrix is cut into 8x8 tiles ("octiles"). Only non-empty tiles are
//! kept, in a coordinate list sorted by `(row, col)`. Inside a tile a 64-bit
//! bitmap marks the nonzero positions (bit `local_row * 8 + local_col`) and
//! the weights and edge labels are stored compactly in ascending bit order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::{Label, LabeledGraph};

/// Tile edge length. Only 8 is supported.
pub const TILE: usize = 8;
pub const TILE_AREA: usize = TILE * TILE;

#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub row: usize,
    pub col: usize,
    pub bitmap: u64,
    pub weights: Vec<f64>,
    pub labels: Option<Vec<Label>>,
}

impl Tile {
    pub fn nnz(&self) -> usize {
        self.bitmap.count_ones() as usize
    }

    /// Iterate `(bit, weight, label)` over set bits in ascending order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64, Option<&Label>)> + '_ {
        BitIter(self.bitmap)
            .enumerate()
            .map(move |(rank, bit)| (bit, self.weights[rank], self.labels.as_ref().map(|l| &l[rank])))
    }

    pub fn expand(&self) -> ExpandedTile<'_> {
        expand_tile(self)
    }
}

/// Set-bit positions of a word, lowest first.
#[derive(Debug, Clone, Copy)]
pub struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(bit)
    }
}

/// A tile decompressed into a dense row-major 8x8 block.
#[derive(Debug, Clone)]
pub struct ExpandedTile<'a> {
    pub weights: [f64; TILE_AREA],
    pub labels: [Option<&'a Label>; TILE_AREA],
    pub bitmap: u64,
}

impl ExpandedTile<'_> {
    /// Re-compress into a tile at `(row, col)`.
    pub fn compact(&self, row: usize, col: usize) -> Tile {
        let mut bitmap = 0u64;
        let mut weights = Vec::new();
        let mut labels = Vec::new();
        let labeled = self.labels.iter().any(Option::is_some);
        for (bit, &w) in self.weights.iter().enumerate() {
            if w != 0.0 {
                bitmap |= 1 << bit;
                weights.push(w);
                if labeled {
                    labels.push(self.labels[bit].cloned().expect("label for nonzero entry"));
                }
            }
        }
        Tile {
            row,
            col,
            bitmap,
            weights,
            labels: labeled.then_some(labels),
        }
    }
}

pub fn expand_tile(tile: &Tile) -> ExpandedTile<'_> {
    let mut out = ExpandedTile {
        weights: [0.0; TILE_AREA],
        labels: [None; TILE_AREA],
        bitmap: tile.bitmap,
    };
    for (bit, w, label) in tile.entries() {
        out.weights[bit] = w;
        out.labels[bit] = label;
    }
    out
}

/// Coordinate list of non-empty tiles with a per-tile-row index.
#[derive(Debug, Clone, PartialEq)]
pub struct TiledMatrix {
    node_count: usize,
    tiles: Vec<Tile>,
    /// `row_ptr[r]..row_ptr[r + 1]` indexes the tiles of tile row `r`.
    row_ptr: Vec<usize>,
    labeled: bool,
}

impl TiledMatrix {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn tile_size(&self) -> usize {
        TILE
    }

    /// Number of tile rows (and columns) after zero padding.
    pub fn tile_dim(&self) -> usize {
        self.node_count.div_ceil(TILE)
    }

    pub fn padded_size(&self) -> usize {
        self.tile_dim() * TILE
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn tile_count(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_labeled(&self) -> bool {
        self.labeled
    }

    pub fn row(&self, r: usize) -> &[Tile] {
        &self.tiles[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn row_range(&self, r: usize) -> std::ops::Range<usize> {
        self.row_ptr[r]..self.row_ptr[r + 1]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Tile> {
        let slice = self.row(row);
        slice
            .binary_search_by_key(&col, |t| t.col)
            .ok()
            .map(|k| &slice[k])
    }

    pub fn stored_values(&self) -> usize {
        self.tiles.iter().map(Tile::nnz).sum()
    }

    /// Dense `n x n` row-major weight matrix reconstructed from the tiles.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.node_count;
        let mut dense = vec![0.0; n * n];
        for tile in &self.tiles {
            for (bit, w, _) in tile.entries() {
                let (i, j) = (tile.row * TILE + bit / TILE, tile.col * TILE + bit % TILE);
                dense[i * n + j] = w;
            }
        }
        dense
    }

    /// One line per tile: `r c 0x<bitmap> <nnz>`.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for t in &self.tiles {
            let _ = writeln!(out, "{} {} 0x{:016x} {}", t.row, t.col, t.bitmap, t.nnz());
        }
        out
    }
}

pub fn build_tiles(g: &LabeledGraph) -> TiledMatrix {
    let n = g.node_count();
    let labeled = g.has_edge_labels();
    let mut cells: BTreeMap<(usize, usize), Vec<(usize, f64, Option<&Label>)>> = BTreeMap::new();
    for (i, j, w, label) in g.symmetric_entries() {
        let bit = (i % TILE) * TILE + j % TILE;
        cells.entry((i / TILE, j / TILE)).or_default().push((bit, w, label));
    }

    let dim = n.div_ceil(TILE);
    let mut row_ptr = vec![0usize; dim + 1];
    let mut tiles = Vec::with_capacity(cells.len());
    for ((row, col), mut entries) in cells {
        entries.sort_by_key(|&(bit, _, _)| bit);
        let bitmap = entries.iter().fold(0u64, |acc, &(bit, _, _)| acc | 1 << bit);
        row_ptr[row + 1] += 1;
        tiles.push(Tile {
            row,
            col,
            bitmap,
            weights: entries.iter().map(|&(_, w, _)| w).collect(),
            labels: labeled.then(|| {
                entries
                    .iter()
                    .map(|&(_, _, l)| l.cloned().expect("uniform edge labels"))
                    .collect()
            }),
        });
    }
    for r in 0..dim {
        row_ptr[r + 1] += row_ptr[r];
    }
    TiledMatrix {
        node_count: n,
        tiles,
        row_ptr,
        labeled,
    }
}

/// Non-empty tiles bucketed by their number of nonzeros.
#[derive(Debug, Clone, PartialEq)]
pub struct TileHistogram {
    /// `counts[k]` is the number of tiles with `k` nonzeros; `counts[0]` is
    /// always 0.
    pub counts: [usize; TILE_AREA + 1],
    pub total: usize,
    pub mean_density: f64,
}

impl TileHistogram {
    pub fn render(&self) -> String {
        let mut out = format!(
            "non-empty tiles: {}\nmean density: {:.4}\n",
            self.total, self.mean_density
        );
        for (nnz, &c) in self.counts.iter().enumerate().skip(1) {
            if c > 0 {
                let _ = writeln!(out, "nnz {nnz:2}: {c}");
            }
        }
        out
    }
}

pub fn tile_histogram(m: &TiledMatrix) -> TileHistogram {
    let mut counts = [0usize; TILE_AREA + 1];
    for t in m.tiles() {
        counts[t.nnz()] += 1;
    }
    let total = m.tile_count();
    let mean_density = if total == 0 {
        0.0
    } else {
        m.stored_values() as f64 / (total * TILE_AREA) as f64
    };
    TileHistogram {
        counts,
        total,
        mean_density,
    }
}
