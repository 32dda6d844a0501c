//! Operation and traffic accounting for the product operator.
//!
//! Costs are expressed in the abstract model `(E, F, X)`: bytes per edge
//! label, bytes per float, flops per fused contribution. Tier 1 is the
//! graph and vector storage streamed per tile pair; tier 2 is the expanded
//! scratch blocks. [`predict_costs`] evaluates the closed-form totals of the
//! four product primitives; [`measure_counters`] converts the raw counts
//! gathered by [`ProductOperator`](super::ProductOperator) into the same
//! units.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::micro::TileKernel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Bytes per edge label.
    pub e: f64,
    /// Bytes per float.
    pub f: f64,
    /// Flops per fused edge contribution.
    pub x: f64,
    /// Tile edge length.
    pub t: f64,
    /// Register chunk length.
    pub r: f64,
}

impl CostModel {
    /// Unlabeled single precision with octiles and chunks of 8.
    pub const UNLABELED_F32: Self = CostModel {
        e: 0.0,
        f: 4.0,
        x: 3.0,
        t: 8.0,
        r: 8.0,
    };

    pub fn new(e: f64, f: f64, x: f64) -> Self {
        CostModel {
            e,
            f,
            x,
            ..Self::UNLABELED_F32
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.f, self.x, self.t, self.r];
        if self.e < 0.0 || positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "cost model needs E >= 0 and F, X, t, r > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    Naive,
    SharedTiling,
    RegisterBlocking,
    TilingBlocking,
}

impl Primitive {
    pub const ALL: [Primitive; 4] = [
        Primitive::Naive,
        Primitive::SharedTiling,
        Primitive::RegisterBlocking,
        Primitive::TilingBlocking,
    ];
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Primitive::Naive => "naive",
            Primitive::SharedTiling => "shared-tiling",
            Primitive::RegisterBlocking => "register-blocking",
            Primitive::TilingBlocking => "tiling-blocking",
        })
    }
}

impl FromStr for Primitive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Primitive::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown primitive `{s}`")))
    }
}

/// Operation and byte totals of one or more products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterReport {
    pub primitive: Primitive,
    pub n: usize,
    pub m: usize,
    pub model: CostModel,
    pub flops: f64,
    /// Tier-1 bytes loaded inside the tile-pair loop.
    pub t1_load: f64,
    /// Tier-1 bytes of first-graph tiles, loaded once per output tile and
    /// first-graph tile. Lower order; zero in predictions.
    pub t1_load_outer: f64,
    pub t1_store: f64,
    pub t2_load: f64,
    pub t2_store: f64,
    /// Tier-1 arithmetic intensity.
    pub ai1: f64,
    /// Tier-2 arithmetic intensity; `None` when the primitive has no tier 2.
    pub ai2: Option<f64>,
}

impl CounterReport {
    pub const CSV_HEADER: &'static str =
        "primitive,n,m,E,F,X,flops,t1_load,t1_store,t2_load,t2_store,AI1,AI2";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.primitive,
            self.n,
            self.m,
            self.model.e,
            self.model.f,
            self.model.x,
            self.flops,
            self.t1_load,
            self.t1_store,
            self.t2_load,
            self.t2_store,
            self.ai1,
            self.ai2.map_or_else(String::new, |v| v.to_string()),
        )
    }

    /// `flops / (t1_load + t1_store)`.
    pub fn tier1_intensity(&self) -> f64 {
        ratio(self.flops, self.t1_load + self.t1_store)
    }

    /// `flops / (t2_load + t2_store)`.
    pub fn tier2_intensity(&self) -> f64 {
        ratio(self.flops, self.t2_load + self.t2_store)
    }
}

impl fmt::Display for CounterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "primitive      {}", self.primitive)?;
        writeln!(f, "n x m          {} x {}", self.n, self.m)?;
        writeln!(
            f,
            "E, F, X, t, r  {}, {}, {}, {}, {}",
            self.model.e, self.model.f, self.model.x, self.model.t, self.model.r
        )?;
        writeln!(f, "flops          {}", self.flops)?;
        writeln!(f, "tier-1 load    {}", self.t1_load)?;
        if self.t1_load_outer > 0.0 {
            writeln!(f, "tier-1 outer   {}", self.t1_load_outer)?;
        }
        writeln!(f, "tier-1 store   {}", self.t1_store)?;
        writeln!(f, "tier-2 load    {}", self.t2_load)?;
        writeln!(f, "tier-2 store   {}", self.t2_store)?;
        writeln!(f, "AI tier-1      {}", self.ai1)?;
        match self.ai2 {
            Some(v) => writeln!(f, "AI tier-2      {v}"),
            None => writeln!(f, "AI tier-2      -"),
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Closed-form per-product totals of `primitive` for an `n x m` pair of
/// dense graphs. Intensities are the asymptotic ones, which ignore the
/// lower-order store terms.
pub fn predict_costs(model: &CostModel, n: usize, m: usize, primitive: Primitive) -> CounterReport {
    let CostModel { e, f, x, t, r } = *model;
    let nm = n as f64 * m as f64;
    let nm2 = nm * nm;
    let t2 = t * t;
    let (flops, t1_load, t2_load, t2_store, ai1, ai2) = match primitive {
        Primitive::Naive => (2.0 * nm2, nm2 * f, 0.0, 0.0, 2.0 / f, None),
        Primitive::SharedTiling => {
            let global = nm2 * ((t / r) * e + ((r + t) / r) * f) / t2;
            (
                nm2 * x,
                global,
                nm2 * (((r + 1.0) / r) * e + ((2.0 * r + 1.0) / r) * f),
                global,
                t2 * x / ((t / r) * e + (1.0 + t / r) * f),
                Some(x / ((1.0 + 1.0 / r) * e + (2.0 + 1.0 / r) * f)),
            )
        }
        Primitive::RegisterBlocking => (
            nm2 * x,
            nm2 * ((t / r) * e + ((t + r) / r) * f) / t2,
            nm2 * f,
            nm2 * f / t2,
            t2 * x / ((t / r) * e + (1.0 + t / r) * f),
            Some(x / ((1.0 + 1.0 / t2) * f)),
        ),
        Primitive::TilingBlocking => (
            nm2 * x,
            nm2 * (e + 2.0 * f) / t2,
            nm2 * ((r + t) / (r * t) * e + (r + t) / (r * t) * f),
            nm2 * (e + f) / t2,
            t2 * x / (e + 2.0 * f),
            Some(x / ((1.0 / r + 1.0 / t) * e + (1.0 / r + 1.0 / t) * f)),
        ),
    };
    CounterReport {
        primitive,
        n,
        m,
        model: *model,
        flops,
        t1_load,
        t1_load_outer: 0.0,
        t1_store: nm * f,
        t2_load,
        t2_store,
        ai1,
        ai2,
    }
}

/// Raw element counts accumulated by the operator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RawCounters {
    /// Tile pairs processed, per product variant.
    pub tile_pairs: [u64; 4],
    /// Fused edge contributions, zero slots of expanded blocks included.
    pub fused: u64,
    /// Second-graph weights streamed per tile pair.
    pub t1_weights: u64,
    /// Second-graph labels streamed per tile pair.
    pub t1_labels: u64,
    /// Bitmap words streamed per tile pair.
    pub t1_bitmaps: u64,
    /// Input-vector elements gathered per tile pair.
    pub t1_vector: u64,
    pub t1_outer_weights: u64,
    pub t1_outer_labels: u64,
    pub t1_outer_bitmaps: u64,
    /// Output-vector elements written.
    pub t1_store: u64,
    /// Scratch reads of weights and labels outside dense x dense pairs.
    pub t2_weights: u64,
    pub t2_labels: u64,
    /// Scratch writes of expanded tiles outside dense x dense pairs.
    pub t2_store_weights: u64,
    pub t2_store_labels: u64,
}

impl RawCounters {
    pub fn merge(&mut self, o: &RawCounters) {
        for k in 0..4 {
            self.tile_pairs[k] += o.tile_pairs[k];
        }
        self.fused += o.fused;
        self.t1_weights += o.t1_weights;
        self.t1_labels += o.t1_labels;
        self.t1_bitmaps += o.t1_bitmaps;
        self.t1_vector += o.t1_vector;
        self.t1_outer_weights += o.t1_outer_weights;
        self.t1_outer_labels += o.t1_outer_labels;
        self.t1_outer_bitmaps += o.t1_outer_bitmaps;
        self.t1_store += o.t1_store;
        self.t2_weights += o.t2_weights;
        self.t2_labels += o.t2_labels;
        self.t2_store_weights += o.t2_store_weights;
        self.t2_store_labels += o.t2_store_labels;
    }

    pub fn total_tile_pairs(&self) -> u64 {
        self.tile_pairs.iter().sum()
    }

    pub fn pairs_of(&self, kernel: TileKernel) -> u64 {
        self.tile_pairs[kernel.index()]
    }
}

/// Convert raw counts into a report under `model`.
///
/// Dense x dense pairs are charged as the tiling-blocking primitive: the
/// second tile enters scratch once (`t^2` slots) and is read back in
/// chunks of `r`, `t^2 (t + t^2 / r)` slots per pair. Other variants are
/// charged one scratch read per fused contribution.
pub fn measure_counters(raw: &RawCounters, model: &CostModel, n: usize, m: usize) -> CounterReport {
    let CostModel { e, f, x, t, r } = *model;
    let word = 8.0;
    let dd = raw.pairs_of(TileKernel::DenseDense) as f64;
    let flops = raw.fused as f64 * x;
    let t1_load = raw.t1_weights as f64 * f
        + raw.t1_labels as f64 * e
        + raw.t1_bitmaps as f64 * word
        + raw.t1_vector as f64 * f;
    let t1_load_outer = raw.t1_outer_weights as f64 * f
        + raw.t1_outer_labels as f64 * e
        + raw.t1_outer_bitmaps as f64 * word;
    let t1_store = raw.t1_store as f64 * f;
    let dd_reads = dd * t * t * (t + t * t / r);
    let dd_writes = dd * t * t;
    let t2_load = (raw.t2_weights as f64 + dd_reads) * f + (raw.t2_labels as f64 + dd_reads) * e;
    let t2_store =
        (raw.t2_store_weights as f64 + dd_writes) * f + (raw.t2_store_labels as f64 + dd_writes) * e;
    CounterReport {
        primitive: Primitive::TilingBlocking,
        n,
        m,
        model: *model,
        flops,
        t1_load,
        t1_load_outer,
        t1_store,
        t2_load,
        t2_store,
        ai1: ratio(flops, t1_load + t1_store),
        ai2: Some(ratio(flops, t2_load + t2_store)),
    }
}
