use crate::error::{Error, Result};

use super::Permutation;

const BITS: u32 = 21;

/// Sort points by the Morton (Z-order) key of their coordinates quantized
/// to 21 bits per axis over the bounding box. Ties keep index order.
///
/// The first axis occupies the least significant bit of each interleaved
/// group.
pub fn morton_reorder(points: &[Vec<f64>]) -> Result<Permutation> {
    let Some(first) = points.first() else {
        return Ok(Permutation::identity(0));
    };
    let dim = first.len();
    if !(1..=3).contains(&dim) {
        return Err(Error::MissingCoordinates(format!(
            "morton order supports 1 to 3 coordinates, got {dim}"
        )));
    }
    if let Some(k) = points.iter().position(|p| p.len() != dim) {
        return Err(Error::MissingCoordinates(format!(
            "point {k} has {} coordinates, expected {dim}",
            points[k].len()
        )));
    }
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for a in 0..dim {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let max_q = ((1u64 << BITS) - 1) as f64;
    let keys: Vec<u64> = points
        .iter()
        .map(|p| {
            let mut key = 0u64;
            for a in 0..dim {
                let extent = hi[a] - lo[a];
                let q = if extent > 0.0 {
                    ((p[a] - lo[a]) / extent * max_q).round() as u64
                } else {
                    0
                };
                key |= spread(q, dim) << a;
            }
            key
        })
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&v| (keys[v], v));
    Permutation::from_order(order)
}

/// Place bit `b` of `x` at position `b * stride`.
fn spread(x: u64, stride: usize) -> u64 {
    (0..BITS).fold(0, |acc, b| acc | ((x >> b) & 1) << (b as usize * stride))
}
