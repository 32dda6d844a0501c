//! Seeded synthetic graph generators.
//!
//! Randomness comes from [`Sampler`], a ChaCha8 stream seeded through
//! `SeedableRng::seed_from_u64`. Uniform reals are `(x >> 11) · 2⁻⁵³` for a
//! raw 64-bit draw `x`; an integer below `bound` is drawn by rejecting raw
//! values at or above the largest multiple of `bound` and reducing the rest
//! modulo `bound`. Both procedures are portable bit for bit.

use std::collections::HashSet;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound`, `bound > 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Newman-Watts small world: a ring where node `i` links to `i + j mod n`
/// for `j = 1..=⌈k/2⌉`, then every lattice edge, in that order, adds a
/// shortcut from its lower-ring endpoint to a uniform non-neighbor with
/// probability `p`. Requires `n > 2⌈k/2⌉` so lattice edges are distinct.
pub fn gen_nws(n: usize, k: usize, p: f64, seed: u64) -> Result<LabeledGraph> {
    let half = k.div_ceil(2);
    if k == 0 || n <= 2 * half {
        return Err(Error::InvalidParameter(format!(
            "nws needs k >= 1 and n > 2*ceil(k/2), got n={n}, k={k}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("nws shortcut probability {p} outside [0, 1]")));
    }
    let mut rng = Sampler::new(seed);
    let mut g = LabeledGraph::new(n);
    let mut present = HashSet::new();
    let mut degree = vec![0usize; n];
    let mut lattice = Vec::with_capacity(n * half);
    for i in 0..n {
        for j in 1..=half {
            let t = (i + j) % n;
            lattice.push(i);
            present.insert(key(i, t));
            degree[i] += 1;
            degree[t] += 1;
            g.add_edge(i.min(t), i.max(t), 1.0);
        }
    }
    for src in lattice {
        if rng.uniform() >= p || degree[src] + 1 >= n {
            continue;
        }
        let dst = loop {
            let c = rng.below(n as u64) as usize;
            if c != src && !present.contains(&key(src, c)) {
                break c;
            }
        };
        present.insert(key(src, dst));
        degree[src] += 1;
        degree[dst] += 1;
        g.add_edge(src.min(dst), src.max(dst), 1.0);
    }
    Ok(g)
}

/// Barabási-Albert preferential attachment from a complete graph on `m`
/// seed nodes. Each new node picks `m` distinct targets by drawing uniformly
/// from the list of edge endpoints (a degree-proportional draw), rejecting
/// repeats. With `m = 1` the lone seed node has no endpoints and node 1
/// attaches to it directly.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<LabeledGraph> {
    if m == 0 || n <= m {
        return Err(Error::InvalidParameter(format!("ba needs n > m >= 1, got n={n}, m={m}")));
    }
    let mut rng = Sampler::new(seed);
    let mut g = LabeledGraph::new(n);
    let mut endpoints = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            g.add_edge(a, b, 1.0);
            endpoints.extend([a, b]);
        }
    }
    let mut chosen = Vec::with_capacity(m);
    for v in m..n {
        chosen.clear();
        while chosen.len() < m {
            let t = if endpoints.is_empty() {
                rng.below(v as u64) as usize
            } else {
                endpoints[rng.below(endpoints.len() as u64) as usize]
            };
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            g.add_edge(t, v, 1.0);
            endpoints.extend([t, v]);
        }
    }
    Ok(g)
}
