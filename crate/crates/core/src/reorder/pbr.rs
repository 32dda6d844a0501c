//! Partition-based reordering.
//!
//! Nodes are split into `K = ceil(n / t)` groups of exactly `t` nodes (the
//! last group may be shorter) by recursive balanced bisection. Each
//! bisection minimizes the edge cut. The K-way result is then refined with
//! Fiduccia-Mattheyses moves whose gain is the change in the number of
//! connected group pairs, the quantity that decides how many off-diagonal
//! tiles are non-empty.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::graph::LabeledGraph;
use crate::tiles::TILE;

use super::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PbrOptions {
    /// Group width, the tile size.
    pub group: usize,
    pub seed: u64,
    /// FM passes per refinement.
    pub max_passes: usize,
    /// Independent bisection runs; the best refined result is kept.
    pub restarts: usize,
    /// Greedy-growing starts tried per bisection.
    pub bisection_trials: usize,
}

impl Default for PbrOptions {
    fn default() -> Self {
        PbrOptions {
            group: TILE,
            seed: 0,
            max_passes: 10,
            restarts: 4,
            bisection_trials: 4,
        }
    }
}

/// Assignment of nodes to `K` ordered groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionState {
    part: Vec<usize>,
    parts: usize,
    group: usize,
}

impl PartitionState {
    /// `assignment[v]` is the group of node `v`; the group count is
    /// `ceil(n / group)`.
    pub fn new(assignment: Vec<usize>, group: usize) -> Self {
        assert!(group > 0, "group width must be positive");
        let parts = assignment.len().div_ceil(group);
        assert!(
            assignment.iter().all(|&p| p < parts.max(1)),
            "group index out of range"
        );
        PartitionState {
            part: assignment,
            parts,
            group,
        }
    }

    /// Groups of consecutive indices under `perm`.
    pub fn from_permutation(perm: &Permutation, group: usize) -> Self {
        Self::new(perm.forward().iter().map(|&p| p / group).collect(), group)
    }

    pub fn assignment(&self) -> &[usize] {
        &self.part
    }

    pub fn part_count(&self) -> usize {
        self.parts
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.parts];
        for &p in &self.part {
            s[p] += 1;
        }
        s
    }

    /// Required sizes: `t` for every group except a possibly shorter last.
    pub fn targets(&self) -> Vec<usize> {
        targets(self.part.len(), self.group)
    }

    pub fn is_balanced(&self) -> bool {
        self.sizes() == self.targets()
    }

    pub fn objective(&self, g: &LabeledGraph) -> usize {
        super::count_connected_pairs(g, &self.part)
    }

    /// Order nodes by group, then by original index.
    pub fn to_permutation(&self) -> Permutation {
        let mut order: Vec<usize> = (0..self.part.len()).collect();
        order.sort_by_key(|&v| (self.part[v], v));
        Permutation::from_order(order).expect("sorted node list is a bijection")
    }
}

fn targets(n: usize, group: usize) -> Vec<usize> {
    let k = n.div_ceil(group);
    (0..k)
        .map(|p| if p + 1 < k { group } else { n - group * (k - 1) })
        .collect()
}

/// Partition-based reordering with the default options and `seed`.
pub fn pbr_reorder(g: &LabeledGraph, seed: u64) -> Permutation {
    pbr_reorder_with(
        g,
        &PbrOptions {
            seed,
            ..PbrOptions::default()
        },
    )
}

pub fn pbr_reorder_with(g: &LabeledGraph, opts: &PbrOptions) -> Permutation {
    let n = g.node_count();
    if n <= opts.group || g.edge_count() == 0 {
        return Permutation::identity(n);
    }
    let adj = g.neighbors();
    let natural = PartitionState::new((0..n).map(|v| v / opts.group).collect(), opts.group);
    let natural_obj = natural.objective(g);
    let score = |s: &PartitionState| {
        let obj = s.objective(g);
        (diagonal_tiles(g, s.assignment()) + 2 * obj, obj)
    };

    let mut best = natural.clone();
    let mut best_score = score(&natural);
    let mut consider = |cand: PartitionState| {
        let sc = score(&cand);
        if cand.is_balanced() && sc.1 <= natural_obj && sc < best_score {
            best_score = sc;
            best = cand;
        }
    };

    let candidates: Vec<PartitionState> = (0..=opts.restarts.max(1))
        .into_par_iter()
        .map(|run| {
            if run == 0 {
                return refine(&adj, natural.clone(), opts.max_passes);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(run as u64 - 1);
            let mut part = vec![0usize; n];
            let tg = targets(n, opts.group);
            recursive_bisect(&adj, (0..n).collect(), 0, &tg, &mut part, opts, &mut rng);
            refine(&adj, PartitionState::new(part, opts.group), opts.max_passes)
        })
        .collect();
    for cand in candidates {
        consider(cand);
    }
    best.to_permutation()
}

fn diagonal_tiles(g: &LabeledGraph, part: &[usize]) -> usize {
    let mut inner: Vec<usize> = g
        .edges
        .iter()
        .filter(|e| part[e.i] == part[e.j])
        .map(|e| part[e.i])
        .collect();
    inner.sort_unstable();
    inner.dedup();
    inner.len()
}

fn recursive_bisect(
    adj: &[Vec<usize>],
    nodes: Vec<usize>,
    first: usize,
    tg: &[usize],
    part: &mut [usize],
    opts: &PbrOptions,
    rng: &mut ChaCha8Rng,
) {
    if tg.len() == 1 {
        for v in nodes {
            part[v] = first;
        }
        return;
    }
    let left_parts = tg.len().div_ceil(2);
    let left_size: usize = tg[..left_parts].iter().sum();
    let (left, right) = bisect(adj, &nodes, left_size, opts, rng);
    recursive_bisect(adj, left, first, &tg[..left_parts], part, opts, rng);
    recursive_bisect(adj, right, first + left_parts, &tg[left_parts..], part, opts, rng);
}

/// Split `nodes` into a left set of exactly `left_size` nodes and the rest,
/// minimizing the number of edges between them.
fn bisect(
    adj: &[Vec<usize>],
    nodes: &[usize],
    left_size: usize,
    opts: &PbrOptions,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut local = vec![usize::MAX; adj.len()];
    for (k, &v) in nodes.iter().enumerate() {
        local[v] = k;
    }
    let sub: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&v| {
            adj[v]
                .iter()
                .filter_map(|&u| (local[u] != usize::MAX).then_some(local[u]))
                .collect()
        })
        .collect();
    let m = nodes.len();
    let sizes = [left_size, m - left_size];

    let mut best: Option<(usize, Vec<usize>)> = None;
    for trial in 0..opts.bisection_trials.max(1) {
        let start = if trial == 0 {
            // lowest-degree node, lowest index on ties
            (0..m).min_by_key(|&v| (sub[v].len(), v)).unwrap_or(0)
        } else {
            (rng.next_u64() % m as u64) as usize
        };
        let side = grow_region(&sub, start, left_size);
        let mut kway = KWay::new(&sub, side, sizes.to_vec(), Goal::Cut);
        kway.fm_passes(opts.max_passes);
        let cut = kway.cut;
        if best.as_ref().is_none_or(|(c, _)| cut < *c) {
            best = Some((cut, kway.part));
        }
    }
    let (_, side) = best.expect("at least one trial");
    let mut left = Vec::with_capacity(left_size);
    let mut right = Vec::with_capacity(m - left_size);
    for (k, &v) in nodes.iter().enumerate() {
        if side[k] == 0 {
            left.push(v);
        } else {
            right.push(v);
        }
    }
    (left, right)
}

/// Greedy graph growing: starting from `start`, repeatedly absorb the
/// outside node with the most neighbors inside minus neighbors outside.
fn grow_region(adj: &[Vec<usize>], start: usize, size: usize) -> Vec<usize> {
    let m = adj.len();
    let mut side = vec![1usize; m];
    if size == 0 {
        return side;
    }
    let mut inside_links = vec![0i64; m];
    let mut taken = 0;
    let mut next = Some(start);
    while taken < size {
        let v = match next.take() {
            Some(v) => v,
            None => {
                let frontier = (0..m)
                    .filter(|&u| side[u] == 1)
                    .max_by_key(|&u| (2 * inside_links[u] - adj[u].len() as i64, std::cmp::Reverse(u)));
                frontier.expect("enough nodes remain")
            }
        };
        side[v] = 0;
        taken += 1;
        for &u in &adj[v] {
            inside_links[u] += 1;
        }
    }
    side
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Goal {
    /// Minimize connected part pairs, then the cut.
    Pairs,
    /// Minimize the edge cut.
    Cut,
}

const FM_STALL: usize = 64;

/// Incremental K-way partition bookkeeping for FM moves.
struct KWay<'a> {
    adj: &'a [Vec<usize>],
    part: Vec<usize>,
    size: Vec<usize>,
    target: Vec<usize>,
    /// Edge counts between part pairs, `k x k`, symmetric, zero diagonal.
    conn: Vec<u32>,
    k: usize,
    pairs: usize,
    cut: usize,
    goal: Goal,
    counts: Vec<(usize, u32)>,
}

impl<'a> KWay<'a> {
    fn new(adj: &'a [Vec<usize>], part: Vec<usize>, target: Vec<usize>, goal: Goal) -> Self {
        let k = target.len();
        let mut size = vec![0; k];
        for &p in &part {
            size[p] += 1;
        }
        let mut conn = vec![0u32; k * k];
        let mut cut = 0;
        for (v, nbrs) in adj.iter().enumerate() {
            for &u in nbrs {
                let (a, b) = (part[v], part[u]);
                if a != b {
                    conn[a * k + b] += 1;
                    if v < u {
                        cut += 1;
                    }
                }
            }
        }
        let pairs = (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
            .filter(|&(a, b)| conn[a * k + b] > 0)
            .count();
        KWay {
            adj,
            part,
            size,
            target,
            conn,
            k,
            pairs,
            cut,
            goal,
            counts: Vec::new(),
        }
    }

    fn balanced(&self) -> bool {
        self.size == self.target
    }

    fn score(&self) -> (usize, usize) {
        match self.goal {
            Goal::Pairs => (self.pairs, self.cut),
            Goal::Cut => (self.cut, 0),
        }
    }

    fn fill_counts(&mut self, v: usize) {
        self.counts.clear();
        for &u in &self.adj[v] {
            let p = self.part[u];
            match self.counts.iter_mut().find(|(q, _)| *q == p) {
                Some((_, c)) => *c += 1,
                None => self.counts.push((p, 1)),
            }
        }
    }

    fn count_in(&self, p: usize) -> u32 {
        self.counts
            .iter()
            .find(|(q, _)| *q == p)
            .map_or(0, |&(_, c)| c)
    }

    /// `(pairs delta, cut delta)` of moving `v` (with counts filled) to `b`.
    fn delta(&self, v: usize, b: usize) -> (i64, i64) {
        let a = self.part[v];
        let k = self.k;
        let (ca, cb) = (self.count_in(a), self.count_in(b));
        let mut dp = 0i64;
        for &(c, cnt) in &self.counts {
            if c == a || c == b {
                continue;
            }
            if self.conn[a * k + c] == cnt {
                dp -= 1;
            }
            if self.conn[b * k + c] == 0 {
                dp += 1;
            }
        }
        let old = self.conn[a * k + b];
        let new = old + ca - cb;
        dp += i64::from(new > 0) - i64::from(old > 0);
        (dp, i64::from(ca) - i64::from(cb))
    }

    fn apply(&mut self, v: usize, b: usize) {
        self.fill_counts(v);
        let (dp, dc) = self.delta(v, b);
        let a = self.part[v];
        let k = self.k;
        let counts = std::mem::take(&mut self.counts);
        for &(c, cnt) in &counts {
            if c != a {
                self.conn[a * k + c] -= cnt;
                self.conn[c * k + a] -= cnt;
            }
            if c != b {
                self.conn[b * k + c] += cnt;
                self.conn[c * k + b] += cnt;
            }
        }
        self.counts = counts;
        self.pairs = (self.pairs as i64 + dp) as usize;
        self.cut = (self.cut as i64 + dc) as usize;
        self.part[v] = b;
        self.size[a] -= 1;
        self.size[b] += 1;
    }

    fn gain_key(&self, v: usize, b: usize) -> (i64, i64) {
        let (dp, dc) = self.delta(v, b);
        match self.goal {
            Goal::Pairs => (-dp, -dc),
            Goal::Cut => (-dc, 0),
        }
    }

    /// Best move among unlocked nodes. Candidate targets are the parts of a
    /// node's neighbors plus every underloaded part; `allowed` filters by
    /// the size constraint. Ties go to the lowest node, then lowest part.
    fn best_move(
        &mut self,
        locked: &[bool],
        movable: impl Fn(&Self, usize) -> bool,
        allowed: impl Fn(&Self, usize, usize) -> bool,
    ) -> Option<(usize, usize)> {
        let under: Vec<usize> = (0..self.k).filter(|&p| self.size[p] < self.target[p]).collect();
        let mut best: Option<((i64, i64), usize, usize)> = None;
        for v in 0..self.part.len() {
            if locked[v] || !movable(self, v) {
                continue;
            }
            self.fill_counts(v);
            let a = self.part[v];
            let mut cands: Vec<usize> = self.counts.iter().map(|&(p, _)| p).collect();
            cands.extend(&under);
            cands.sort_unstable();
            cands.dedup();
            for b in cands {
                if b == a || !allowed(self, a, b) {
                    continue;
                }
                let key = self.gain_key(v, b);
                if best.is_none_or(|(bk, _, _)| key > bk) {
                    best = Some((key, v, b));
                }
            }
        }
        best.map(|(_, v, b)| (v, b))
    }

    /// Move nodes from overloaded to underloaded parts until balanced.
    fn rebalance(&mut self) {
        let locked = vec![false; self.part.len()];
        while !self.balanced() {
            let mv = self.best_move(
                &locked,
                |s, v| s.size[s.part[v]] > s.target[s.part[v]],
                |s, _, b| s.size[b] < s.target[b],
            );
            let (v, b) = mv.expect("an overloaded part implies an underloaded one");
            self.apply(v, b);
        }
    }

    /// FM passes with a one-node balance slack; each pass rolls back to the
    /// best balanced state it visited and ends early after [`FM_STALL`]
    /// moves without a new best.
    fn fm_passes(&mut self, max_passes: usize) {
        self.rebalance();
        let n = self.part.len();
        for _ in 0..max_passes {
            let start = self.score();
            let mut best = start;
            let mut best_len = 0;
            let mut moves: Vec<(usize, usize)> = Vec::new();
            let mut locked = vec![false; n];
            while moves.len() < n {
                let mv = self.best_move(
                    &locked,
                    |_, _| true,
                    |s, a, b| s.size[a] >= s.target[a] && s.size[b] <= s.target[b],
                );
                let Some((v, b)) = mv else { break };
                moves.push((v, self.part[v]));
                self.apply(v, b);
                locked[v] = true;
                if self.balanced() && self.score() < best {
                    best = self.score();
                    best_len = moves.len();
                } else if moves.len() - best_len >= FM_STALL {
                    break;
                }
            }
            for &(v, from) in moves[best_len..].iter().rev() {
                self.apply(v, from);
            }
            if best >= start {
                break;
            }
        }
    }

    /// Pairwise exchanges between a node and a member of one of its
    /// neighbor parts, which keep every part size fixed. Each sweep takes,
    /// node by node, the best strictly improving exchange.
    fn swap_passes(&mut self, max_passes: usize) {
        let n = self.part.len();
        for _ in 0..max_passes {
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.k];
            for v in 0..n {
                members[self.part[v]].push(v);
            }
            let mut improved = false;
            for u in 0..n {
                let a = self.part[u];
                self.fill_counts(u);
                let first: Vec<(usize, (i64, i64))> = self
                    .counts
                    .iter()
                    .map(|&(p, _)| p)
                    .filter(|&p| p != a)
                    .collect::<Vec<_>>()
                    .into_iter()
                    .map(|b| (b, self.delta(u, b)))
                    .collect();
                let mut best: Option<((i64, i64), usize)> = None;
                for (b, (dp1, dc1)) in first {
                    self.apply(u, b);
                    for &v in &members[b] {
                        if v == u {
                            continue;
                        }
                        self.fill_counts(v);
                        let (dp2, dc2) = self.delta(v, a);
                        let key = match self.goal {
                            Goal::Pairs => (-(dp1 + dp2), -(dc1 + dc2)),
                            Goal::Cut => (-(dc1 + dc2), 0),
                        };
                        if key > (0, 0) && best.is_none_or(|(bk, _)| key > bk) {
                            best = Some((key, v));
                        }
                    }
                    self.apply(u, a);
                }
                if let Some((_, v)) = best {
                    let b = self.part[v];
                    self.apply(u, b);
                    self.apply(v, a);
                    members[a].retain(|&x| x != u);
                    members[b].retain(|&x| x != v);
                    members[a].push(v);
                    members[b].push(u);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
}

fn refine(adj: &[Vec<usize>], state: PartitionState, max_passes: usize) -> PartitionState {
    let tg = state.targets();
    let group = state.group;
    let mut kway = KWay::new(adj, state.part, tg, Goal::Pairs);
    kway.fm_passes(max_passes);
    kway.swap_passes(max_passes);
    PartitionState::new(kway.part, group)
}

/// Restore perfect balance and run FM passes on the connected-pair count.
///
/// The result is balanced and its objective is no larger than that of the
/// best balanced state visited.
pub fn fm_refine(g: &LabeledGraph, state: &PartitionState, max_passes: usize) -> PartitionState {
    refine(&g.neighbors(), state.clone(), max_passes)
}
