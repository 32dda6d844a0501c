use std::collections::VecDeque;

use crate::graph::LabeledGraph;

use super::Permutation;

/// Reverse Cuthill-McKee order.
///
/// Each connected component is traversed breadth-first from its
/// minimum-degree node (lowest index on ties), visiting neighbors by
/// ascending degree then index. The visit order of each component is
/// reversed in place and components follow each other in discovery order,
/// so an edgeless graph keeps the identity order.
pub fn rcm_reorder(g: &LabeledGraph) -> Permutation {
    let n = g.node_count();
    let adj = g.neighbors();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut scratch = Vec::new();
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let component_begin = order.len();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            scratch.clear();
            scratch.extend(adj[v].iter().copied().filter(|&u| !visited[u]));
            scratch.sort_by_key(|&u| (degree[u], u));
            for &u in &scratch {
                visited[u] = true;
                queue.push_back(u);
            }
        }
        order[component_begin..].reverse();
    }
    Permutation::from_order(order).expect("BFS visits every node once")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reorder::apply_permutation;

    fn bandwidth(g: &LabeledGraph) -> usize {
        g.edges.iter().map(|e| e.i.abs_diff(e.j)).max().unwrap_or(0)
    }

    #[test]
    fn path_gets_unit_bandwidth() {
        let mut g = LabeledGraph::new(3);
        g.add_edge(0, 2, 1.0).add_edge(2, 1, 1.0);
        assert_eq!(bandwidth(&g), 2);
        let p = rcm_reorder(&g);
        assert_eq!(bandwidth(&apply_permutation(&g, &p).unwrap()), 1);
    }

    #[test]
    fn edgeless_graph_keeps_identity() {
        assert!(rcm_reorder(&LabeledGraph::new(9)).is_identity());
    }

    #[test]
    fn star_follows_reversed_bfs_levels() {
        let mut g = LabeledGraph::new(7);
        for leaf in 1..7 {
            g.add_edge(0, leaf, 1.0);
        }
        let p = rcm_reorder(&g);
        // BFS from leaf 1: level 0 = {1}, level 1 = {0}, level 2 = {2..6}.
        // Reversal puts level 2 first, then the center, then the root.
        assert_eq!(p.inverse(), &[6, 5, 4, 3, 2, 0, 1]);
        assert_eq!(p.new_index(0), 5);
        assert_eq!(p.new_index(1), 6);
    }

    #[test]
    fn deterministic() {
        let mut g = LabeledGraph::new(12);
        for i in 0..11 {
            g.add_edge(i, (i * 5 + 3) % 12, 1.0);
        }
        g.edges.retain(|e| e.i != e.j);
        g.edges.sort_by_key(|e| (e.i.min(e.j), e.i.max(e.j)));
        g.edges.dedup_by_key(|e| (e.i.min(e.j), e.i.max(e.j)));
        assert_eq!(rcm_reorder(&g), rcm_reorder(&g));
    }
}
