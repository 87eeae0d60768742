#![allow(dead_code)]

use coalition_core::graph::{Coalition, NodeId, WeightedGraph};

/// Every subset of `members` as a list of nodes, by bitmask.
pub fn subsets(members: &[NodeId]) -> Vec<Vec<NodeId>> {
    (0u32..1 << members.len())
        .map(|mask| {
            members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &m)| m)
                .collect()
        })
        .collect()
}

/// Cut weight straight from the edge list.
pub fn brute_cut(g: &WeightedGraph, c: &Coalition, side: &[NodeId]) -> f64 {
    g.edges()
        .iter()
        .filter(|e| c.contains(e.u) && c.contains(e.v))
        .filter(|e| side.contains(&e.u) != side.contains(&e.v))
        .map(|e| e.weight)
        .sum()
}

/// Structure value straight from the edge list and a label per node.
pub fn brute_value(g: &WeightedGraph, labels: &[usize]) -> f64 {
    g.edges()
        .iter()
        .filter(|e| labels[e.u.index()] == labels[e.v.index()])
        .map(|e| e.weight)
        .sum()
}

/// Best structure value over all labelings in `0..n` (canonical or not).
/// Exponential in n^n; keep n <= 7.
pub fn brute_best_partition(g: &WeightedGraph, kmax: Option<usize>) -> f64 {
    let n = g.node_count();
    let mut labels = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut sizes = vec![0usize; n.max(1)];
        for &l in &labels {
            sizes[l] += 1;
        }
        if kmax.is_none_or(|k| sizes.iter().all(|&s| s <= k)) {
            best = best.max(brute_value(g, &labels));
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return if n == 0 { 0.0 } else { best };
            }
            labels[i] += 1;
            if labels[i] < n {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Minimum cut weight over all bipartitions (including the empty one), by
/// enumerating subsets.
pub fn brute_min_cut(g: &WeightedGraph, c: &Coalition, proper_only: bool) -> f64 {
    subsets(c.members())
        .iter()
        .filter(|s| !proper_only || (!s.is_empty() && s.len() < c.len()))
        .map(|s| brute_cut(g, c, s))
        .fold(f64::INFINITY, f64::min)
}

pub fn complete_graph(n: usize, w: f64) -> WeightedGraph {
    WeightedGraph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, w)))).unwrap()
}
