use crate::error::{Error, Result};
use crate::graph::{CoalitionStructure, WeightedGraph};

/// Node cap for [`exact_partition_oracle`]; Bell(12) is about 4.2 million.
pub const ORACLE_MAX_NODES: usize = 12;

// values this close count as a tie
const TIE_EPS: f64 = 1e-12;

struct Search {
    // edges to lower-numbered nodes, per node
    back_edges: Vec<Vec<(usize, f64)>>,
    kmax: usize,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    best_value: f64,
    best_labels: Option<Vec<usize>>,
}

impl Search {
    // Depth-first over restricted-growth strings in lexicographic order.
    fn visit(&mut self, node: usize, blocks: usize, value: f64) {
        if node == self.labels.len() {
            if self.best_labels.is_none() || value > self.best_value + TIE_EPS {
                self.best_value = value;
                self.best_labels = Some(self.labels.clone());
            }
            return;
        }
        for b in 0..=blocks {
            if b == blocks {
                self.sizes.push(0);
            }
            if self.sizes[b] < self.kmax {
                let gain: f64 = self.back_edges[node]
                    .iter()
                    .filter(|&&(j, _)| self.labels[j] == b)
                    .map(|&(_, w)| w)
                    .sum();
                self.labels[node] = b;
                self.sizes[b] += 1;
                self.visit(node + 1, blocks.max(b + 1), value + gain);
                self.sizes[b] -= 1;
            }
            if b == blocks {
                self.sizes.pop();
            }
        }
    }
}

/// Exact coalition structure generation by enumerating all set partitions.
///
/// Partitions with a coalition larger than `kmax` are skipped. Among equal
/// values the lexicographically smallest restricted-growth string wins.
pub fn exact_partition_oracle(
    g: &WeightedGraph,
    kmax: Option<usize>,
) -> Result<(CoalitionStructure, f64)> {
    let n = g.node_count();
    if n > ORACLE_MAX_NODES {
        return Err(Error::TooLarge(format!(
            "exact partition oracle is capped at {ORACLE_MAX_NODES} nodes, got {n}"
        )));
    }
    if kmax == Some(0) {
        return Err(Error::arg("kmax must be at least 1"));
    }
    let back_edges = (0..n)
        .map(|i| {
            g.adjacency_of(i)
                .iter()
                .copied()
                .filter(|&(j, _)| j < i)
                .collect()
        })
        .collect();
    let mut search = Search {
        back_edges,
        kmax: kmax.unwrap_or(usize::MAX),
        labels: vec![0; n],
        sizes: Vec::new(),
        best_value: f64::NEG_INFINITY,
        best_labels: None,
    };
    search.visit(0, 0, 0.0);
    let labels = search.best_labels.unwrap_or_default();
    let value = if n == 0 { 0.0 } else { search.best_value };
    Ok((CoalitionStructure::from_labels(&labels), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 2.0), (1, 2, -5.0), (2, 0, 1.0)]).unwrap()
    }

    #[test]
    fn triangle_optimum() {
        let (p, v) = exact_partition_oracle(&triangle(), None).unwrap();
        assert_eq!(p.to_ids(), vec![vec![0, 1], vec![2]]);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kmax_one_forces_singletons() {
        let (p, v) = exact_partition_oracle(&triangle(), Some(1)).unwrap();
        assert_eq!(p, CoalitionStructure::singletons(3));
        assert_eq!(v, 0.0);
    }

    #[test]
    fn positive_connected_graph_gives_grand_coalition() {
        let g = WeightedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (0, 3, 0.1)])
            .unwrap();
        let (p, v) = exact_partition_oracle(&g, None).unwrap();
        assert_eq!(p.to_ids(), vec![vec![0, 1, 2, 3]]);
        assert!((v - 3.6).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_smallest_rgs() {
        // no edges: every partition is worth 0, RGS 000 comes first
        let (p, _) = exact_partition_oracle(&WeightedGraph::empty(3), None).unwrap();
        assert_eq!(p.to_ids(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn argument_checks() {
        assert!(matches!(
            exact_partition_oracle(&WeightedGraph::empty(13), None),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            exact_partition_oracle(&triangle(), Some(0)),
            Err(Error::InvalidArgument(_))
        ));
        let (p, v) = exact_partition_oracle(&WeightedGraph::empty(0), None).unwrap();
        assert!(p.is_empty());
        assert_eq!(v, 0.0);
    }
}
