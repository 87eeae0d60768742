//! Weighted undirected graphs, coalitions and coalition values.
//!
//! The value of a coalition is the total weight of the edges with both
//! endpoints inside it; the value of a coalition structure is the sum over
//! its coalitions. Edges between coalitions contribute nothing.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index, `0..node_count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

/// An undirected edge, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

/// Undirected weighted simple graph. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    // neighbour lists sorted by neighbour index
    adjacency: Vec<Vec<(usize, f64)>>,
}

/// On-disk form: `{"n": int, "edges": [[u, v, w], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn empty(node_count: usize) -> Self {
        WeightedGraph {
            node_count,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); node_count],
        }
    }

    /// Builds a graph from `(u, v, weight)` triples.
    ///
    /// Self-loops, duplicate unordered pairs, out-of-range endpoints and
    /// non-finite weights are rejected.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = WeightedGraph::empty(node_count);
        let mut seen = HashSet::new();
        for (a, b, w) in edges {
            for x in [a, b] {
                if x >= node_count {
                    return Err(Error::InvalidNode {
                        node: x,
                        count: node_count,
                    });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !w.is_finite() {
                return Err(Error::arg(format!(
                    "edge ({a}, {b}) has non-finite weight {w}"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge(u, v));
            }
            g.edges.push(Edge {
                u: NodeId(u),
                v: NodeId(v),
                weight: w,
            });
            g.adjacency[u].push((v, w));
            g.adjacency[v].push((u, w));
        }
        for list in &mut g.adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u.0].len()
    }

    /// Neighbours of `u` with edge weights, ascending by neighbour id.
    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.adjacency[u.0].iter().map(|&(v, w)| (NodeId(v), w))
    }

    pub(crate) fn adjacency_of(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let list = self.adjacency.get(u.0)?;
        list.binary_search_by_key(&v.0, |&(x, _)| x)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn total_abs_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight.abs()).sum()
    }

    /// The coalition of all nodes. Fails on an empty graph.
    pub fn grand_coalition(&self) -> Result<Coalition> {
        Coalition::new(self.nodes())
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u.0 < self.node_count {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node: u.0,
                count: self.node_count,
            })
        }
    }

    fn mask(&self, members: &[NodeId]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.node_count];
        for &m in members {
            self.check_node(m)?;
            mask[m.0] = true;
        }
        Ok(mask)
    }

    /// Sum of weights of edges with both endpoints in `c`, each counted once.
    pub fn coalition_value(&self, c: &Coalition) -> Result<f64> {
        let mask = self.mask(c.members())?;
        Ok(self.value_with_mask(c.members(), &mask))
    }

    fn value_with_mask(&self, members: &[NodeId], mask: &[bool]) -> f64 {
        let mut total = 0.0;
        for &u in members {
            for &(v, w) in &self.adjacency[u.0] {
                if v > u.0 && mask[v] {
                    total += w;
                }
            }
        }
        total
    }

    /// Sum of coalition values. `p` must partition the node set.
    pub fn structure_value(&self, p: &CoalitionStructure) -> Result<f64> {
        p.validate(self.node_count)?;
        let mut total = 0.0;
        for c in p.coalitions() {
            total += self.coalition_value(c)?;
        }
        Ok(total)
    }

    /// Weight of the edges inside `c` that cross between `side` and `c \ side`.
    pub fn cut_weight(&self, c: &Coalition, side: &[NodeId]) -> Result<f64> {
        let in_c = self.mask(c.members())?;
        let in_side = self.mask(side)?;
        if let Some(bad) = side.iter().find(|s| !in_c[s.0]) {
            return Err(Error::arg(format!(
                "node {bad} of side is not in the coalition"
            )));
        }
        let mut total = 0.0;
        for u in (0..self.node_count).filter(|&u| in_side[u]) {
            for &(v, w) in &self.adjacency[u] {
                if in_c[v] && !in_side[v] {
                    total += w;
                }
            }
        }
        Ok(total)
    }

    /// Maximal connected pieces of `c` using only edges internal to `c`,
    /// ordered by smallest member.
    pub fn connected_components(&self, c: &Coalition) -> Result<Vec<Coalition>> {
        let in_c = self.mask(c.members())?;
        let mut seen = vec![false; self.node_count];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        // members are ascending, so components come out ordered by smallest member
        for &start in c.members() {
            if seen[start.0] {
                continue;
            }
            seen[start.0] = true;
            queue.push_back(start.0);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(NodeId(u));
                for &(v, _) in &self.adjacency[u] {
                    if in_c[v] && !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            out.push(Coalition::from_sorted_unchecked({
                comp.sort_unstable();
                comp
            }));
        }
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        match self.grand_coalition() {
            Ok(all) => self
                .connected_components(&all)
                .map(|cs| cs.len() == 1)
                .unwrap_or(false),
            Err(_) => true,
        }
    }

    /// The subgraph induced by `c`, re-indexed densely. The returned map sends
    /// a new index to the original node.
    pub fn induced_subgraph(&self, c: &Coalition) -> Result<(WeightedGraph, Vec<NodeId>)> {
        let in_c = self.mask(c.members())?;
        let mut new_index = vec![usize::MAX; self.node_count];
        for (i, m) in c.members().iter().enumerate() {
            new_index[m.0] = i;
        }
        let mut edges = Vec::new();
        for &u in c.members() {
            for &(v, w) in &self.adjacency[u.0] {
                if v > u.0 && in_c[v] {
                    edges.push((new_index[u.0], new_index[v], w));
                }
            }
        }
        let sub = WeightedGraph::from_edges(c.len(), edges)?;
        Ok((sub, c.members().to_vec()))
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.node_count,
            edges: self
                .edges
                .iter()
                .map(|e| (e.u.0, e.v.0, e.weight))
                .collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        WeightedGraph::from_edges(file.n, file.edges.iter().copied())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        WeightedGraph::from_file(&file)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        WeightedGraph::from_json(&text)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// A non-empty set of nodes, kept sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<NodeId>", into = "Vec<NodeId>")]
pub struct Coalition {
    members: Vec<NodeId>,
}

impl Coalition {
    /// Rejects empty input and repeated members.
    pub fn new<I, T>(members: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<NodeId>,
    {
        let mut members: Vec<NodeId> = members.into_iter().map(Into::into).collect();
        if members.is_empty() {
            return Err(Error::arg("coalition must not be empty"));
        }
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::arg(format!("node {} repeated in coalition", w[0])));
        }
        Ok(Coalition { members })
    }

    pub(crate) fn from_sorted_unchecked(members: Vec<NodeId>) -> Self {
        debug_assert!(!members.is_empty());
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Coalition { members }
    }

    pub fn singleton(u: NodeId) -> Self {
        Coalition { members: vec![u] }
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn smallest(&self) -> NodeId {
        self.members[0]
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.members.binary_search(&u).is_ok()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.0).collect()
    }
}

impl TryFrom<Vec<NodeId>> for Coalition {
    type Error = Error;

    fn try_from(v: Vec<NodeId>) -> Result<Self> {
        Coalition::new(v)
    }
}

impl From<Coalition> for Vec<NodeId> {
    fn from(c: Coalition) -> Self {
        c.members
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// A list of coalitions, ordered by smallest member.
///
/// Construction only orders; [`CoalitionStructure::validate`] checks that the
/// coalitions partition a node set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoalitionStructure {
    coalitions: Vec<Coalition>,
}

impl CoalitionStructure {
    pub fn new(mut coalitions: Vec<Coalition>) -> Self {
        coalitions.sort_by_key(|c| c.smallest());
        CoalitionStructure { coalitions }
    }

    pub fn singletons(n: usize) -> Self {
        CoalitionStructure {
            coalitions: (0..n).map(|i| Coalition::singleton(NodeId(i))).collect(),
        }
    }

    /// Structure from a block label per node (e.g. a restricted-growth string).
    pub fn from_labels(labels: &[usize]) -> Self {
        let blocks = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); blocks];
        for (i, &b) in labels.iter().enumerate() {
            groups[b].push(NodeId(i));
        }
        CoalitionStructure::new(
            groups
                .into_iter()
                .filter(|g| !g.is_empty())
                .map(Coalition::from_sorted_unchecked)
                .collect(),
        )
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coalitions.is_empty()
    }

    pub fn largest_size(&self) -> usize {
        self.coalitions
            .iter()
            .map(Coalition::len)
            .max()
            .unwrap_or(0)
    }

    /// Block index of every node. Assumes the structure is valid for `n`.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut labels = vec![usize::MAX; n];
        for (b, c) in self.coalitions.iter().enumerate() {
            for m in c.members() {
                labels[m.0] = b;
            }
        }
        labels
    }

    /// Checks that the coalitions are disjoint and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for c in &self.coalitions {
            for &m in c.members() {
                if m.0 >= n {
                    return Err(Error::InvalidPartition(format!(
                        "node {m} out of range for {n} nodes"
                    )));
                }
                if seen[m.0] {
                    return Err(Error::InvalidPartition(format!("node {m} appears twice")));
                }
                seen[m.0] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "node {missing} not covered"
            )));
        }
        Ok(())
    }

    pub fn to_ids(&self) -> Vec<Vec<usize>> {
        self.coalitions.iter().map(Coalition::ids).collect()
    }
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coalitions.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}
