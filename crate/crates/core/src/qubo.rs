//! QUBO models over binary variables, and the min-cut bipartition QUBO of a
//! coalition.
//!
//! For a coalition `c`, variable `x_u = 1` puts node `u` on side B. Every
//! internal edge `(u, v, w)` contributes `w * (x_u + x_v - 2 x_u x_v)`, which
//! is `w` exactly when the edge is cut. The energy of an assignment is
//! therefore the cut weight of the bipartition it encodes, and minimising it
//! maximises the value kept inside the two sides.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graph::{Coalition, NodeId, WeightedGraph};

/// A vector of bits, packed most-significant-first so that comparing the
/// words compares the bit strings lexicographically.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    len: usize,
    words: SmallVec<[u64; 1]>,
}

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Assignment {
            len,
            words: SmallVec::from_elem(0, len.div_ceil(64)),
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut a = Assignment::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            a.set(i, b);
        }
        a
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn mask(i: usize) -> u64 {
        1u64 << (63 - (i % 64))
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] & Self::mask(i) != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        if value {
            self.words[i / 64] |= Self::mask(i);
        } else {
            self.words[i / 64] &= !Self::mask(i);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= Self::mask(i);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// The first `len` bits.
    pub fn prefix(&self, len: usize) -> Assignment {
        let mut a = Assignment::zeros(len.min(self.len));
        for i in 0..a.len {
            a.set(i, self.get(i));
        }
        a
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Assignment) -> Assignment {
        let mut a = Assignment::zeros(self.len + other.len);
        for (i, b) in self.iter().chain(other.iter()).enumerate() {
            a.set(i, b);
        }
        a
    }
}

impl Ord for Assignment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .as_slice()
            .cmp(other.words.as_slice())
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Assignment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assignment({self})")
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::arg(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assignment::from_bits(&bits))
    }
}

/// Quadratic form over binary variables: `sum_{i<=j} q_ij x_i x_j + offset`.
/// Diagonal entries are the linear terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Qubo {
    num_vars: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

/// Debug dump form: `{"n": int, "offset": real, "terms": [[i, j, coeff], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuboDump {
    pub n: usize,
    pub offset: f64,
    pub terms: Vec<(usize, usize, f64)>,
}

impl Qubo {
    pub fn new(num_vars: usize) -> Self {
        Qubo {
            num_vars,
            coeffs: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    /// Adds `value` to the coefficient of `x_i x_j` (order of `i`, `j` is free).
    pub fn add_term(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= self.num_vars || j >= self.num_vars {
            return Err(Error::arg(format!(
                "term ({i}, {j}) out of range for {} variables",
                self.num_vars
            )));
        }
        if !value.is_finite() {
            return Err(Error::arg(format!("non-finite coefficient {value}")));
        }
        self.add(i, j, value);
        Ok(())
    }

    fn add(&mut self, i: usize, j: usize, value: f64) {
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.coeffs.entry(key).or_insert(0.0) += value;
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.coeffs.get(&key).copied().unwrap_or(0.0)
    }

    /// Stored `(i, j, coeff)` with `i <= j`, in ascending key order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn energy(&self, x: &Assignment) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::arg(format!(
                "assignment has {} bits, QUBO has {} variables",
                x.len(),
                self.num_vars
            )));
        }
        let mut e = self.offset;
        for (&(i, j), &q) in &self.coeffs {
            if x.get(i) && x.get(j) {
                e += q;
            }
        }
        Ok(e)
    }

    pub fn to_dump(&self) -> QuboDump {
        QuboDump {
            n: self.num_vars,
            offset: self.offset,
            terms: self.terms().collect(),
        }
    }

    pub fn from_dump(dump: &QuboDump) -> Result<Self> {
        let mut q = Qubo::new(dump.n);
        q.offset = dump.offset;
        for &(i, j, v) in &dump.terms {
            q.add_term(i, j, v)?;
        }
        Ok(q)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_dump())?)
    }
}

/// Linear terms and symmetric neighbour lists of a [`Qubo`], for samplers
/// that need O(degree) flip deltas.
#[derive(Clone, Debug)]
pub struct QuboAdjacency {
    pub linear: Vec<f64>,
    pub neighbors: Vec<Vec<(usize, f64)>>,
    pub offset: f64,
}

impl QuboAdjacency {
    pub fn new(q: &Qubo) -> Self {
        let n = q.num_vars();
        let mut linear = vec![0.0; n];
        let mut neighbors = vec![Vec::new(); n];
        for (i, j, v) in q.terms() {
            if i == j {
                linear[i] += v;
            } else {
                neighbors[i].push((j, v));
                neighbors[j].push((i, v));
            }
        }
        QuboAdjacency {
            linear,
            neighbors,
            offset: q.offset(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    /// Energy change from flipping bit `i` of `x`.
    #[inline]
    pub fn flip_delta(&self, x: &Assignment, i: usize) -> f64 {
        let mut field = self.linear[i];
        for &(j, v) in &self.neighbors[i] {
            if x.get(j) {
                field += v;
            }
        }
        if x.get(i) {
            -field
        } else {
            field
        }
    }
}

/// Binds QUBO variables to graph nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarMap {
    /// Node of each QUBO variable, ascending.
    pub var_to_node: Vec<NodeId>,
    /// Node pinned to side A (bit 0) and removed from the model.
    pub fixed_node: Option<NodeId>,
}

impl VarMap {
    pub fn num_vars(&self) -> usize {
        self.var_to_node.len()
    }

    /// Splits the coalition by the leading `num_vars` bits of `x`: bit 0 and
    /// the fixed node go to side A, bit 1 to side B. Both sides ascending.
    pub fn decode(&self, x: &Assignment) -> (Vec<NodeId>, Vec<NodeId>) {
        let mut a: Vec<NodeId> = self.fixed_node.into_iter().collect();
        let mut b = Vec::new();
        for (i, &node) in self.var_to_node.iter().enumerate() {
            if x.get(i) {
                b.push(node);
            } else {
                a.push(node);
            }
        }
        a.sort_unstable();
        (a, b)
    }
}

/// Builds the QUBO whose energy is the cut weight of the bipartition.
///
/// With `fix_symmetry` the smallest member is pinned to side A and eliminated,
/// so the model has `|c| - 1` variables and all-zeros means "no split".
pub fn build_split_qubo(
    g: &WeightedGraph,
    c: &Coalition,
    fix_symmetry: bool,
) -> Result<(Qubo, VarMap)> {
    if c.len() < 2 {
        return Err(Error::TooSmall(format!(
            "cannot bipartition coalition {c} of size {}",
            c.len()
        )));
    }
    for &m in c.members() {
        g.check_node(m)?;
    }
    let fixed = fix_symmetry.then(|| c.smallest());
    let var_to_node: Vec<NodeId> = c
        .members()
        .iter()
        .copied()
        .filter(|&m| Some(m) != fixed)
        .collect();
    // node -> var, or FIXED / NOT_IN
    const NOT_IN: usize = usize::MAX;
    const FIXED: usize = usize::MAX - 1;
    let mut var_of = vec![NOT_IN; g.node_count()];
    if let Some(f) = fixed {
        var_of[f.index()] = FIXED;
    }
    for (i, m) in var_to_node.iter().enumerate() {
        var_of[m.index()] = i;
    }

    let mut q = Qubo::new(var_to_node.len());
    for &u in c.members() {
        for &(v, w) in g.adjacency_of(u.index()) {
            if v <= u.index() || var_of[v] == NOT_IN {
                continue;
            }
            match (var_of[u.index()], var_of[v]) {
                (FIXED, j) | (j, FIXED) => q.add(j, j, w),
                (i, j) => {
                    q.add(i, i, w);
                    q.add(j, j, w);
                    q.add(i, j, -2.0 * w);
                }
            }
        }
    }
    Ok((
        q,
        VarMap {
            var_to_node,
            fixed_node: fixed,
        },
    ))
}

/// Default penalty weight for [`add_proper_split_penalty`]:
/// `1 + sum |w|` over the coalition's internal edges.
pub fn default_penalty(g: &WeightedGraph, c: &Coalition) -> Result<f64> {
    let mut in_c = vec![false; g.node_count()];
    for &m in c.members() {
        g.check_node(m)?;
        in_c[m.index()] = true;
    }
    let mut total = 0.0;
    for &u in c.members() {
        for &(v, w) in g.adjacency_of(u.index()) {
            if v > u.index() && in_c[v] {
                total += w.abs();
            }
        }
    }
    Ok(1.0 + total)
}

/// Number of auxiliary variables [`add_proper_split_penalty`] appends for a
/// model with `k` variables.
pub fn or_chain_aux_count(k: usize) -> usize {
    k.saturating_sub(1)
}

/// Adds `lambda` to every state where all original variables are zero and
/// nothing to any state with at least one bit set.
///
/// The OR of the original `k` bits is computed by a chain of `k - 1` two-input
/// OR gates on auxiliary variables appended after the originals
/// (`y_1 = x_0 | x_1`, `y_m = y_{m-1} | x_m`). Each gate carries the penalty
/// `lambda * (a b + a + b + y - 2 a y - 2 b y)`, which is zero exactly when
/// `y = a | b`. The model then gets `lambda * (1 - y_last)`. Minimising over
/// the auxiliaries recovers the original energy plus `lambda` on all-zeros.
pub fn add_proper_split_penalty(q: &Qubo, lambda: f64) -> Result<Qubo> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::arg(format!(
            "penalty must be positive, got {lambda}"
        )));
    }
    let k = q.num_vars();
    let aux = or_chain_aux_count(k);
    let mut out = Qubo::new(k + aux);
    for (i, j, v) in q.terms() {
        out.add(i, j, v);
    }
    out.offset = q.offset() + lambda;
    if k == 0 {
        return Ok(out);
    }
    let mut acc = 0; // variable holding the running OR
    for m in 1..k {
        let y = k + m - 1;
        let (a, b) = (acc, m);
        out.add(a, b, lambda);
        out.add(a, a, lambda);
        out.add(b, b, lambda);
        out.add(y, y, lambda);
        out.add(a, y, -2.0 * lambda);
        out.add(b, y, -2.0 * lambda);
        acc = y;
    }
    out.add(acc, acc, -lambda);
    Ok(out)
}

/// Extends `x` with the auxiliary bits that satisfy every OR gate of
/// [`add_proper_split_penalty`].
pub fn with_consistent_or_chain(x: &Assignment) -> Assignment {
    let k = x.len();
    let mut aux = Assignment::zeros(or_chain_aux_count(k));
    if k >= 2 {
        let mut running = x.get(0);
        for m in 1..k {
            running |= x.get(m);
            aux.set(m - 1, running);
        }
    }
    x.concat(&aux)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 2.0), (1, 2, -5.0), (2, 0, 1.0)]).unwrap()
    }

    fn bits(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    #[test]
    fn assignment_packing_and_order() {
        let a = bits("0101");
        assert_eq!(a.to_string(), "0101");
        assert_eq!(a.count_ones(), 2);
        assert!(bits("0011") < bits("0100"));
        assert!(bits("1") > bits("0"));
        let long: Assignment = "1".repeat(70).parse().unwrap();
        assert_eq!(long.count_ones(), 70);
        let mut shorter = long.clone();
        shorter.flip(69);
        assert!(shorter < long);
        assert!("x1".parse::<Assignment>().is_err());
    }

    #[test]
    fn energy_basics() {
        let mut empty = Qubo::new(0);
        empty.add_offset(1.5);
        assert_eq!(empty.energy(&Assignment::zeros(0)).unwrap(), 1.5);

        let mut diag = Qubo::new(1);
        diag.add_term(0, 0, 5.0).unwrap();
        assert_eq!(diag.energy(&bits("1")).unwrap(), 5.0);
        assert!(matches!(
            diag.energy(&bits("10")),
            Err(Error::InvalidArgument(_))
        ));
        assert!(diag.add_term(0, 1, 1.0).is_err());
    }

    #[test]
    fn split_qubo_triangle() {
        let g = triangle();
        let c = g.grand_coalition().unwrap();
        for fix in [false, true] {
            let (q, vm) = build_split_qubo(&g, &c, fix).unwrap();
            assert_eq!(q.energy(&Assignment::zeros(q.num_vars())).unwrap(), 0.0);
            // select {c} = node 2
            let mut x = Assignment::zeros(q.num_vars());
            let pos = vm.var_to_node.iter().position(|&n| n == NodeId(2)).unwrap();
            x.set(pos, true);
            assert!((q.energy(&x).unwrap() + 4.0).abs() < EPS);
            let (a, b) = vm.decode(&x);
            assert_eq!(b, vec![NodeId(2)]);
            assert_eq!(a, vec![NodeId(0), NodeId(1)]);
        }
    }

    #[test]
    fn split_qubo_two_nodes() {
        let g = WeightedGraph::from_edges(2, [(0, 1, -3.0)]).unwrap();
        let c = g.grand_coalition().unwrap();
        let (q, _) = build_split_qubo(&g, &c, false).unwrap();
        assert!((q.energy(&bits("01")).unwrap() + 3.0).abs() < EPS);
        let (q, vm) = build_split_qubo(&g, &c, true).unwrap();
        assert_eq!(vm.fixed_node, Some(NodeId(0)));
        assert!((q.energy(&bits("1")).unwrap() + 3.0).abs() < EPS);
    }

    #[test]
    fn split_qubo_rejects_singletons() {
        let g = triangle();
        assert!(matches!(
            build_split_qubo(&g, &Coalition::singleton(NodeId(0)), true),
            Err(Error::TooSmall(_))
        ));
    }

    #[test]
    fn penalty_rejects_non_positive() {
        let q = Qubo::new(2);
        assert!(add_proper_split_penalty(&q, 0.0).is_err());
        assert!(add_proper_split_penalty(&q, -1.0).is_err());
    }

    #[test]
    fn penalty_small_cases() {
        // k = 1: no auxiliaries, reward sits on x_0 itself
        let mut q = Qubo::new(1);
        q.add_term(0, 0, 2.0).unwrap();
        let p = add_proper_split_penalty(&q, 3.0).unwrap();
        assert_eq!(p.num_vars(), 1);
        assert_eq!(p.energy(&bits("0")).unwrap(), 3.0);
        assert_eq!(p.energy(&bits("1")).unwrap(), 2.0);
        // k = 0: only the constant shift
        let p = add_proper_split_penalty(&Qubo::new(0), 3.0).unwrap();
        assert_eq!(p.energy(&Assignment::zeros(0)).unwrap(), 3.0);
    }

    #[test]
    fn dump_round_trip() {
        let g = triangle();
        let (q, _) = build_split_qubo(&g, &g.grand_coalition().unwrap(), true).unwrap();
        let text = q.to_json().unwrap();
        let back: QuboDump = serde_json::from_str(&text).unwrap();
        assert_eq!(Qubo::from_dump(&back).unwrap(), q);
    }
}
