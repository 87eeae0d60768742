//! Satellite link graphs: geometric graphs from positions, link weight
//! models, the synthetic sparsity generator and link-count metrics.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CoalitionStructure, WeightedGraph};
use crate::rng;
use crate::tle::{pairwise_distances, PositionRecord, StateVector};

/// Speed of light, km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WeightMode {
    /// `alpha L + beta R + gamma M + delta B`.
    Composite,
    /// `(1 - d / radius)` plus uniform noise.
    #[default]
    Starlink,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct WeightModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mode: WeightMode,
    /// Half-width of the uniform noise added in starlink mode.
    pub noise_amplitude: f64,
    pub seed: u64,
}

impl Default for WeightModel {
    fn default() -> Self {
        WeightModel {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 1.0,
            mode: WeightMode::Starlink,
            noise_amplitude: 1.5,
            seed: 0,
        }
    }
}

impl WeightModel {
    pub fn starlink(noise_amplitude: f64, seed: u64) -> Self {
        WeightModel {
            noise_amplitude,
            seed,
            ..WeightModel::default()
        }
    }

    pub fn composite(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        WeightModel {
            alpha,
            beta,
            gamma,
            delta,
            mode: WeightMode::Composite,
            ..WeightModel::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return Err(Error::arg(format!(
                "noise amplitude must be finite and >= 0, got {}",
                self.noise_amplitude
            )));
        }
        Ok(())
    }
}

/// Latency, reliability, management cost and bandwidth of a link.
pub trait LinkComponents {
    fn components(&self, u: usize, v: usize, distance_km: f64) -> [f64; 4];
}

/// Latency is light time over the link in seconds; the other terms are 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultComponents;

impl LinkComponents for DefaultComponents {
    fn components(&self, _u: usize, _v: usize, distance_km: f64) -> [f64; 4] {
        [distance_km / SPEED_OF_LIGHT_KM_S, 1.0, 1.0, 1.0]
    }
}

pub fn composite_weight(l: f64, r: f64, m: f64, b: f64, model: &WeightModel) -> Result<f64> {
    if model.mode != WeightMode::Composite {
        return Err(Error::arg("composite weight requires composite mode"));
    }
    if ![l, r, m, b].iter().all(|x| x.is_finite()) {
        return Err(Error::arg(format!(
            "non-finite link component in ({l}, {r}, {m}, {b})"
        )));
    }
    Ok(model.alpha * l + model.beta * r + model.gamma * m + model.delta * b)
}

/// Noise for the link `{u, v}`, the same whichever way round it is asked.
pub fn link_noise(model: &WeightModel, u: usize, v: usize) -> f64 {
    let a = model.noise_amplitude;
    if a == 0.0 {
        return 0.0;
    }
    let (lo, hi) = if u < v { (u, v) } else { (v, u) };
    rng::stream(model.seed, &[lo as u64, hi as u64]).gen_range(-a..=a)
}

/// `(1 - d / radius) + noise`, or `None` when the satellites are out of range.
pub fn starlink_weight(
    d: f64,
    radius: f64,
    model: &WeightModel,
    u: usize,
    v: usize,
) -> Result<Option<f64>> {
    if model.mode != WeightMode::Starlink {
        return Err(Error::arg("starlink weight requires starlink mode"));
    }
    model.validate()?;
    if !(d >= 0.0 && d.is_finite()) || !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::arg(format!("bad distance {d} or radius {radius}")));
    }
    if d > radius {
        return Ok(None);
    }
    Ok(Some((1.0 - d / radius) + link_noise(model, u, v)))
}

/// Links every pair within `radius` km, weighted by the model.
pub fn build_geometric_graph(
    states: &[StateVector],
    radius: f64,
    model: &WeightModel,
) -> Result<WeightedGraph> {
    build_geometric_graph_with(states, radius, model, &DefaultComponents)
}

pub fn build_geometric_graph_with(
    states: &[StateVector],
    radius: f64,
    model: &WeightModel,
    components: &dyn LinkComponents,
) -> Result<WeightedGraph> {
    if states.is_empty() {
        return Err(Error::arg("no satellite positions"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::arg(format!("radius must be positive, got {radius}")));
    }
    model.validate()?;
    let dist = pairwise_distances(states)?;
    let n = states.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let d = dist.get(u, v);
            if d > radius {
                continue;
            }
            let w = match model.mode {
                WeightMode::Starlink => starlink_weight(d, radius, model, u, v)?
                    .expect("distance already within radius"),
                WeightMode::Composite => {
                    let [l, r, m, b] = components.components(u, v, d);
                    composite_weight(l, r, m, b, model)?
                }
            };
            edges.push((u, v, w));
        }
    }
    WeightedGraph::from_edges(n, edges)
}

/// Same as [`build_geometric_graph`] for a positions snapshot.
pub fn graph_from_positions(
    positions: &[PositionRecord],
    radius: f64,
    model: &WeightModel,
) -> Result<WeightedGraph> {
    let t = positions.first().and_then(|p| p.t).unwrap_or_default();
    if let Some(p) = positions.iter().find(|p| p.t.unwrap_or(t) != t) {
        return Err(Error::arg(format!(
            "position of {} has a different timestamp",
            p.name
        )));
    }
    let states: Vec<StateVector> = positions
        .iter()
        .map(|p| StateVector {
            position: p.r,
            timestamp: t,
        })
        .collect();
    build_geometric_graph(&states, radius, model)
}

/// Edge count for `n` nodes at `sparsity`: a spanning tree plus the rounded
/// share `1 - sparsity` of the remaining pairs.
pub fn synthetic_edge_count(n: usize, sparsity: f64) -> usize {
    let tree = n - 1;
    let extra = n * (n - 1) / 2 - tree;
    tree + ((1.0 - sparsity) * extra as f64).round() as usize
}

/// Random connected graph whose density interpolates between complete
/// (`sparsity = 0`) and a tree (`sparsity = 1`).
///
/// A uniformly random labelled spanning tree (from a random Prüfer sequence)
/// is extended with distinct random extra edges; weights are i.i.d.
/// Uniform(-1, 1) in edge order.
pub fn generate_synthetic_graph(n: usize, sparsity: f64, seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::arg(format!(
            "synthetic graphs need at least 2 nodes, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(Error::arg(format!(
            "sparsity must be in [0, 1], got {sparsity}"
        )));
    }
    let mut rng = rng::stream(seed, &[n as u64]);
    let mut edges = random_tree(n, &mut rng);
    let mut adjacent = vec![false; n * n];
    for &(u, v) in &edges {
        adjacent[u * n + v] = true;
    }
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !adjacent[u * n + v])
        .collect();
    let extra = synthetic_edge_count(n, sparsity) - (n - 1);
    let (chosen, _) = candidates.partial_shuffle(&mut rng, extra);
    edges.extend_from_slice(chosen);
    edges.sort_unstable();
    let weighted: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .map(|(u, v)| (u, v, rng.gen_range(-1.0..1.0)))
        .collect();
    WeightedGraph::from_edges(n, weighted)
}

// Decodes a random Prüfer sequence; edges come back with u < v.
fn random_tree(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&i| degree[i] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = leaves
            .pop_first()
            .expect("a Prüfer sequence always leaves a leaf");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.insert(s);
        }
    }
    let a = leaves.pop_first().unwrap();
    let b = leaves.pop_first().unwrap();
    edges.push((a.min(b), a.max(b)));
    edges
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkStats {
    pub links_before: usize,
    pub links_after: usize,
    pub coalition_count: usize,
}

/// Links to maintain after clustering: every intra-coalition edge, plus one
/// cluster-head link per pair of coalitions joined by at least one edge.
pub fn link_stats(g: &WeightedGraph, p: &CoalitionStructure) -> Result<LinkStats> {
    p.validate(g.node_count())?;
    let labels = p.labels(g.node_count());
    let mut intra = 0;
    let mut pairs = std::collections::HashSet::new();
    for e in g.edges() {
        let (a, b) = (labels[e.u.index()], labels[e.v.index()]);
        if a == b {
            intra += 1;
        } else {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    Ok(LinkStats {
        links_before: g.edge_count(),
        links_after: intra + pairs.len(),
        coalition_count: p.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Coalition, NodeId};
    use chrono::{TimeZone, Utc};

    #[test]
    fn composite_examples() {
        let zero = WeightModel::composite(0.0, 0.0, 0.0, 0.0);
        assert_eq!(composite_weight(1.0, 2.0, 3.0, 4.0, &zero).unwrap(), 0.0);
        let latency_only = WeightModel::composite(1.0, 0.0, 0.0, 0.0);
        assert_eq!(
            composite_weight(3.5, 9.0, 9.0, 9.0, &latency_only).unwrap(),
            3.5
        );
        let ones = WeightModel::composite(1.0, 1.0, 1.0, 1.0);
        assert_eq!(composite_weight(1.0, 2.0, 3.0, 4.0, &ones).unwrap(), 10.0);
        assert!(composite_weight(f64::NAN, 0.0, 0.0, 0.0, &ones).is_err());
        assert!(composite_weight(1.0, 0.0, 0.0, 0.0, &WeightModel::default()).is_err());
    }

    #[test]
    fn starlink_examples() {
        let quiet = WeightModel::starlink(0.0, 1);
        assert_eq!(
            starlink_weight(100.0, 100.0, &quiet, 0, 1).unwrap(),
            Some(0.0)
        );
        assert_eq!(
            starlink_weight(50.0, 100.0, &quiet, 0, 1).unwrap(),
            Some(0.5)
        );
        assert_eq!(starlink_weight(101.0, 100.0, &quiet, 0, 1).unwrap(), None);
        let noisy = WeightModel::starlink(1.5, 9);
        let a = starlink_weight(30.0, 100.0, &noisy, 3, 8).unwrap();
        assert_eq!(a, starlink_weight(30.0, 100.0, &noisy, 8, 3).unwrap());
        assert_eq!(a, starlink_weight(30.0, 100.0, &noisy, 3, 8).unwrap());
        let w = a.unwrap();
        assert!((w - 0.7).abs() <= 1.5);
        assert!(starlink_weight(1.0, 1.0, &WeightModel::starlink(-1.0, 0), 0, 1).is_err());
    }

    #[test]
    fn noise_produces_negative_weights() {
        let m = WeightModel::starlink(1.5, 4);
        let negatives = (0..200)
            .filter(|&v| starlink_weight(10.0, 100.0, &m, 0, v + 1).unwrap().unwrap() < 0.0)
            .count();
        assert!(negatives > 0);
    }

    fn states(points: &[[f64; 3]]) -> Vec<StateVector> {
        let t = Utc.with_ymd_and_hms(2024, 5, 1, 0, 0, 0).unwrap();
        points
            .iter()
            .map(|&position| StateVector {
                position,
                timestamp: t,
            })
            .collect()
    }

    #[test]
    fn geometric_graphs() {
        let m = WeightModel::starlink(0.0, 0);
        let line = states(&[[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [20.0, 0.0, 0.0]]);
        let path = build_geometric_graph(&line, 10.0, &m).unwrap();
        assert_eq!(path.edge_count(), 2);
        assert!(path.weight(NodeId(0), NodeId(2)).is_none());
        assert_eq!(
            build_geometric_graph(&line, 5.0, &m).unwrap().edge_count(),
            0
        );
        assert_eq!(
            build_geometric_graph(&line, 50.0, &m).unwrap().edge_count(),
            3
        );
        assert!(build_geometric_graph(&[], 5.0, &m).is_err());

        let composite = WeightModel::composite(1.0, 0.0, 0.0, 0.0);
        let g = build_geometric_graph(&line, 10.0, &composite).unwrap();
        let w = g.weight(NodeId(0), NodeId(1)).unwrap();
        assert!((w - 10.0 / SPEED_OF_LIGHT_KM_S).abs() < 1e-15);
    }

    #[test]
    fn synthetic_edge_counts() {
        assert_eq!(synthetic_edge_count(10, 0.5), 27);
        assert_eq!(synthetic_edge_count(10, 1.0), 9);
        assert_eq!(synthetic_edge_count(10, 0.0), 45);
        let g = generate_synthetic_graph(10, 0.5, 3).unwrap();
        assert_eq!(g.edge_count(), 27);
        assert!(g.is_connected());
        assert!(g.edges().iter().all(|e| (-1.0..1.0).contains(&e.weight)));
        assert_eq!(g, generate_synthetic_graph(10, 0.5, 3).unwrap());
        assert!(generate_synthetic_graph(1, 0.5, 3).is_err());
        assert!(generate_synthetic_graph(5, 1.5, 3).is_err());
    }

    #[test]
    fn link_stats_examples() {
        let k6 =
            WeightedGraph::from_edges(6, (0..6).flat_map(|u| (u + 1..6).map(move |v| (u, v, 1.0))))
                .unwrap();
        let grand = CoalitionStructure::new(vec![k6.grand_coalition().unwrap()]);
        let s = link_stats(&k6, &grand).unwrap();
        assert_eq!(
            (s.links_before, s.links_after, s.coalition_count),
            (15, 15, 1)
        );

        let singles = link_stats(&k6, &CoalitionStructure::singletons(6)).unwrap();
        assert_eq!(singles.links_after, 15);

        let halves = CoalitionStructure::new(vec![
            Coalition::new([0usize, 1, 2]).unwrap(),
            Coalition::new([3usize, 4, 5]).unwrap(),
        ]);
        let s = link_stats(&k6, &halves).unwrap();
        assert_eq!((s.links_before, s.links_after), (15, 7));

        let bad = CoalitionStructure::new(vec![Coalition::new([0usize]).unwrap()]);
        assert!(matches!(
            link_stats(&k6, &bad),
            Err(Error::InvalidPartition(_))
        ));
    }
}
