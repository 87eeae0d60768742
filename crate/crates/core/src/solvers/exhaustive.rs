use crate::error::{Error, Result};
use crate::qubo::{Assignment, Qubo, QuboAdjacency};

use super::{Sample, SampleSet, Sampler};

/// Largest model the exhaustive sampler accepts.
pub const EXHAUSTIVE_MAX_VARS: usize = 24;

// Gray-code walks accumulate flip deltas; re-evaluate from scratch this often.
const RESYNC_INTERVAL: u64 = 1 << 10;

/// Evaluates every assignment. Each appears once, so the first sample of the
/// result is a global minimum.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExhaustiveSampler;

impl Sampler for ExhaustiveSampler {
    fn sample(&self, q: &Qubo) -> Result<SampleSet> {
        let n = q.num_vars();
        if n > EXHAUSTIVE_MAX_VARS {
            return Err(Error::TooLarge(format!(
                "exhaustive sampling is capped at {EXHAUSTIVE_MAX_VARS} variables, got {n}"
            )));
        }
        let adj = QuboAdjacency::new(q);
        let total = 1u64 << n;
        let mut samples = Vec::with_capacity(total as usize);
        let mut x = Assignment::zeros(n);
        let mut energy = q.offset();
        samples.push(Sample {
            assignment: x.clone(),
            energy,
            occurrences: 1,
        });
        for step in 1..total {
            let bit = step.trailing_zeros() as usize;
            energy += adj.flip_delta(&x, bit);
            x.flip(bit);
            if step % RESYNC_INTERVAL == 0 {
                energy = q.energy(&x)?;
            }
            samples.push(Sample {
                assignment: x.clone(),
                energy,
                occurrences: 1,
            });
        }
        Ok(SampleSet::from_distinct(samples))
    }

    fn name(&self) -> &'static str {
        "exhaustive"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NodeId, WeightedGraph};
    use crate::qubo::build_split_qubo;

    #[test]
    fn one_variable() {
        let mut q = Qubo::new(1);
        q.add_term(0, 0, -2.0).unwrap();
        let set = ExhaustiveSampler.sample(&q).unwrap();
        let rows: Vec<(String, f64)> = set
            .samples()
            .iter()
            .map(|s| (s.assignment.to_string(), s.energy))
            .collect();
        assert_eq!(rows, vec![("1".into(), -2.0), ("0".into(), 0.0)]);
    }

    #[test]
    fn empty_model() {
        let mut q = Qubo::new(0);
        q.add_offset(4.0);
        let set = ExhaustiveSampler.sample(&q).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.samples()[0].energy, 4.0);
        assert!(set.samples()[0].assignment.is_empty());
    }

    #[test]
    fn triangle_minimum_isolates_c() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 2.0), (1, 2, -5.0), (2, 0, 1.0)]).unwrap();
        let (q, vm) = build_split_qubo(&g, &g.grand_coalition().unwrap(), true).unwrap();
        let set = ExhaustiveSampler.sample(&q).unwrap();
        assert_eq!(set.len(), 4);
        let best = set.lowest().unwrap();
        assert!((best.energy + 4.0).abs() < 1e-12);
        assert_eq!(vm.decode(&best.assignment).1, vec![NodeId(2)]);
    }

    #[test]
    fn energies_match_direct_evaluation() {
        let mut q = Qubo::new(11);
        for i in 0..11 {
            for j in i..11 {
                q.add_term(i, j, ((i * 7 + j * 3) % 5) as f64 - 2.1)
                    .unwrap();
            }
        }
        let set = ExhaustiveSampler.sample(&q).unwrap();
        assert_eq!(set.len(), 1 << 11);
        for s in set.samples() {
            assert!((s.energy - q.energy(&s.assignment).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn refuses_large_models() {
        assert!(matches!(
            ExhaustiveSampler.sample(&Qubo::new(25)),
            Err(Error::TooLarge(_))
        ));
    }
}
