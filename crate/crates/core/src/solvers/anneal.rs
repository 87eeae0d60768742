use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{Assignment, Qubo, QuboAdjacency};
use crate::rng;

use super::{SampleSet, Sampler};

/// Simulated-annealing settings. The inverse temperature follows a geometric
/// schedule from `beta_start` to `beta_end`, one value per sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct AnnealParams {
    pub num_reads: usize,
    pub sweeps_per_read: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            num_reads: 1000,
            sweeps_per_read: 1000,
            beta_start: 0.1,
            beta_end: 10.0,
            seed: 0,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::arg("numReads must be at least 1"));
        }
        if self.sweeps_per_read == 0 {
            return Err(Error::arg("sweepsPerRead must be at least 1"));
        }
        if !(self.beta_start > 0.0 && self.beta_end > self.beta_start && self.beta_end.is_finite())
        {
            return Err(Error::arg(format!(
                "need 0 < betaStart < betaEnd, got {} -> {}",
                self.beta_start, self.beta_end
            )));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Vec<f64> {
        let k = self.sweeps_per_read;
        if k == 1 {
            return vec![self.beta_end];
        }
        let ratio = (self.beta_end / self.beta_start).ln() / (k - 1) as f64;
        (0..k)
            .map(|i| self.beta_start * (ratio * i as f64).exp())
            .collect()
    }
}

/// Single-bit-flip Metropolis annealing with independent restarts. Read `r`
/// draws from its own stream keyed by `(seed, r)`, so output does not depend
/// on how reads are spread over threads.
#[derive(Clone, Debug, Default)]
pub struct AnnealSampler {
    pub params: AnnealParams,
}

impl AnnealSampler {
    pub fn new(params: AnnealParams) -> Self {
        AnnealSampler { params }
    }

    fn read(
        &self,
        q: &Qubo,
        adj: &QuboAdjacency,
        schedule: &[f64],
        index: u64,
    ) -> Result<(Assignment, f64)> {
        let n = adj.num_vars();
        let mut rng = rng::stream(self.params.seed, &[index]);
        let mut x = Assignment::zeros(n);
        for i in 0..n {
            x.set(i, rng.gen::<bool>());
        }
        // field[i] = linear_i + sum_j q_ij x_j; flipping i changes energy by
        // +field[i] when x_i = 0 and -field[i] when x_i = 1
        let mut field = adj.linear.clone();
        for (i, f) in field.iter_mut().enumerate() {
            for &(j, v) in &adj.neighbors[i] {
                if x.get(j) {
                    *f += v;
                }
            }
        }
        for &beta in schedule {
            for i in 0..n {
                let on = x.get(i);
                let delta = if on { -field[i] } else { field[i] };
                if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                    x.flip(i);
                    let sign = if on { -1.0 } else { 1.0 };
                    for &(j, v) in &adj.neighbors[i] {
                        field[j] += sign * v;
                    }
                }
            }
        }
        let e = q.energy(&x)?;
        Ok((x, e))
    }
}

impl Sampler for AnnealSampler {
    fn sample(&self, q: &Qubo) -> Result<SampleSet> {
        self.params.validate()?;
        let adj = QuboAdjacency::new(q);
        let schedule = self.params.schedule();
        let reads = (0..self.params.num_reads as u64)
            .into_par_iter()
            .map(|r| self.read(q, &adj, &schedule, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleSet::from_reads(reads))
    }

    fn name(&self) -> &'static str {
        "anneal"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Qubo {
        let mut q = Qubo::new(n);
        for i in 0..n {
            q.add_term(i, i, if i % 2 == 0 { -1.0 } else { 0.5 })
                .unwrap();
            if i + 1 < n {
                q.add_term(i, i + 1, -0.7).unwrap();
            }
        }
        q
    }

    #[test]
    fn schedule_is_geometric() {
        let p = AnnealParams {
            sweeps_per_read: 3,
            ..AnnealParams::default()
        };
        let s = p.schedule();
        assert_eq!(s.len(), 3);
        assert!((s[0] - 0.1).abs() < 1e-12);
        assert!((s[1] - 1.0).abs() < 1e-12);
        assert!((s[2] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn parameter_validation() {
        let bad = [
            AnnealParams {
                num_reads: 0,
                ..Default::default()
            },
            AnnealParams {
                beta_start: 0.0,
                ..Default::default()
            },
            AnnealParams {
                beta_start: 5.0,
                beta_end: 1.0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(AnnealSampler::new(p).sample(&chain(3)).is_err());
        }
    }

    #[test]
    fn single_read() {
        let p = AnnealParams {
            num_reads: 1,
            sweeps_per_read: 50,
            ..Default::default()
        };
        let set = AnnealSampler::new(p).sample(&chain(5)).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.samples()[0].occurrences, 1);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let p = AnnealParams {
            num_reads: 64,
            sweeps_per_read: 100,
            seed: 42,
            ..Default::default()
        };
        let q = chain(9);
        let a = AnnealSampler::new(p.clone()).sample(&q).unwrap();
        let b = AnnealSampler::new(p).sample(&q).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_occurrences(), 64);
        for s in a.samples() {
            assert_eq!(s.energy, q.energy(&s.assignment).unwrap());
        }
    }
}
