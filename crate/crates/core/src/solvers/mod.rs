//! Samplers that minimise a [`Qubo`], the sample sets they return, and an
//! exact set-partition oracle for the full coalition problem.

mod anneal;
mod exhaustive;
mod oracle;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{Assignment, Qubo};

pub use anneal::{AnnealParams, AnnealSampler};
pub use exhaustive::{ExhaustiveSampler, EXHAUSTIVE_MAX_VARS};
pub use oracle::{exact_partition_oracle, ORACLE_MAX_NODES};

/// Anything that turns a QUBO into a sample set. Implementations must be
/// deterministic for a fixed configuration.
pub trait Sampler: Sync {
    fn sample(&self, q: &Qubo) -> Result<SampleSet>;

    fn name(&self) -> &'static str;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub assignment: Assignment,
    pub energy: f64,
    pub occurrences: u64,
}

/// Distinct samples sorted by energy, ties by assignment.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SampleSet {
    samples: Vec<Sample>,
}

/// One row of the JSON dump `[{"bits": "0101", "energy": e, "count": c}, ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub bits: String,
    pub energy: f64,
    pub count: u64,
}

fn sample_order(a: &Sample, b: &Sample) -> Ordering {
    a.energy
        .total_cmp(&b.energy)
        .then_with(|| a.assignment.cmp(&b.assignment))
}

impl SampleSet {
    /// Aggregates raw reads: repeated assignments become one sample whose
    /// count is the number of reads.
    pub fn from_reads<I>(reads: I) -> Self
    where
        I: IntoIterator<Item = (Assignment, f64)>,
    {
        let mut reads: Vec<(Assignment, f64)> = reads.into_iter().collect();
        reads.sort_by(|a, b| a.0.cmp(&b.0));
        let mut samples: Vec<Sample> = Vec::new();
        for (assignment, energy) in reads {
            match samples.last_mut() {
                Some(last) if last.assignment == assignment => last.occurrences += 1,
                _ => samples.push(Sample {
                    assignment,
                    energy,
                    occurrences: 1,
                }),
            }
        }
        samples.sort_by(sample_order);
        SampleSet { samples }
    }

    /// Takes samples that are already distinct and sorts them.
    pub fn from_distinct(mut samples: Vec<Sample>) -> Self {
        samples.sort_unstable_by(sample_order);
        debug_assert!(samples
            .windows(2)
            .all(|w| w[0].assignment != w[1].assignment));
        SampleSet { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_occurrences(&self) -> u64 {
        self.samples.iter().map(|s| s.occurrences).sum()
    }

    pub fn lowest(&self) -> Result<&Sample> {
        self.samples.first().ok_or(Error::EmptySampleSet)
    }

    /// The sample read most often; ties go to lower energy, then to the
    /// lexicographically smaller assignment.
    pub fn most_frequent(&self) -> Result<&Sample> {
        most_frequent_of(self.samples.iter()).ok_or(Error::EmptySampleSet)
    }

    pub fn to_records(&self) -> Vec<SampleRecord> {
        self.samples
            .iter()
            .map(|s| SampleRecord {
                bits: s.assignment.to_string(),
                energy: s.energy,
                count: s.occurrences,
            })
            .collect()
    }

    pub fn from_records(records: &[SampleRecord]) -> Result<Self> {
        let samples = records
            .iter()
            .map(|r| {
                Ok(Sample {
                    assignment: r.bits.parse()?,
                    energy: r.energy,
                    occurrences: r.count,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleSet::from_distinct(samples))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_records())?)
    }
}

/// Most frequent sample of an iterator already in sample-set order.
pub(crate) fn most_frequent_of<'a, I>(samples: I) -> Option<&'a Sample>
where
    I: IntoIterator<Item = &'a Sample>,
{
    let mut best: Option<&Sample> = None;
    for s in samples {
        // sorted input: the first sample with the top count wins ties
        if best.is_none_or(|b| s.occurrences > b.occurrences) {
            best = Some(s);
        }
    }
    best
}

/// Free-function form of [`SampleSet::most_frequent`].
pub fn most_frequent_sample(s: &SampleSet) -> Result<&Sample> {
    s.most_frequent()
}
