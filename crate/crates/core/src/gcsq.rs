//! Top-down coalition formation by repeated QUBO bipartition.
//!
//! The node set starts as its connected components. Each coalition with two
//! or more members is handed to a sampler as a min-cut QUBO; a proper split
//! with negative cut weight raises the structure value and is accepted.
//! When a maximum coalition size is set, an oversize coalition is split even
//! if no split helps, using the best proper sample the sampler returned.
//!
//! Coalitions in flight are vertex-disjoint, so the loop runs in rounds: all
//! pending coalitions of a round are sampled in parallel and their decisions
//! are applied in a fixed order (largest first, then smallest member).

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Coalition, CoalitionStructure, NodeId, WeightedGraph};
use crate::qubo::{add_proper_split_penalty, build_split_qubo, default_penalty, Qubo, VarMap};
use crate::rng;
use crate::solvers::{
    most_frequent_of, AnnealParams, AnnealSampler, ExhaustiveSampler, Sample, SampleSet, Sampler,
    EXHAUSTIVE_MAX_VARS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Selection {
    #[default]
    LowestEnergy,
    MostFrequent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum SamplerChoice {
    Exhaustive,
    Anneal(AnnealParams),
}

impl Default for SamplerChoice {
    fn default() -> Self {
        SamplerChoice::Anneal(AnnealParams::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GcsqOptions {
    /// Maximum coalition size.
    pub kmax: Option<usize>,
    pub selection: Selection,
    /// Replace each accepted side by its connected components.
    pub decompose_sides: bool,
    pub sampler: SamplerChoice,
}

impl Default for GcsqOptions {
    fn default() -> Self {
        GcsqOptions {
            kmax: None,
            selection: Selection::LowestEnergy,
            decompose_sides: true,
            sampler: SamplerChoice::default(),
        }
    }
}

impl GcsqOptions {
    pub fn validate(&self) -> Result<()> {
        if self.kmax == Some(0) {
            return Err(Error::arg("kmax must be at least 1"));
        }
        if let SamplerChoice::Anneal(p) = &self.sampler {
            p.validate()?;
        }
        Ok(())
    }

    fn oversize(&self, size: usize) -> bool {
        self.kmax.is_some_and(|k| size > k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SplitReason {
    Improving,
    ForcedBySize,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitDecision {
    pub accepted: bool,
    pub side_a: Vec<NodeId>,
    pub side_b: Vec<NodeId>,
    pub cut_value: f64,
    pub reason: SplitReason,
}

impl SplitDecision {
    fn rejected() -> Self {
        SplitDecision {
            accepted: false,
            side_a: Vec::new(),
            side_b: Vec::new(),
            cut_value: 0.0,
            reason: SplitReason::None,
        }
    }
}

/// Which sampler produced the set a decision was taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SamplerUsed {
    Anneal,
    Exhaustive,
    AnnealPenalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEntry {
    pub coalition: Coalition,
    pub decision: SplitDecision,
    pub sampler: SamplerUsed,
    pub sampler_seconds: f64,
    pub qubo_vars: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GcsqTrace {
    pub entries: Vec<TraceEntry>,
}

impl GcsqTrace {
    pub fn accepted(&self) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(|e| e.decision.accepted)
    }

    pub fn total_sampler_seconds(&self) -> f64 {
        self.entries.iter().map(|e| e.sampler_seconds).sum()
    }

    /// Rebuilds the final structure from the connected components of `g` by
    /// applying the accepted splits in order.
    pub fn replay(&self, g: &WeightedGraph, decompose_sides: bool) -> Result<CoalitionStructure> {
        let mut current = match g.grand_coalition() {
            Ok(all) => g.connected_components(&all)?,
            Err(_) => Vec::new(),
        };
        for entry in self.accepted() {
            let pos = current
                .iter()
                .position(|c| *c == entry.coalition)
                .ok_or_else(|| {
                    Error::arg(format!(
                        "trace splits {} which is not current",
                        entry.coalition
                    ))
                })?;
            current.swap_remove(pos);
            let sides = [
                Coalition::new(entry.decision.side_a.iter().copied())?,
                Coalition::new(entry.decision.side_b.iter().copied())?,
            ];
            for side in sides {
                if decompose_sides {
                    current.extend(g.connected_components(&side)?);
                } else {
                    current.push(side);
                }
            }
        }
        Ok(CoalitionStructure::new(current))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GcsqResult {
    pub value: f64,
    pub coalitions: Vec<Vec<usize>>,
    pub trace: GcsqTrace,
}

/// Picks the split to apply from a sample set of the fixed-symmetry split
/// QUBO for `c`.
///
/// A sample is proper when both sides are non-empty. Coalitions within the
/// size limit accept the selected proper sample only if its cut is negative.
/// Oversize coalitions accept it regardless and fail with
/// [`Error::NoFeasibleSample`] when the set holds no proper sample.
pub fn select_split(
    s: &SampleSet,
    vm: &VarMap,
    c: &Coalition,
    opts: &GcsqOptions,
) -> Result<SplitDecision> {
    let n = vm.num_vars();
    let proper = |x: &&Sample| {
        let ones = x.assignment.prefix(n).count_ones();
        let a_len = n - ones + usize::from(vm.fixed_node.is_some());
        ones > 0 && a_len > 0
    };
    let chosen = match opts.selection {
        Selection::LowestEnergy => s.samples().iter().find(proper),
        Selection::MostFrequent => most_frequent_of(s.samples().iter().filter(proper)),
    };
    let forced = opts.oversize(c.len());
    let Some(sample) = chosen else {
        if forced {
            return Err(Error::NoFeasibleSample(format!(
                "no proper split of {c} (size {}) in {} samples",
                c.len(),
                s.len()
            )));
        }
        return Ok(SplitDecision::rejected());
    };
    let reason = if forced {
        SplitReason::ForcedBySize
    } else if sample.energy < 0.0 {
        SplitReason::Improving
    } else {
        return Ok(SplitDecision::rejected());
    };
    let (side_a, side_b) = vm.decode(&sample.assignment);
    Ok(SplitDecision {
        accepted: true,
        side_a,
        side_b,
        cut_value: sample.energy,
        reason,
    })
}

fn coalition_seed(base: u64, c: &Coalition) -> u64 {
    rng::derive_seed(base, &[c.smallest().index() as u64, c.len() as u64])
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Samples and decides one coalition, walking the fallback ladder:
/// configured sampler, then exhaustive when small enough, then annealing on
/// the QUBO with a proper-split penalty.
fn decide(g: &WeightedGraph, c: &Coalition, opts: &GcsqOptions) -> Result<TraceEntry> {
    let (q, vm) = build_split_qubo(g, c, true)?;
    let mut seconds = 0.0;
    let mut attempt = |used: SamplerUsed, model: &Qubo, sampler: &dyn Sampler| {
        let (set, dt) = timed(|| sampler.sample(model))?;
        seconds += dt;
        let decision = select_split(&set, &vm, c, opts)?;
        Ok::<_, Error>(TraceEntry {
            coalition: c.clone(),
            decision,
            sampler: used,
            sampler_seconds: seconds,
            qubo_vars: model.num_vars(),
        })
    };

    let anneal_params = match &opts.sampler {
        SamplerChoice::Exhaustive => {
            return attempt(SamplerUsed::Exhaustive, &q, &ExhaustiveSampler)
        }
        SamplerChoice::Anneal(p) => AnnealParams {
            seed: coalition_seed(p.seed, c),
            ..p.clone()
        },
    };
    let first = attempt(
        SamplerUsed::Anneal,
        &q,
        &AnnealSampler::new(anneal_params.clone()),
    );
    let first_err = match first {
        Err(Error::NoFeasibleSample(msg)) => msg,
        other => return other,
    };
    if q.num_vars() <= EXHAUSTIVE_MAX_VARS {
        return attempt(SamplerUsed::Exhaustive, &q, &ExhaustiveSampler);
    }
    let penalized = add_proper_split_penalty(&q, default_penalty(g, c)?)?;
    attempt(
        SamplerUsed::AnnealPenalized,
        &penalized,
        &AnnealSampler::new(anneal_params),
    )
    .map_err(|e| match e {
        Error::NoFeasibleSample(_) => Error::NoFeasibleSample(format!(
            "{first_err}; exhaustive fallback unavailable above {EXHAUSTIVE_MAX_VARS} variables \
             and penalized annealing found no proper split"
        )),
        other => other,
    })
}

/// Runs the full split loop and returns the final structure with its trace.
pub fn run_gcsq(g: &WeightedGraph, opts: &GcsqOptions) -> Result<(CoalitionStructure, GcsqTrace)> {
    opts.validate()?;
    let all = g.grand_coalition()?;
    let mut pending = g.connected_components(&all)?;
    let mut done: Vec<Coalition> = Vec::new();
    let mut trace = GcsqTrace::default();

    while !pending.is_empty() {
        pending.sort_by(|a, b| b.len().cmp(&a.len()).then(a.smallest().cmp(&b.smallest())));
        let (singles, round): (Vec<Coalition>, Vec<Coalition>) =
            pending.drain(..).partition(|c| c.len() < 2);
        done.extend(singles);
        let results: Vec<Result<TraceEntry>> =
            round.par_iter().map(|c| decide(g, c, opts)).collect();
        for (c, result) in round.into_iter().zip(results) {
            let entry = result.map_err(|e| match e {
                Error::NoFeasibleSample(msg) => {
                    Error::NoFeasibleSample(format!("coalition {c}: {msg}"))
                }
                other => other,
            })?;
            if entry.decision.accepted {
                let sides = [
                    Coalition::new(entry.decision.side_a.iter().copied())?,
                    Coalition::new(entry.decision.side_b.iter().copied())?,
                ];
                for side in sides {
                    if opts.decompose_sides {
                        pending.extend(g.connected_components(&side)?);
                    } else {
                        pending.push(side);
                    }
                }
            } else {
                done.push(c);
            }
            trace.entries.push(entry);
        }
    }
    Ok((CoalitionStructure::new(done), trace))
}

/// [`run_gcsq`] packaged as the result document written by the CLI.
pub fn solve_to_result(g: &WeightedGraph, opts: &GcsqOptions) -> Result<GcsqResult> {
    let (p, trace) = run_gcsq(g, opts)?;
    Ok(GcsqResult {
        value: g.structure_value(&p)?,
        coalitions: p.to_ids(),
        trace,
    })
}
