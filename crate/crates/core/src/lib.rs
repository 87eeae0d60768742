//! Coalition structure generation on weighted graphs by iterated QUBO
//! bipartition, plus the satellite pipeline that feeds it: 3LE parsing,
//! two-body propagation and geometric link graphs.
//!
//! The pieces, bottom-up:
//!
//! * [`graph`]: the weighted graph, coalitions and their values.
//! * [`qubo`]: the min-cut bipartition QUBO for one coalition.
//! * [`solvers`]: exhaustive and simulated-annealing samplers, and an exact
//!   set-partition oracle.
//! * [`gcsq`]: the top-down split loop.
//! * [`tle`] and [`netgraph`]: orbital data to satellite graphs.
//! * [`bench`]: experiment harness and report writers.

pub mod bench;
pub mod error;
pub mod gcsq;
pub mod graph;
pub mod netgraph;
pub mod qubo;
pub mod rng;
pub mod solvers;
pub mod tle;

pub use error::{Error, Result};
pub use graph::{Coalition, CoalitionStructure, NodeId, WeightedGraph};
pub use qubo::{Assignment, Qubo, VarMap};
pub use solvers::{AnnealParams, Sample, SampleSet, Sampler};
