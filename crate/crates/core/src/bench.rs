//! Experiment harness: sparsity-sweep runtimes, single-split quality against
//! the exhaustive optimum, and the satellite link-reduction study.
//!
//! Only the sampler call is timed. Graph generation, QUBO construction and
//! report I/O are outside the clock.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcsq::{run_gcsq, GcsqOptions, SamplerChoice, Selection};
use crate::graph::WeightedGraph;
use crate::netgraph::{build_geometric_graph, generate_synthetic_graph, link_stats, WeightModel};
use crate::qubo::build_split_qubo;
use crate::rng;
use crate::solvers::{
    AnnealParams, AnnealSampler, ExhaustiveSampler, SampleSet, Sampler, EXHAUSTIVE_MAX_VARS,
};
use crate::tle::{latest_epoch, propagate, propagate_unchecked, read_3le, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Study {
    SparsitySweep,
    SplitQuality,
    Starlink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SolverKind {
    Anneal,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExperimentConfig {
    pub study: Study,
    pub sizes: Vec<usize>,
    pub sparsities: Vec<f64>,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverKind>,
    pub anneal: AnnealParams,
    pub kmax: Option<usize>,
    pub selection: Selection,
    /// Propagation instant for the starlink study; defaults to the latest
    /// element epoch in the file.
    pub timestamp: Option<DateTime<Utc>>,
    /// Link range, km.
    pub radius: f64,
    pub noise: f64,
    pub tle: Option<PathBuf>,
    /// Use only the first this-many element sets.
    pub satellites: Option<usize>,
    pub allow_stale: bool,
    /// Run and discard one untimed solve per cell first.
    pub warmup: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            study: Study::SplitQuality,
            sizes: vec![6, 8, 10, 12],
            sparsities: vec![0.0, 0.5, 1.0],
            seeds: vec![1, 2, 3],
            solvers: vec![SolverKind::Anneal, SolverKind::Exhaustive],
            anneal: AnnealParams::default(),
            kmax: None,
            selection: Selection::LowestEnergy,
            timestamp: None,
            radius: 2500.0,
            noise: 1.5,
            tle: None,
            satellites: None,
            allow_stale: false,
            warmup: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.solvers.is_empty() {
            return Err(Error::arg("seeds and solvers must be non-empty"));
        }
        if self.study != Study::Starlink {
            if self.sizes.is_empty() || self.sparsities.is_empty() {
                return Err(Error::arg("sizes and sparsities must be non-empty"));
            }
            if let Some(s) = self.sparsities.iter().find(|s| !(0.0..=1.0).contains(*s)) {
                return Err(Error::arg(format!("sparsity {s} outside [0, 1]")));
            }
            if let Some(n) = self.sizes.iter().find(|&&n| n < 2) {
                return Err(Error::arg(format!("size {n} below 2")));
            }
        } else if self.tle.is_none() {
            return Err(Error::arg("starlink study needs a tle file"));
        }
        if self.kmax == Some(0) {
            return Err(Error::arg("kmax must be at least 1"));
        }
        self.anneal.validate()
    }
}

/// One solver run on one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub study: Study,
    pub n: usize,
    pub sparsity: f64,
    pub seed: u64,
    pub solver: SolverKind,
    pub skipped: bool,
    pub wall_time_seconds: f64,
    pub best_cost: Option<f64>,
    pub most_frequent_cost: Option<f64>,
    pub exact_cost: Option<f64>,
    /// Whether the best sample is a split with negative cut.
    pub improving_split: Option<bool>,
    pub structure_value: Option<f64>,
    pub links_before: Option<usize>,
    pub links_after: Option<usize>,
}

impl RunRecord {
    fn new(study: Study, n: usize, sparsity: f64, seed: u64, solver: SolverKind) -> Self {
        RunRecord {
            study,
            n,
            sparsity,
            seed,
            solver,
            skipped: false,
            wall_time_seconds: 0.0,
            best_cost: None,
            most_frequent_cost: None,
            exact_cost: None,
            improving_split: None,
            structure_value: None,
            links_before: None,
            links_after: None,
        }
    }

    fn sort_key(&self) -> (Study, usize, u64, u64, SolverKind) {
        (
            self.study,
            self.n,
            self.sparsity.to_bits(),
            self.seed,
            self.solver,
        )
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by_key(RunRecord::sort_key);
}

fn cell_anneal_params(cfg: &ExperimentConfig, n: usize, sparsity: f64, seed: u64) -> AnnealParams {
    AnnealParams {
        seed: rng::derive_seed(cfg.anneal.seed, &[seed, n as u64, sparsity.to_bits()]),
        ..cfg.anneal.clone()
    }
}

fn timed_sample(
    sampler: &dyn Sampler,
    q: &crate::qubo::Qubo,
    warmup: bool,
) -> Result<(SampleSet, f64)> {
    if warmup {
        sampler.sample(q)?;
    }
    let start = Instant::now();
    let set = sampler.sample(q)?;
    Ok((set, start.elapsed().as_secs_f64()))
}

fn split_problem(n: usize, sparsity: f64, seed: u64) -> Result<crate::qubo::Qubo> {
    let g = generate_synthetic_graph(n, sparsity, seed)?;
    let (q, _) = build_split_qubo(&g, &g.grand_coalition()?, true)?;
    Ok(q)
}

/// Times one optimal-split solve per (size, sparsity, seed, solver).
pub fn run_sparsity_sweep(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    for &n in &cfg.sizes {
        for &sparsity in &cfg.sparsities {
            for &seed in &cfg.seeds {
                let q = split_problem(n, sparsity, seed)?;
                for &solver in &cfg.solvers {
                    let mut rec = RunRecord::new(Study::SparsitySweep, n, sparsity, seed, solver);
                    let sampler: Box<dyn Sampler> = match solver {
                        SolverKind::Exhaustive if q.num_vars() > EXHAUSTIVE_MAX_VARS => {
                            rec.skipped = true;
                            records.push(rec);
                            continue;
                        }
                        SolverKind::Exhaustive => Box::new(ExhaustiveSampler),
                        SolverKind::Anneal => Box::new(AnnealSampler::new(cell_anneal_params(
                            cfg, n, sparsity, seed,
                        ))),
                    };
                    let (set, secs) = timed_sample(sampler.as_ref(), &q, cfg.warmup)?;
                    let best = set.lowest()?.energy;
                    rec.wall_time_seconds = secs;
                    rec.best_cost = Some(best);
                    rec.most_frequent_cost = Some(set.most_frequent()?.energy);
                    rec.improving_split = Some(best < 0.0);
                    if solver == SolverKind::Exhaustive {
                        rec.exact_cost = Some(best);
                    }
                    records.push(rec);
                }
            }
        }
    }
    sort_records(&mut records);
    Ok(records)
}

/// Best and most-frequent annealed split costs next to the exhaustive optimum.
pub fn run_split_quality(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    for &n in &cfg.sizes {
        for &sparsity in &cfg.sparsities {
            for &seed in &cfg.seeds {
                let q = split_problem(n, sparsity, seed)?;
                let mut rec =
                    RunRecord::new(Study::SplitQuality, n, sparsity, seed, SolverKind::Anneal);
                let sampler = AnnealSampler::new(cell_anneal_params(cfg, n, sparsity, seed));
                let (set, secs) = timed_sample(&sampler, &q, cfg.warmup)?;
                let best = set.lowest()?.energy;
                rec.wall_time_seconds = secs;
                rec.best_cost = Some(best);
                rec.most_frequent_cost = Some(set.most_frequent()?.energy);
                rec.improving_split = Some(best < 0.0);
                if q.num_vars() <= EXHAUSTIVE_MAX_VARS {
                    rec.exact_cost = Some(ExhaustiveSampler.sample(&q)?.lowest()?.energy);
                }
                records.push(rec);
            }
        }
    }
    sort_records(&mut records);
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StarlinkRun {
    pub seed: u64,
    pub edges: usize,
    pub mean_degree: f64,
    pub structure_value: f64,
    pub coalitions: Vec<Vec<usize>>,
    /// Coalition size -> number of coalitions of that size.
    pub size_histogram: BTreeMap<usize, usize>,
    pub links_before: usize,
    pub links_after: usize,
    pub wall_time_seconds: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StarlinkReport {
    pub satellites: usize,
    pub names: Vec<String>,
    pub timestamp: DateTime<Utc>,
    pub radius_km: f64,
    pub noise: f64,
    pub kmax: usize,
    pub skipped_records: usize,
    /// Inter-coalition links are counted once per adjacent coalition pair.
    pub link_rule: String,
    pub runs: Vec<StarlinkRun>,
}

impl StarlinkReport {
    pub fn records(&self) -> Vec<RunRecord> {
        self.runs
            .iter()
            .map(|r| RunRecord {
                structure_value: Some(r.structure_value),
                links_before: Some(r.links_before),
                links_after: Some(r.links_after),
                wall_time_seconds: r.wall_time_seconds,
                ..RunRecord::new(
                    Study::Starlink,
                    self.satellites,
                    0.0,
                    r.seed,
                    SolverKind::Anneal,
                )
            })
            .collect()
    }
}

/// Default size limit of the satellite study.
pub const STARLINK_KMAX: usize = 5;

/// Parse, propagate, link, cluster, count links.
pub fn run_starlink(cfg: &ExperimentConfig) -> Result<StarlinkReport> {
    cfg.validate()?;
    let path = cfg
        .tle
        .as_ref()
        .ok_or_else(|| Error::arg("starlink study needs a tle file"))?;
    let parsed = read_3le(path)?;
    let mut records = parsed.records;
    if let Some(limit) = cfg.satellites {
        records.truncate(limit);
    }
    if records.is_empty() {
        return Err(Error::arg(format!(
            "{} holds no usable element sets",
            path.display()
        )));
    }
    let t = cfg
        .timestamp
        .or_else(|| latest_epoch(&records))
        .expect("non-empty");
    let states = records
        .iter()
        .map(|r| {
            if cfg.allow_stale {
                Ok(propagate_unchecked(r, t))
            } else {
                propagate(r, t)
            }
        })
        .collect::<Result<Vec<StateVector>>>()?;
    let kmax = cfg.kmax.unwrap_or(STARLINK_KMAX);
    let sampler = match cfg.solvers[0] {
        SolverKind::Anneal => SamplerChoice::Anneal(cfg.anneal.clone()),
        SolverKind::Exhaustive => SamplerChoice::Exhaustive,
    };

    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        let model = WeightModel::starlink(cfg.noise, seed);
        let g = build_geometric_graph(&states, cfg.radius, &model)?;
        let mut diagnostics = Vec::new();
        if g.edge_count() == 0 {
            diagnostics.push(format!(
                "no satellite pair within {} km; every satellite is its own coalition",
                cfg.radius
            ));
        }
        let opts = GcsqOptions {
            kmax: Some(kmax),
            selection: cfg.selection,
            sampler: match &sampler {
                SamplerChoice::Anneal(p) => SamplerChoice::Anneal(AnnealParams {
                    seed: rng::derive_seed(p.seed, &[seed]),
                    ..p.clone()
                }),
                other => other.clone(),
            },
            ..GcsqOptions::default()
        };
        let start = Instant::now();
        let (p, _) = run_gcsq(&g, &opts)?;
        let secs = start.elapsed().as_secs_f64();
        let stats = link_stats(&g, &p)?;
        let mut size_histogram = BTreeMap::new();
        for c in p.coalitions() {
            *size_histogram.entry(c.len()).or_insert(0) += 1;
        }
        runs.push(StarlinkRun {
            seed,
            edges: g.edge_count(),
            mean_degree: 2.0 * g.edge_count() as f64 / g.node_count() as f64,
            structure_value: g.structure_value(&p)?,
            coalitions: p.to_ids(),
            size_histogram,
            links_before: stats.links_before,
            links_after: stats.links_after,
            wall_time_seconds: secs,
            diagnostics,
        });
    }
    Ok(StarlinkReport {
        satellites: records.len(),
        names: records.iter().map(|r| r.name.clone()).collect(),
        timestamp: t,
        radius_km: cfg.radius,
        noise: cfg.noise,
        kmax,
        skipped_records: parsed.skipped.len(),
        link_rule: "intra-coalition edges + one link per adjacent coalition pair".into(),
        runs,
    })
}

/// Summary statistics of one (study, n, sparsity, solver) cell over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregateRow {
    pub study: Study,
    pub n: usize,
    pub sparsity: f64,
    pub solver: SolverKind,
    pub runs: usize,
    pub wall_time_mean: f64,
    pub wall_time_min: f64,
    pub wall_time_max: f64,
    pub wall_time_stddev: f64,
    pub best_cost_mean: Option<f64>,
    pub best_cost_min: Option<f64>,
    pub best_cost_max: Option<f64>,
    pub best_cost_stddev: Option<f64>,
}

/// Mean, min, max and sample standard deviation (n - 1 denominator; 0 for a
/// single value).
pub fn summary(values: &[f64]) -> Option<(f64, f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, min, max, std))
}

pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(Study, usize, u64, SolverKind), Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.skipped) {
        cells
            .entry((r.study, r.n, r.sparsity.to_bits(), r.solver))
            .or_default()
            .push(r);
    }
    cells
        .into_iter()
        .map(|((study, n, sp, solver), rs)| {
            let times: Vec<f64> = rs.iter().map(|r| r.wall_time_seconds).collect();
            let costs: Vec<f64> = rs.iter().filter_map(|r| r.best_cost).collect();
            let (wm, wmin, wmax, wsd) = summary(&times).expect("cell has a record");
            let c = summary(&costs);
            AggregateRow {
                study,
                n,
                sparsity: f64::from_bits(sp),
                solver,
                runs: rs.len(),
                wall_time_mean: wm,
                wall_time_min: wmin,
                wall_time_max: wmax,
                wall_time_stddev: wsd,
                best_cost_mean: c.map(|c| c.0),
                best_cost_min: c.map(|c| c.1),
                best_cost_max: c.map(|c| c.2),
                best_cost_stddev: c.map(|c| c.3),
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::arg(format!("{}: {other:?}", path.display())),
    }
}

pub fn records_to_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::arg(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::arg(e.to_string()))
}

pub fn records_from_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Writes `records.csv` or `records.json` plus `aggregate.csv` into `dir`
/// and returns the paths written.
pub fn write_report(
    records: &[RunRecord],
    format: ReportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::arg("no records to write"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let main = match format {
        ReportFormat::Csv => {
            let p = dir.join("records.csv");
            write_csv(&p, &sorted)?;
            p
        }
        ReportFormat::Json => {
            let p = dir.join("records.json");
            fs::write(&p, serde_json::to_string_pretty(&sorted)?).map_err(|e| Error::io(&p, e))?;
            p
        }
    };
    let agg = dir.join("aggregate.csv");
    write_csv(&agg, &aggregate(&sorted))?;
    Ok(vec![main, agg])
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&text)?)
    } else {
        records_from_csv(&text)
    }
}

/// Resolved configuration written next to every report.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportHeader<'a> {
    pub rng: &'static str,
    pub config: &'a ExperimentConfig,
}

/// Runs the configured study and writes all its outputs into `dir`.
pub fn run_bench(cfg: &ExperimentConfig, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = dir.join("config.json");
    let text = serde_json::to_string_pretty(&ReportHeader {
        rng: rng::RNG_ALGORITHM,
        config: cfg,
    })?;
    fs::write(&header, text).map_err(|e| Error::io(&header, e))?;
    let mut written = vec![header];
    let records = match cfg.study {
        Study::SparsitySweep => run_sparsity_sweep(cfg)?,
        Study::SplitQuality => run_split_quality(cfg)?,
        Study::Starlink => {
            let report = run_starlink(cfg)?;
            let p = dir.join("starlink.json");
            fs::write(&p, serde_json::to_string_pretty(&report)?).map_err(|e| Error::io(&p, e))?;
            written.push(p);
            report.records()
        }
    };
    written.extend(write_report(&records, format, dir)?);
    Ok(written)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Mean wall time per size for one solver, ascending by size.
pub fn mean_times_by_size(records: &[RunRecord], solver: SolverKind) -> Vec<(usize, f64)> {
    aggregate(records)
        .into_iter()
        .filter(|a| a.solver == solver)
        .fold(BTreeMap::<usize, Vec<f64>>::new(), |mut m, a| {
            m.entry(a.n).or_default().push(a.wall_time_mean);
            m
        })
        .into_iter()
        .map(|(n, ts)| (n, ts.iter().sum::<f64>() / ts.len() as f64))
        .collect()
}

/// Convenience for tests and the CLI: the grand-coalition split QUBO of a graph.
pub fn graph_split_costs(g: &WeightedGraph, sampler: &dyn Sampler) -> Result<(f64, f64)> {
    let (q, _) = build_split_qubo(g, &g.grand_coalition()?, true)?;
    let set = sampler.sample(&q)?;
    Ok((set.lowest()?.energy, set.most_frequent()?.energy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> AnnealParams {
        AnnealParams {
            num_reads: 50,
            sweeps_per_read: 100,
            ..AnnealParams::default()
        }
    }

    #[test]
    fn single_exhaustive_cell() {
        let cfg = ExperimentConfig {
            study: Study::SparsitySweep,
            sizes: vec![6],
            sparsities: vec![1.0],
            seeds: vec![5],
            solvers: vec![SolverKind::Exhaustive],
            ..ExperimentConfig::default()
        };
        let recs = run_sparsity_sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].exact_cost, recs[0].best_cost);
    }

    #[test]
    fn cardinality_and_dominance() {
        let cfg = ExperimentConfig {
            study: Study::SparsitySweep,
            sizes: vec![7],
            sparsities: vec![0.5],
            seeds: vec![1, 2, 3],
            anneal: quick(),
            warmup: false,
            ..ExperimentConfig::default()
        };
        let recs = run_sparsity_sweep(&cfg).unwrap();
        for solver in [SolverKind::Anneal, SolverKind::Exhaustive] {
            assert_eq!(recs.iter().filter(|r| r.solver == solver).count(), 3);
        }
        for seed in 1..=3 {
            let get = |s| {
                recs.iter()
                    .find(|r| r.seed == seed && r.solver == s)
                    .unwrap()
                    .best_cost
                    .unwrap()
            };
            assert!(get(SolverKind::Anneal) >= get(SolverKind::Exhaustive) - 1e-12);
        }
    }

    #[test]
    fn oversize_exhaustive_cell_is_skipped() {
        let cfg = ExperimentConfig {
            study: Study::SparsitySweep,
            sizes: vec![30],
            sparsities: vec![1.0],
            seeds: vec![1],
            solvers: vec![SolverKind::Exhaustive],
            ..ExperimentConfig::default()
        };
        let recs = run_sparsity_sweep(&cfg).unwrap();
        assert!(recs[0].skipped);
        assert!(recs[0].best_cost.is_none());
    }

    #[test]
    fn split_quality_orders_costs() {
        let cfg = ExperimentConfig {
            sizes: vec![6, 9],
            seeds: vec![1, 2],
            anneal: quick(),
            warmup: false,
            ..ExperimentConfig::default()
        };
        for r in run_split_quality(&cfg).unwrap() {
            assert!(r.most_frequent_cost.unwrap() >= r.best_cost.unwrap());
            assert!(r.best_cost.unwrap() >= r.exact_cost.unwrap() - 1e-12);
        }
    }

    #[test]
    fn positive_tree_has_no_improving_split() {
        let g = WeightedGraph::from_edges(6, (0..5).map(|i| (i, i + 1, 1.0))).unwrap();
        let (best, _) = graph_split_costs(&g, &ExhaustiveSampler).unwrap();
        assert_eq!(best, 0.0);
        let (q, vm) = build_split_qubo(&g, &g.grand_coalition().unwrap(), true).unwrap();
        let set = ExhaustiveSampler.sample(&q).unwrap();
        for s in set.samples() {
            let (_, b) = vm.decode(&s.assignment);
            if !b.is_empty() {
                assert!(s.energy > 0.0);
            }
        }
    }

    #[test]
    fn summary_statistics() {
        let (mean, min, max, sd) = summary(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((mean, min, max), (2.0, 1.0, 3.0));
        assert!((sd - 1.0).abs() < 1e-15);
        assert_eq!(summary(&[4.0]).unwrap().3, 0.0);
        assert!(summary(&[]).is_none());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg =
            ExperimentConfig::from_json(r#"{"study": "splitQuality", "sizes": [6]}"#).unwrap();
        assert_eq!(cfg.sparsities, vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg.seeds.len(), 3);
        assert_eq!(cfg.anneal.num_reads, 1000);
        assert!(ExperimentConfig::from_json(r#"{"sizes": []}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"study": "starlink"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sparsities": [2.0]}"#).is_err());
    }

    #[test]
    fn empty_report_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_report(&[], ReportFormat::Csv, dir.path()).is_err());
    }
}
