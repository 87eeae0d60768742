//! Command-line front end: parse element sets, build graphs, solve, bench.
//!
//! Every verb writes JSON to stdout (or `--out`) and diagnostics to stderr.
//! Exit status is 0 on success, 1 on a usage error and 2 on a data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use coalition_core::bench::{run_bench, ExperimentConfig, ReportFormat};
use coalition_core::gcsq::{solve_to_result, GcsqOptions, SamplerChoice, Selection};
use coalition_core::netgraph::{generate_synthetic_graph, graph_from_positions, WeightModel};
use coalition_core::tle::{latest_epoch, read_3le, snapshot, PositionRecord};
use coalition_core::{AnnealParams, WeightedGraph};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Caps the worker pool; 0 or unset means one worker per core.
pub const THREADS_ENV: &str = "COALITION_FORGE_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "coalition-forge",
    version,
    about = "Coalition formation for satellite networks"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (parse, graph, solve) or directory (bench).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format for bench; the other verbs always write JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate a 3LE file to one instant and emit positions.
    Parse(ParseArgs),
    /// Build a weighted graph from positions or at random.
    Graph(GraphArgs),
    /// Run coalition formation on a graph.
    Solve(SolveArgs),
    /// Run an experiment study from a config file.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct ParseArgs {
    #[arg(long)]
    tle: PathBuf,
    /// RFC 3339 instant; defaults to the newest epoch in the file.
    #[arg(long, value_parser = parse_time)]
    at: Option<DateTime<Utc>>,
    /// Propagate past the 7-day window instead of failing.
    #[arg(long)]
    allow_stale: bool,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[arg(
        long,
        conflicts_with = "synthetic",
        required_unless_present = "synthetic",
        requires = "radius"
    )]
    positions: Option<PathBuf>,
    /// Link range in km.
    #[arg(long, visible_alias = "radius-km", value_parser = positive)]
    radius: Option<f64>,
    /// Half-width of the uniform weight noise.
    #[arg(long, default_value_t = 1.5, value_parser = non_negative)]
    noise: f64,
    #[arg(long, requires_all = ["n", "sparsity"])]
    synthetic: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: Option<u64>,
    #[arg(long, value_parser = unit_interval)]
    sparsity: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Maximum coalition size; unconstrained when absent.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    kmax: Option<u64>,
    #[arg(long, value_enum, default_value_t = SamplerArg::Anneal)]
    sampler: SamplerArg,
    #[arg(long, value_enum, default_value_t = SelectionArg::Lowest)]
    selection: SelectionArg,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    reads: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    sweeps: u64,
    /// Keep split sides whole instead of breaking them into components.
    #[arg(long)]
    no_decompose: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SamplerArg {
    Anneal,
    Exhaustive,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SelectionArg {
    Lowest,
    Frequent,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
}

fn parse_time(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("not an RFC 3339 timestamp: {e}"))
}

fn float(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("must be finite".into())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    float(s).and_then(|x| {
        if x > 0.0 {
            Ok(x)
        } else {
            Err("must be positive".into())
        }
    })
}

fn non_negative(s: &str) -> Result<f64, String> {
    float(s).and_then(|x| {
        if x >= 0.0 {
            Ok(x)
        } else {
            Err("must not be negative".into())
        }
    })
}

fn unit_interval(s: &str) -> Result<f64, String> {
    float(s).and_then(|x| {
        if (0.0..=1.0).contains(&x) {
            Ok(x)
        } else {
            Err("must be in [0, 1]".into())
        }
    })
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<coalition_core::Error> for Failure {
    fn from(e: coalition_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

/// Parses `argv` (program name first) and runs the verb against the process
/// stdout and stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

/// [`dispatch`] with explicit output streams.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Failure::Usage(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        })?,
        Err(_) => 0,
    };
    // A pool set up by an earlier call in the same process stays in place.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    if cli.format == Some(Format::Csv) && !matches!(cli.command, Command::Bench(_)) {
        return Err(Failure::Usage("--format csv applies to bench only".into()));
    }
    configure_threads()?;
    match cli.command {
        Command::Parse(a) => {
            let parsed = read_3le(&a.tle)?;
            for s in &parsed.skipped {
                let _ = writeln!(
                    stderr,
                    "warning: skipped {:?} at line {}: {}",
                    s.name, s.line, s.reason
                );
            }
            let t = match a.at {
                Some(t) => t,
                None => latest_epoch(&parsed.records).ok_or_else(|| {
                    Failure::Data(format!("{} holds no usable element sets", a.tle.display()))
                })?,
            };
            let positions = snapshot(&parsed.records, t, a.allow_stale)?;
            emit(&positions, cli.out.as_deref(), stdout)
        }
        Command::Graph(a) => {
            let g = if a.synthetic {
                let n = a.n.expect("required by clap") as usize;
                generate_synthetic_graph(n, a.sparsity.expect("required by clap"), cli.seed)?
            } else {
                let path = a.positions.expect("required by clap");
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                let positions: Vec<PositionRecord> = serde_json::from_str(&text)?;
                let model = WeightModel::starlink(a.noise, cli.seed);
                graph_from_positions(&positions, a.radius.expect("required by clap"), &model)?
            };
            emit(&g.to_file(), cli.out.as_deref(), stdout)
        }
        Command::Solve(a) => {
            let g = WeightedGraph::read_json(&a.graph)?;
            let opts = GcsqOptions {
                kmax: a.kmax.map(|k| k as usize),
                selection: match a.selection {
                    SelectionArg::Lowest => Selection::LowestEnergy,
                    SelectionArg::Frequent => Selection::MostFrequent,
                },
                decompose_sides: !a.no_decompose,
                sampler: match a.sampler {
                    SamplerArg::Exhaustive => SamplerChoice::Exhaustive,
                    SamplerArg::Anneal => SamplerChoice::Anneal(AnnealParams {
                        num_reads: a.reads as usize,
                        sweeps_per_read: a.sweeps as usize,
                        seed: cli.seed,
                        ..AnnealParams::default()
                    }),
                },
            };
            let result = solve_to_result(&g, &opts)?;
            emit(&result, cli.out.as_deref(), stdout)
        }
        Command::Bench(a) => {
            let mut cfg = ExperimentConfig::read(&a.config)?;
            if cli.seed != 0 {
                cfg.anneal.seed = cli.seed;
            }
            let format = match cli.format {
                Some(Format::Json) => ReportFormat::Json,
                _ => ReportFormat::Csv,
            };
            let dir = cli.out.unwrap_or_else(|| PathBuf::from("bench-out"));
            let written = run_bench(&cfg, format, &dir)?;
            emit(&written, None, stdout)
        }
    }
}

fn emit<T: serde::Serialize + ?Sized>(
    value: &T,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Data(format!("stdout: {e}"))),
    }
}
