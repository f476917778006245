//! `cmincut`: generate instances, run the distributed approximation, run the
//! exact oracle and benchmark the tree primitives.

mod bench;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use congest_mincut::driver::{approx_min_cut, DriverError, PackingPolicy, SolverConfig, PAPER_COUNT_CAP};
use congest_mincut::graph::{
    generate, load_graph, save_graph, write_graph, GraphError, GraphFile, GraphModel, InternalModel,
};
use congest_mincut::oracle::stoer_wagner;
use congest_mincut::sim::SimError;
use congest_mincut::{NetworkConfig, RoundStats, Seed, WeightedMultigraph};

use report::*;

#[derive(Parser)]
#[command(
    name = "cmincut",
    version,
    about = "Distributed (1+ε)-approximate minimum cut in a simulated CONGEST network"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph.
    Gen(GenArgs),
    /// Run the distributed approximation on a graph file.
    Solve(SolveArgs),
    /// Exact minimum cut by Stoer–Wagner.
    Oracle(OracleArgs),
    /// Round counts of the tree primitives over a size sweep.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Planted,
    Random,
    Cliquepath,
}

#[derive(Args)]
struct GenArgs {
    family: Family,
    /// Planted: vertices on the first side.
    #[arg(long, default_value_t = 10)]
    na: usize,
    /// Planted: vertices on the second side.
    #[arg(long, default_value_t = 10)]
    nb: usize,
    /// Planted: crossing unit edges.
    #[arg(long, default_value_t = 3)]
    c: u64,
    /// Planted: internal edge probability; cliques when absent.
    #[arg(long)]
    p: Option<f64>,
    /// Random: vertices.
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Random: edges beyond a spanning tree.
    #[arg(long, default_value_t = 20)]
    extra: usize,
    /// Random: largest edge weight.
    #[arg(long, default_value_t = 1)]
    max_weight: u64,
    /// Clique path: clique size.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Clique path: number of cliques.
    #[arg(long, default_value_t = 5)]
    len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyMode {
    Paper,
    Karger,
    Fixed,
}

#[derive(Args)]
struct SolveArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PolicyMode::Karger)]
    policy: PolicyMode,
    /// Tree count for `--policy fixed`.
    #[arg(long)]
    fixed_count: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    c_pack: f64,
    /// Cap on the estimate of λ used by `--policy karger`.
    #[arg(long, default_value_t = 1.0)]
    lambda_cap: f64,
    /// Largest tree count `--policy paper` accepts.
    #[arg(long, default_value_t = PAPER_COUNT_CAP)]
    paper_cap: u64,
    /// Trials per test; the schedule's value when absent.
    #[arg(long)]
    trials: Option<u64>,
    /// Bits per message; 4⌈log2 n⌉ when absent.
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long, default_value_t = 1_000_000)]
    round_limit: u64,
    /// Also run Stoer–Wagner and report the ratio.
    #[arg(long)]
    oracle: bool,
    /// Fail unless the ratio is at most 1+ε (implies --oracle).
    #[arg(long)]
    check: bool,
    /// Test every tree and threshold and return the lightest cut.
    #[arg(long)]
    exhaustive: bool,
    /// Write the JSON report here (`-` for standard output).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Include the schedule trace and print it to standard error.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct OracleArgs {
    graph: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    family: Family,
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',', default_value = "64,144,256")]
    sizes: Vec<usize>,
    /// Seeds per size.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// A failure with its exit code.
pub struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
    stats: Option<RoundStats>,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { kind: "usage", message: message.into(), code: 2, stats: None }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure { kind: "validation", message: e.to_string(), code: 2, stats: None }
    }
}

fn sim_failure(e: &SimError, message: String) -> Failure {
    let (kind, code, stats) = match e {
        SimError::BudgetViolation { .. } => ("budget", 3, None),
        SimError::RoundLimit { stats, .. } => ("round_limit", 4, Some((**stats).clone())),
        SimError::Config(_) => ("validation", 2, None),
        _ => ("simulation", 1, None),
    };
    Failure { kind, message, code, stats }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        sim_failure(&e, e.to_string())
    }
}

impl From<DriverError> for Failure {
    fn from(e: DriverError) -> Self {
        if let Some(s) = e.sim_error() {
            return sim_failure(s, e.to_string());
        }
        match e {
            DriverError::NoCut { stats, .. } => {
                Failure { kind: "no_cut", message: "no cut found".into(), code: 5, stats: Some(*stats) }
            }
            DriverError::Graph(g) => g.into(),
            e => Failure { kind: "validation", message: e.to_string(), code: 2, stats: None },
        }
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    if path.as_os_str() == "-" {
        println!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text + "\n").map_err(|e| Failure {
            kind: "io",
            message: format!("{}: {e}", path.display()),
            code: 2,
            stats: None,
        })
    }
}

fn summarize(path: &Path, g: &WeightedMultigraph) -> InputSummary {
    InputSummary {
        path: path.display().to_string(),
        n: g.n(),
        m: g.m(),
        m_multi: g.m_multi(),
        max_weight: g.edges().iter().map(|e| e.w).max().unwrap_or(0),
        diameter: g.diameter(),
    }
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let model = match a.family {
        Family::Planted => GraphModel::PlantedCut {
            n_a: a.na,
            n_b: a.nb,
            internal: a.p.map_or(InternalModel::Clique, |p| InternalModel::Random { p }),
            crossing: a.c,
        },
        Family::Random => GraphModel::RandomConnected { n: a.n, extra_edges: a.extra, max_edge_weight: a.max_weight },
        Family::Cliquepath => GraphModel::CliquePath { k: a.k, len: a.len },
    };
    let generated = generate(&model, Seed(a.seed))?;
    let file = GraphFile { graph: generated.graph, planted: generated.planted };
    match &a.out {
        Some(path) => save_graph(path, &file)?,
        None => print!("{}", write_graph(&file)),
    }
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<bool, Failure> {
    if !(a.epsilon > 0.0 && a.epsilon <= 1.0) {
        return Err(Failure::usage(format!("--epsilon must lie in (0, 1], got {}", a.epsilon)));
    }
    let file = load_graph(&a.graph)?;
    let g = &file.graph;
    let policy = match a.policy {
        PolicyMode::Paper => PackingPolicy::Paper { cap: a.paper_cap },
        PolicyMode::Karger => PackingPolicy::Karger { c_pack: a.c_pack, lambda_cap: a.lambda_cap },
        PolicyMode::Fixed => PackingPolicy::Fixed {
            count: a.fixed_count.ok_or_else(|| Failure::usage("--policy fixed needs --fixed-count"))?,
        },
    };
    let mut network = NetworkConfig::for_n(g.n());
    network.round_limit = a.round_limit;
    network.seed = Seed(a.seed).stream("network");
    if let Some(b) = a.bits {
        network.bits_per_message = b;
    }
    let config = SolverConfig {
        epsilon: a.epsilon,
        policy,
        seed: Seed(a.seed),
        network: Some(network),
        exhaustive: a.exhaustive,
        lambda_interval: None,
        trials: a.trials,
    };
    let start = Instant::now();
    let solution = approx_min_cut(g, &config)?;
    let wall = start.elapsed().as_secs_f64() * 1e3;
    info!("solved in {wall:.1} ms");

    let side = solution.cut.side.normalized();
    let members: Vec<u32> = side.members().collect();
    let result = CutReport {
        weight: solution.cut.weight,
        side_size: members.len(),
        side_digest: side_digest(&members),
        side: members,
        source: solution.cut.source,
    };
    let (oracle, ratio, check_passed) = if a.oracle || a.check {
        let exact = stoer_wagner(g).map_err(|e| Failure::usage(e.to_string()))?;
        let ratio = result.weight as f64 / exact.weight as f64;
        let check = a.check.then_some(ratio <= 1.0 + a.epsilon + 1e-12);
        (Some(OracleReport { lambda: exact.weight, side: exact.side.members().collect() }), Some(ratio), check)
    } else {
        (None, None, None)
    };
    if a.trace {
        for ev in &solution.trace {
            eprintln!("{}", serde_json::to_string(ev).expect("serializable"));
        }
    }
    let s = &solution.schedule;
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        input: summarize(&a.graph, g),
        config: ConfigEcho {
            epsilon: s.epsilon,
            epsilon_prime: s.epsilon_prime,
            k: s.k,
            theta: s.theta,
            policy,
            bits: network.bits_per_message,
            round_limit: network.round_limit,
            seed: a.seed,
            exhaustive: a.exhaustive,
        },
        result,
        oracle,
        ratio,
        check_passed,
        stats: solution.stats,
        wall_time_ms: wall,
        trace: a.trace.then_some(solution.trace),
    };
    let to_stdout = a.json.as_deref().is_some_and(|p| p.as_os_str() == "-");
    if !to_stdout {
        print!("weight {} side {}", report.result.weight, report.result.side_size);
        if let (Some(o), Some(r)) = (&report.oracle, report.ratio) {
            print!(" lambda {} ratio {r:.4}", o.lambda);
        }
        println!(" rounds {}", report.stats.rounds);
    }
    if let Some(path) = &a.json {
        write_json(path, &report)?;
    }
    Ok(check_passed.unwrap_or(true))
}

fn cmd_oracle(a: &OracleArgs) -> Result<(), Failure> {
    let file = load_graph(&a.graph)?;
    let start = Instant::now();
    let exact = stoer_wagner(&file.graph).map_err(|e| Failure::usage(e.to_string()))?;
    let run = OracleRun {
        schema_version: SCHEMA_VERSION,
        input: summarize(&a.graph, &file.graph),
        lambda: exact.weight,
        side: exact.side.members().collect(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    match &a.json {
        Some(path) => write_json(path, &run)?,
        None => println!("lambda {} side {:?}", run.lambda, run.side),
    }
    Ok(())
}

fn fail(f: Failure, json: Option<&Path>) -> ExitCode {
    let record = ErrorRecord {
        schema_version: SCHEMA_VERSION,
        error: ErrorBody { kind: f.kind.into(), message: f.message, exit_code: f.code.into(), stats: f.stats },
    };
    eprintln!("{}", serde_json::to_string(&record).expect("serializable"));
    if let Some(path) = json.filter(|p| p.as_os_str() != "-") {
        let _ = write_json(path, &record);
    }
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (outcome, json) = match &cli.cmd {
        Command::Gen(a) => (cmd_gen(a).map(|_| true), None),
        Command::Solve(a) => (cmd_solve(a), a.json.as_deref()),
        Command::Oracle(a) => (cmd_oracle(a).map(|_| true), a.json.as_deref()),
        Command::Bench(a) => (bench::run(a).map(|_| true), a.json.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed: ratio above 1+ε");
            ExitCode::from(1)
        }
        Err(f) => fail(f, json),
    }
}
