//! Argument parsing and subcommand dispatch for the `evocover` binary.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evocover::bounds::{rwa_k0_bounds, rwd_k0_bounds, rwd_k1_bounds, two_thirds_clique};
use evocover::exact::{enumerate_chain, exact_cover_time, ChainOptions, DEFAULT_STATE_CAP};
use evocover::montecarlo::{estimate_cover_time_per_start, trial_rng};
use evocover::walks::{run_cover_walk_traced, WalkOptions};
use evocover::{
    gen_clique, gen_lollipop, gen_path, gen_random_threshold, EvolutionRule, ExperimentConfig, HistoryWindow,
    StartPolicy, StaticGraph, Strategy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, Overrides};
use crate::experiment::run_experiment;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config file or flag values; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Cap, step-limit, solver or I/O failure; exit code 3.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "evocover", version, about = "Cover times of random walks on stochastically evolving graphs")]
pub struct Cli {
    /// Experiment config file.
    #[arg(long, global = true, env = "EVOCOVER_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "EVOCOVER_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "EVOCOVER_TRIALS")]
    pub trials: Option<u64>,
    #[arg(long, global = true, env = "EVOCOVER_STRATEGY", value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, env = "EVOCOVER_OUT")]
    pub out: Option<PathBuf>,
    /// Aligned table with rounded cover times instead of CSV.
    #[arg(long, global = true, env = "EVOCOVER_PRETTY")]
    pub pretty: bool,
    /// Maximum estimated state count for the exact chain.
    #[arg(long, global = true, env = "EVOCOVER_EXACT_CAP")]
    pub exact_cap: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

fn parse_start(s: &str) -> Result<StartPolicy, String> {
    if s == "sweep" {
        return Ok(StartPolicy::SweepAll);
    }
    s.parse()
        .map(StartPolicy::Fixed)
        .map_err(|_| format!("expected a node index or \"sweep\", got {s:?}"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every section of the config file and emit one table row per (n, p).
    Experiment,
    /// Exact RWA cover time from the absorbing chain.
    Exact(ExactArgs),
    /// Evaluate cover-time bounds for a given static cover time.
    Bounds(BoundsArgs),
    /// Monte Carlo cover-time estimate.
    Simulate(SimulateArgs),
    /// Write a generated graph as an edge list.
    Generate(GraphArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Path,
    Clique,
    Lollipop,
    RandomThreshold,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Edge-list file ("n m" header, then one "u v" per line).
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Lollipop clique size; defaults to floor(2n/3).
    #[arg(long)]
    pub clique: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Seed for the random-threshold generator; defaults to --seed.
    #[arg(long)]
    pub graph_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct RuleArgs {
    /// Birth (k = 1) or alive (k = 0) probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Death probability; selects the Birth-Death rule.
    #[arg(long)]
    pub q: Option<f64>,
    /// Alive probability per history pattern (comma separated, 2^k values,
    /// bit i = state i+1 steps ago); selects the general rule.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["p", "q"])]
    pub table: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Start node or "sweep" for the worst start.
    #[arg(long, default_value = "sweep", value_parser = parse_start)]
    pub start: StartPolicy,
    /// Take the worst case over every initial history window.
    #[arg(long)]
    pub all_windows: bool,
    /// Write states.csv and transitions.csv into this directory.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Static cover time C_G.
    #[arg(long)]
    pub cover_time: f64,
    #[arg(long)]
    pub p: f64,
    /// Death probability; selects the Birth-Death RWD bounds.
    #[arg(long)]
    pub q: Option<f64>,
    /// Minimum degree; with --max-degree selects the RWA bounds.
    #[arg(long, requires = "max_degree")]
    pub min_degree: Option<usize>,
    #[arg(long, requires = "min_degree")]
    pub max_degree: Option<usize>,
    /// Edge count, for the generic RWD cap 2m(n-1)/p.
    #[arg(long, requires = "nodes")]
    pub edges: Option<usize>,
    #[arg(long, requires = "edges")]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value = "0", value_parser = parse_start)]
    pub start: StartPolicy,
    /// Start every trial from the all-dead window instead of the previous
    /// trial's last window.
    #[arg(long)]
    pub no_chaining: bool,
    #[arg(long)]
    pub step_limit: Option<u64>,
    /// Write a per-step trace of the first trial from the first start.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

pub fn load_graph(args: &GraphArgs, default_seed: u64) -> Result<StaticGraph, CliError> {
    if let Some(path) = &args.graph {
        let f = File::open(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        return StaticGraph::read_edge_list(BufReader::new(f)).map_err(|e| config_err(format!("{}: {e}", path.display())));
    }
    let family = args.family.ok_or_else(|| config_err("need --graph or --family"))?;
    let n = args.n.ok_or_else(|| config_err("--family needs --n"))?;
    if args.clique.is_some() && family != FamilyArg::Lollipop {
        return Err(config_err("--clique only applies to lollipop"));
    }
    if args.threshold.is_some() && family != FamilyArg::RandomThreshold {
        return Err(config_err("--threshold only applies to random-threshold"));
    }
    let g = match family {
        FamilyArg::Path => gen_path(n),
        FamilyArg::Clique => gen_clique(n),
        FamilyArg::Lollipop => gen_lollipop(n, args.clique.unwrap_or_else(|| two_thirds_clique(n))),
        FamilyArg::RandomThreshold => {
            let t = args.threshold.ok_or_else(|| config_err("random-threshold needs --threshold"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.graph_seed.unwrap_or(default_seed));
            gen_random_threshold(n, t, &mut rng)
        }
    };
    g.map_err(config_err)
}

pub fn build_rule(args: &RuleArgs) -> Result<EvolutionRule, CliError> {
    let rule = match (&args.table, args.p, args.q) {
        (Some(table), _, _) => {
            let k = table.len().trailing_zeros() as usize;
            if !table.len().is_power_of_two() || table.len() < 2 {
                return Err(config_err(format!("--table needs 2^k entries with k >= 1, got {}", table.len())));
            }
            EvolutionRule::general(k, table.clone())
        }
        (None, Some(p), Some(q)) => EvolutionRule::birth_death(p, q),
        (None, Some(p), None) => EvolutionRule::bernoulli(p),
        (None, None, _) => return Err(config_err("need --p or --table")),
    };
    rule.map_err(config_err)
}

fn cmd_experiment(cli: &Cli) -> Result<String, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| config_err("experiment needs --config"))?;
    let src = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let overrides = Overrides {
        seed: cli.seed,
        trials: cli.trials,
        strategy: cli.strategy,
    };
    let config = Config::parse(&src, &overrides).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    if cli.trials == Some(0) {
        return Err(config_err("--trials must be positive"));
    }
    let report = run_experiment(&config).map_err(runtime_err)?;
    Ok(if cli.pretty { report.to_pretty() } else { report.to_csv() })
}

fn cmd_exact(cli: &Cli, args: &ExactArgs) -> Result<String, CliError> {
    let g = load_graph(&args.graph, cli.seed.unwrap_or(0))?;
    let rule = build_rule(&args.rule)?;
    if let StartPolicy::Fixed(v) = args.start {
        if v >= g.node_count() {
            return Err(config_err(format!("start node {v} out of range for {} nodes", g.node_count())));
        }
    }
    let opts = ChainOptions {
        cap: cli.exact_cap.unwrap_or(DEFAULT_STATE_CAP),
        all_initial_windows: args.all_windows,
        ..ChainOptions::default()
    };
    let result = exact_cover_time(&g, &rule, args.start, &opts).map_err(runtime_err)?;
    if let Some(dir) = &args.dump {
        let chain = enumerate_chain(&g, &rule, &args.start.starts(g.node_count()), &opts).map_err(runtime_err)?;
        fs::create_dir_all(dir).map_err(runtime_err)?;
        let states = File::create(dir.join("states.csv")).map_err(runtime_err)?;
        chain.write_state_table(BufWriter::new(states)).map_err(runtime_err)?;
        let triplets = File::create(dir.join("transitions.csv")).map_err(runtime_err)?;
        chain.write_triplets(BufWriter::new(triplets)).map_err(runtime_err)?;
    }
    if cli.pretty {
        let mut out = format!(
            "cover time  {:.6}\nworst start {}\nstates      {}\nresidual    {:.3e}\n",
            result.value, result.worst_start, result.state_count, result.residual
        );
        for (s, h) in &result.per_start {
            out.push_str(&format!("start {s}: {h:.6}\n"));
        }
        Ok(out)
    } else {
        Ok(format!("{:?}\n", result.value))
    }
}

fn cmd_bounds(args: &BoundsArgs) -> Result<String, CliError> {
    let report = match (args.q, args.min_degree, args.max_degree) {
        (Some(_), Some(_), _) => return Err(config_err("--q and degree bounds are mutually exclusive")),
        (Some(q), None, _) => rwd_k1_bounds(args.cover_time, args.p, q),
        (None, Some(lo), Some(hi)) => rwa_k0_bounds(args.cover_time, args.p, lo, hi),
        _ => rwd_k0_bounds(args.cover_time, args.p, args.edges, args.nodes),
    }
    .map_err(config_err)?;
    let mut out = format!("{} {}", report.lower, report.upper);
    if let Some(cap) = report.cap {
        out.push_str(&format!(" {cap}"));
    }
    out.push('\n');
    Ok(out)
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<String, CliError> {
    let seed = cli.seed.unwrap_or(0);
    let g = load_graph(&args.graph, seed)?;
    let strategy = cli.strategy.unwrap_or(Strategy::Rwa);
    let rule = match (strategy, &args.rule.p, &args.rule.table) {
        (Strategy::Srw, None, None) => EvolutionRule::Bernoulli { p: 1.0 },
        _ => build_rule(&args.rule)?,
    };
    let trials = cli.trials.unwrap_or(1000);
    if trials == 0 {
        return Err(config_err("--trials must be positive"));
    }
    if let StartPolicy::Fixed(v) = args.start {
        if v >= g.node_count() {
            return Err(config_err(format!("start node {v} out of range for {} nodes", g.node_count())));
        }
    }
    let mut cfg = ExperimentConfig::new(rule, strategy)
        .trials(trials)
        .seed(seed)
        .start(args.start)
        .chaining(!args.no_chaining);
    if let Some(limit) = args.step_limit {
        cfg.step_limit = limit;
    }
    if let Some(path) = &args.trace {
        let first = args.start.starts(g.node_count())[0];
        let mut out = BufWriter::new(File::create(path).map_err(runtime_err)?);
        let window = HistoryWindow::all_dead(&g, &cfg.rule);
        let opts = WalkOptions {
            step_limit: cfg.step_limit,
        };
        run_cover_walk_traced(&g, &cfg.rule, strategy, first, &window, &mut trial_rng(seed, first, 0), &opts, &mut out)
            .map_err(runtime_err)?;
    }
    let estimates = estimate_cover_time_per_start(&g, &cfg).map_err(runtime_err)?;
    let mut out = String::from("start,mean,se,trials,min,max\n");
    for e in estimates {
        out.push_str(&format!("{},{},{},{},{},{}\n", e.start, e.mean, e.std_error, e.trials, e.min, e.max));
    }
    Ok(out)
}

fn cmd_generate(cli: &Cli, args: &GraphArgs) -> Result<String, CliError> {
    if args.graph.is_some() {
        return Err(config_err("generate takes --family, not --graph"));
    }
    Ok(load_graph(args, cli.seed.unwrap_or(0))?.to_edge_list())
}

/// Runs the parsed command and returns what should be written to `--out`
/// or stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Experiment => cmd_experiment(cli),
        Command::Exact(a) => cmd_exact(cli, a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Generate(a) => cmd_generate(cli, a),
    }
}

/// Runs and writes the output to `--out` or stdout.
pub fn run_to_output(cli: &Cli) -> Result<(), CliError> {
    let text = run(cli)?;
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(runtime_err),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
