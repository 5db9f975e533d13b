mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{load_config, ExpansionPart, RunConfig};
use error::{exit, CliError};
use std::path::PathBuf;
use sunflower::classical::Strategy;
use sunflower::expansion::CheckMode;
use sunflower::graph::Backend;
use sunflower::qsim::Mode;

#[derive(Parser)]
#[command(name = "sunflower", version, about = "Experiments on regular sunflower graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build a graph and write its artifact.
    Generate,
    /// Factorized spectrum of the effective Hamiltonian.
    Spectrum,
    /// Filter error against the bound for ℓ = 1..ell-max.
    Filter,
    /// Batch of simulated quantum pathfinding trials.
    Quantum,
    /// Classical explorer success rates over an n grid.
    Classical,
    /// Adjacency gap and vertex expansion, or the bipartite check.
    Expansion,
    /// Classical and quantum columns side by side over an n grid.
    Separation,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Spectrum => "spectrum",
            Command::Filter => "filter",
            Command::Quantum => "quantum",
            Command::Classical => "classical",
            Command::Expansion => "expansion",
            Command::Separation => "separation",
        }
    }
}

/// Comma-separated list flag.
#[derive(Clone, Debug)]
struct List(Vec<usize>);

fn list(s: &str) -> Result<List, String> {
    s.split(',').map(|x| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}"))).collect::<Result<_, _>>().map(List)
}

fn parse_part(s: &str) -> Result<ExpansionPart, String> {
    match s {
        "graph" => Ok(ExpansionPart::Graph),
        "bipartite" => Ok(ExpansionPart::Bipartite),
        other => Err(format!("unknown part '{other}'")),
    }
}

/// Every flag overrides the same field from `--config`.
#[derive(Args)]
struct Flags {
    /// TOML or JSON config, or an earlier CSV/JSON output to re-run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    d: Option<u64>,
    #[arg(long, global = true)]
    m: Option<u64>,
    #[arg(long, global = true)]
    n: Option<u64>,
    #[arg(long, global = true)]
    naux: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// c in the classical budget q = ⌊(d−1)^{c n}⌋.
    #[arg(long, global = true)]
    budget_exponent: Option<f64>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    backend: Option<Backend>,
    #[arg(long, global = true)]
    strategy: Option<Strategy>,
    /// Comma-separated n grid.
    #[arg(long, global = true, value_parser = list)]
    ns: Option<List>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    eps_prime: Option<f64>,
    #[arg(long, global = true)]
    eps_a: Option<f64>,
    /// Fixed sample count instead of the union-bound choice.
    #[arg(long, global = true)]
    n_s: Option<usize>,
    #[arg(long, global = true)]
    ell_max: Option<usize>,
    /// graph | bipartite
    #[arg(long, global = true, value_parser = parse_part)]
    part: Option<ExpansionPart>,
    #[arg(long, global = true)]
    subsets: Option<u64>,
    /// Comma-separated subset sizes.
    #[arg(long, global = true, value_parser = list)]
    sizes: Option<List>,
    /// Comma-separated side sizes N for the bipartite check.
    #[arg(long, global = true, value_parser = list)]
    bipartite_n: Option<List>,
    #[arg(long, global = true)]
    bipartite_d: Option<usize>,
    #[arg(long, global = true)]
    draws: Option<u64>,
    /// exhaustive | monte-carlo
    #[arg(long, global = true)]
    check: Option<CheckMode>,
    /// Monte-Carlo subsets per draw.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Graph artifact to load instead of building from parameters.
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Output file; `.json` selects JSON, anything else CSV. Stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "SUNFLOWER_WORKERS")]
    workers: Option<usize>,
}

macro_rules! overlay {
    ($cfg:ident, $flags:ident; $($field:ident),*) => {
        $(if let Some(v) = $flags.$field.clone() { $cfg.$field = v; })*
    };
}

fn resolve(command: Command, f: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = match &f.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    cfg.command = command.name().to_string();
    overlay!(cfg, f; d, m, n, seed, trials, budget_exponent, mode, backend, strategy, beta, eps_a, ell_max, part, subsets, bipartite_d, draws, check);
    if f.naux.is_some() {
        cfg.naux = f.naux;
    }
    for (slot, v) in [(&mut cfg.alpha, f.alpha), (&mut cfg.eps, f.eps), (&mut cfg.eps_prime, f.eps_prime)] {
        if v.is_some() {
            *slot = v;
        }
    }
    if f.n_s.is_some() {
        cfg.n_s = f.n_s;
    }
    if let Some(List(v)) = &f.ns {
        cfg.ns = v.clone();
    }
    if let Some(List(v)) = &f.sizes {
        cfg.sizes = Some(v.clone());
    }
    if let Some(List(v)) = &f.bipartite_n {
        cfg.bipartite_n = v.clone();
    }
    if let Some(s) = f.samples {
        cfg.check = CheckMode::MonteCarlo { samples: s };
    }
    if f.graph.is_some() {
        cfg.graph = f.graph.clone();
    }
    if f.out.is_some() {
        cfg.out = f.out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(w) = cli.flags.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = resolve(cli.command, &cli.flags)?;
    match cli.command {
        Command::Generate => commands::generate(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Filter => commands::filter(&cfg),
        Command::Quantum => commands::quantum(&cfg),
        Command::Classical => commands::classical(&cfg),
        Command::Expansion => commands::expansion(&cfg),
        Command::Separation => commands::separation(&cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            match &e {
                CliError::Params(p) => {
                    eprintln!("error: invalid parameters");
                    for v in &p.0 {
                        eprintln!("  - {v}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            e.code()
        }
    };
    std::process::exit(code);
}
