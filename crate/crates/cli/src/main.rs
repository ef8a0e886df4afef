//! `gwcell`: analyze, sweep, simulate, lifespan.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{override_opt, OutputFormat, RunConfig, SweepConfig, TreeFileFormat};

/// Error carrying the process exit code: 2 config, 3 numerical, 4 resource cap.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError { code: 2, message }
    }

    pub fn numerical(message: String) -> Self {
        CliError { code: 3, message }
    }

    /// A library error that arose while interpreting user input.
    pub fn from_config_error(e: gwcell::Error) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<gwcell::Error> for CliError {
    fn from(e: gwcell::Error) -> Self {
        let code = match &e {
            gwcell::Error::InvalidParams(_) | gwcell::Error::Parse(_) => 2,
            gwcell::Error::PopulationCap { .. } | gwcell::Error::LineageStepCap { .. } => 4,
            _ => 3,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gwcell",
    version,
    about = "Multitype Galton-Watson model of rejuvenating cell populations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analytical report for one model (json)
    Analyze(CommonArgs),
    /// Growth rate, age structure and rejuvenation endpoints across a value grid
    Sweep(SweepArgs),
    /// Seeded population trajectory (csv), with optional lineage-tree export
    Simulate(SimulateArgs),
    /// Expected replicative lifespan per start age, optionally Monte Carlo checked
    Lifespan(LifespanArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Senescence threshold: biological ages run 0..n
    #[arg(long)]
    n: Option<usize>,
    /// Constant damage inflow per generation (family models)
    #[arg(long)]
    m: Option<usize>,
    /// Retention proportion kept by the mother at division
    #[arg(long)]
    p: Option<f64>,
    /// Division-probability exponent (family models)
    #[arg(long)]
    alpha: Option<f64>,
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, where the command offers a choice
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// RNG seed (simulate requires one; lifespan --samples defaults to 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Family parameter to vary: p, m or alpha
    #[arg(long)]
    var: Option<String>,
    /// Comma-separated list of values to sweep over
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of generations to simulate
    #[arg(long)]
    horizon: Option<u32>,
    /// Initial population size, all of one age
    #[arg(long)]
    cells: Option<u64>,
    /// Age of the initial cells (default 0)
    #[arg(long)]
    start_age: Option<usize>,
    /// Ceiling on living cells before the run aborts
    #[arg(long)]
    cap: Option<u64>,
    /// Write the full lineage tree here
    #[arg(long)]
    tree_out: Option<PathBuf>,
    /// Tree file format
    #[arg(long, value_enum)]
    tree_format: Option<TreeFileFormat>,
}

#[derive(Args)]
struct LifespanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Monte Carlo lineages per start age (0 = analytic only)
    #[arg(long)]
    samples: Option<u64>,
    /// Ceiling on generations per simulated lineage
    #[arg(long)]
    step_cap: Option<u64>,
}

fn merged_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_model_flags(common.n, common.m, common.p, common.alpha)?;
    override_opt(&mut cfg.out, common.out.clone());
    override_opt(&mut cfg.format, common.format);
    override_opt(&mut cfg.seed, common.seed);
    override_opt(&mut cfg.threads, common.threads);
    Ok(cfg)
}

fn init_threads(cfg: &RunConfig) {
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(common) => {
            let cfg = merged_config(&common)?;
            init_threads(&cfg);
            commands::cmd_analyze(&cfg)
        }
        Command::Sweep(args) => {
            let mut cfg = merged_config(&args.common)?;
            if args.var.is_some() || args.values.is_some() {
                let mut sweep = cfg.sweep.take().unwrap_or(SweepConfig {
                    var: String::new(),
                    values: Vec::new(),
                });
                if let Some(var) = args.var {
                    sweep.var = var;
                }
                if let Some(values) = args.values {
                    sweep.values = values;
                }
                cfg.sweep = Some(sweep);
            }
            init_threads(&cfg);
            commands::cmd_sweep(&cfg)
        }
        Command::Simulate(args) => {
            let mut cfg = merged_config(&args.common)?;
            override_opt(&mut cfg.horizon, args.horizon);
            override_opt(&mut cfg.cells, args.cells);
            override_opt(&mut cfg.start_age, args.start_age);
            override_opt(&mut cfg.cap, args.cap);
            override_opt(&mut cfg.tree_out, args.tree_out);
            override_opt(&mut cfg.tree_format, args.tree_format);
            init_threads(&cfg);
            commands::cmd_simulate(&cfg)
        }
        Command::Lifespan(args) => {
            let mut cfg = merged_config(&args.common)?;
            override_opt(&mut cfg.samples, args.samples);
            override_opt(&mut cfg.step_cap, args.step_cap);
            init_threads(&cfg);
            commands::cmd_lifespan(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
