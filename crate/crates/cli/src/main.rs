//! `fusionlab` command-line driver.

mod chain;
mod error;
mod fuse;
mod input;
mod simulate;
mod weights;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "fusionlab", version, about = "Conservative density fusion and two-sensor tracking experiments")]
struct Cli {
    /// RNG seed (overrides the config for `simulate`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for Monte Carlo trials.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory for `simulate`.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Format of tables printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse Gaussian estimates read from a JSON file.
    Fuse {
        input: PathBuf,
        /// naive, ga, ci, ffcc, cu_max, cu_min or aa (overrides the file).
        #[arg(long)]
        rule: Option<String>,
        /// Total weight for ffcc, in (0, 1].
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Design fusing weights for Gaussian sources.
    Weights {
        #[arg(required_unless_present = "fig2")]
        input: Option<PathBuf>,
        /// opt (needs a target), diversity or bound.
        #[arg(long)]
        objective: Option<String>,
        /// Run the four-component merging benchmark instead of reading a file.
        #[arg(long, conflicts_with = "input")]
        fig2: bool,
    },
    /// Run a Monte Carlo tracking experiment.
    Simulate {
        config: PathBuf,
        /// Also dump every (trial, step) as JSON lines.
        #[arg(long)]
        ensemble: bool,
    },
    /// Check the conservative trace chains on random instances.
    Chain {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let print = |out: &mut dyn Write, text: String| {
        writeln!(out, "{text}").map_err(|e| CliError::Invariant(e.to_string()))
    };
    match cli.command {
        Command::Fuse { input, rule, delta } => print(&mut out, fuse::run(&input, rule.as_deref(), delta)?),
        Command::Weights { fig2: true, .. } => weights::fig2(cli.format, &mut out),
        Command::Weights { input, objective, .. } => {
            let input = input.ok_or_else(|| CliError::Usage("an input file is required".into()))?;
            print(&mut out, weights::run(&input, objective.as_deref())?)
        }
        Command::Simulate { config, ensemble } => simulate::run(
            simulate::SimulateArgs {
                config: &config,
                out_dir: &cli.out,
                seed: cli.seed,
                jobs: cli.jobs,
                format: cli.format,
                ensemble,
            },
            &mut out,
        ),
        Command::Chain { n, dim } => chain::run(n, dim, cli.seed.unwrap_or(0), cli.format, &mut out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FUSIONLAB_LOG", "error")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fusionlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
