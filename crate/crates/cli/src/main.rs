//! `safeopt`: runs safe Bayesian tuning campaigns, eigenvalue maps and
//! simulations, writing plot-ready CSV/JSON artifacts.

mod commands;
mod config;
mod error;
mod output;
mod plant;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "safeopt", version, about = "Safe Bayesian optimization of controller parameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CampaignArgs {
    /// Campaign config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the configured algorithm (safeOpt, stageOpt, shrinkAlgo).
    #[arg(long)]
    algo_override: Option<String>,
    /// Overrides the iteration budget (every stage for context chains).
    #[arg(long)]
    iterations: Option<usize>,
}

impl CampaignArgs {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, algorithm: self.algo_override.clone(), iterations: self.iterations }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Runs one campaign and writes history, surfaces, summary and manifest.
    Optimize(CampaignArgs),
    /// Runs a chain of operating points, transferring data between them.
    ContextChain(CampaignArgs),
    /// Eigenvalue map of the network over a gain × delay grid.
    Eigmap {
        /// Network config (TOML); the shipped combustor if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Gain range `lower:upper:count`.
        #[arg(long, default_value = "0:2.5:26")]
        n: String,
        /// Delay range in ms, `lower:upper:count`.
        #[arg(long, default_value = "0.5:7:27")]
        tau: String,
        /// Modes kept per point, most unstable first.
        #[arg(long, default_value_t = 1)]
        modes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-domain simulation at one controller setting.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Controller gain.
        #[arg(long)]
        n: f64,
        /// Controller delay in ms.
        #[arg(long)]
        tau: f64,
        /// Run length in s; the config value if omitted.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Disables the flame saturation and the voltage clip.
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lists the hyperparameter presets.
    Presets {
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Optimize(a) => commands::optimize(&a.config, a.out.as_deref(), &a.overrides()),
        Command::ContextChain(a) => commands::context_chain(&a.config, a.out.as_deref(), &a.overrides()),
        Command::Eigmap { config, n, tau, modes, out } => {
            commands::eigmap(config.as_deref(), &n, &tau, modes, out.as_deref())
        }
        Command::Simulate { config, n, tau, duration, seed, linear, out } => {
            commands::simulate_cmd(commands::SimulateArgs {
                network: config.as_deref(),
                n,
                tau_ms: tau,
                duration,
                seed,
                linear,
                out: out.as_deref(),
            })
        }
        Command::Presets { json } => commands::presets(json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("safeopt: {e}");
            e.exit_code()
        }
    }
}
