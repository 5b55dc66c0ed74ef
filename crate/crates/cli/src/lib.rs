//! The `semev` command line: equilibrium solving, parameter sweeps,
//! simulation, the episode pipeline and synthetic data generation.
//!
//! Every run that writes to a directory also writes `manifest.json` listing
//! the artifacts with their digests and a hash of the effective settings.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{Ctx, Outcome};
use crate::config::{config_hash, Axis, FileConfig, SimMode};
use crate::error::CliResult;
use crate::output::{now, RunManifest, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "semev", version, about = "Sanction-evasion contest models and episode pipeline")]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory; without it the primary output goes to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the contest equilibrium.
    Solve(ContestArgs),
    /// Tabulate equilibrium and economics fields along one axis.
    Sweep(SweepArgs),
    /// Run the seeded contest simulator.
    Simulate(SimulateArgs),
    /// Segment sanctioned accounts into episodes and regimes.
    Pipeline(PipelineArgs),
    /// Write a synthetic event corpus with ground truth.
    Synth(SynthArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Simulate(_) => "simulate",
            Command::Pipeline(_) => "pipeline",
            Command::Synth(_) => "synth",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ContestArgs {
    /// Evader prize.
    #[arg(long, allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Issuer prize.
    #[arg(long, allow_negative_numbers = true)]
    pub psi: Option<f64>,
    /// Contest sharpness.
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long = "c-i", allow_negative_numbers = true)]
    pub c_i: Option<f64>,
    #[arg(long = "c-b", allow_negative_numbers = true)]
    pub c_b: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub contest: ContestArgs,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Log spacing (true) or linear spacing (false).
    #[arg(long)]
    pub log: Option<bool>,
    /// Proposer share for the cost column when the axis is not alpha.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub contest: ContestArgs,
    #[arg(long, value_enum)]
    pub mode: Option<SimMode>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// public-public, mixed-issuer-private, mixed-evader-private or private-private.
    #[arg(long)]
    pub regime: Option<String>,
    /// equilibrium, fixed:AMOUNT or grid:HI:STEPS.
    #[arg(long = "strategy-i")]
    pub strategy_i: Option<String>,
    #[arg(long = "strategy-b")]
    pub strategy_b: Option<String>,
    /// Issuer proposer share; selects the repeated setting.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long = "grid-hi")]
    pub grid_hi: Option<f64>,
    #[arg(long = "grid-steps")]
    pub grid_steps: Option<usize>,
    /// Starting bids for adaptive mode.
    #[arg(long, num_args = 2, value_names = ["B_I", "B_B"])]
    pub start: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub noise: Option<f64>,
    #[arg(long = "bid-ratios", value_delimiter = ',')]
    pub bid_ratios: Option<Vec<f64>>,
    /// Also write one CSV row per trial (race mode, needs --out).
    #[arg(long = "trials-csv")]
    pub trials_csv: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, value_name = "JSONL")]
    pub transfers: PathBuf,
    #[arg(long, value_name = "JSONL")]
    pub sanctions: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub labels: Option<PathBuf>,
    /// Ground truth from `synth`; adds evaluation.json.
    #[arg(long, value_name = "JSON")]
    pub truth: Option<PathBuf>,
    /// Fixed gap threshold in seconds.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Three regime cut points in seconds.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub boundaries: Option<Vec<f64>>,
    /// Use cut points from the mixture fit when it yields three.
    #[arg(long = "fitted-boundaries")]
    pub fitted_boundaries: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub addresses: Option<usize>,
    #[arg(long = "planted-tau")]
    pub planted_tau: Option<f64>,
    /// Four regime weights.
    #[arg(long = "regime-mix", value_delimiter = ',', num_args = 4)]
    pub regime_mix: Option<Vec<f64>>,
    #[arg(long = "material-fraction")]
    pub material_fraction: Option<f64>,
    #[arg(long = "post-exec-fraction")]
    pub post_exec_fraction: Option<f64>,
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let started = now();
    let config = FileConfig::load(cli.config.as_deref())?;
    let explicit_seed = cli.seed.or(config.seed);
    let section_seed = match &cli.command {
        Command::Pipeline(_) => config.pipeline.seed,
        Command::Synth(_) => config.synth.seed,
        _ => 0,
    };
    let seed = explicit_seed.unwrap_or(section_seed);
    let sink = Sink::new(cli.out.as_deref())?;
    let ctx = Ctx { config, seed, format: cli.format, sink };

    let Outcome { artifacts, effective, counts, seed } = match &cli.command {
        Command::Solve(a) => commands::solve::run(&ctx, a)?,
        Command::Sweep(a) => commands::sweep::run(&ctx, a)?,
        Command::Simulate(a) => commands::simulate::run(&ctx, a)?,
        Command::Pipeline(a) => commands::pipeline::run(&ctx, a, explicit_seed)?,
        Command::Synth(a) => commands::synth::run(&ctx, a)?,
    };
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        config_hash: config_hash(&effective)?,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now(),
        artifacts,
        counts,
    };
    ctx.sink.finish(&manifest)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEMEV_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_cli(["semev", "bogus"]), 2);
        assert_eq!(run_cli(["semev", "solve", "--v", "abc"]), 2);
    }
}
