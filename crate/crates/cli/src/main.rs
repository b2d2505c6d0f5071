//! `playtest`: validate tuning files, run experiment suites, diff builds and
//! train softmax baselines.
//!
//! Exit status: 0 on success, 1 on a domain failure (invalid tuning, failed
//! experiment, unreachable training goal), 2 on usage or I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "playtest", version, about = "Automated playtesting for tuning files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check tuning files and print diagnostics, including reward-curve
    /// anomaly warnings.
    Validate(ValidateArgs),
    /// Run every experiment of a suite file.
    Run(RunArgs),
    /// Structural diff between two builds.
    Diff(DiffArgs),
    /// Train a softmax policy with REINFORCE.
    Train(TrainArgs),
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Flag steps whose reward per unit of effort falls below this fraction
    /// of the event's first step.
    #[arg(long, default_value_t = playtest_core::tuning::DEFAULT_ANOMALY_RATIO)]
    pub anomaly_ratio: f64,
}

#[derive(Args)]
pub struct RunArgs {
    pub suite: PathBuf,
    #[arg(long, env = "PLAYTEST_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Replaces every experiment's base seed and training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for trials within an experiment.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub parallel: u16,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args)]
pub struct DiffArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args)]
pub struct TrainArgs {
    pub tuning: PathBuf,
    /// Career to assign and level up.
    #[arg(long, requires = "level", conflicts_with = "chain")]
    pub career: Option<String>,
    #[arg(long)]
    pub level: Option<u32>,
    /// Goal: finish this many events of any relationship chain.
    #[arg(long)]
    pub chain: Option<u32>,
    #[arg(long)]
    pub grant_objects: bool,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u32).range(1..))]
    pub episodes: u32,
    #[arg(long, default_value_t = 0.05)]
    pub step_size: f64,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Policy JSON destination; the return curve goes next to it as
    /// `<stem>.returns.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Run(a) => commands::run(&a),
        Command::Diff(a) => commands::diff(&a),
        Command::Train(a) => commands::train(&a),
    };
    ExitCode::from(code)
}
