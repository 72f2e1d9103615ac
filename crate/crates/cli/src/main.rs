//! `walshcap` command-line front end.

mod commands;
mod input;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input; exit code 2.
    Usage(String),
    /// Anything else; exit code 1.
    Internal(String),
}

impl From<walshcap::Error> for CliError {
    fn from(e: walshcap::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "walshcap",
    version,
    about = "Walsh spectra, channel capacity and sample-size planning for biased distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Walsh spectrum of a count or probability vector.
    Fwt(FwtArgs),
    /// Sample-size plan for a bias, a spectral mass or a distribution.
    Plan(PlanArgs),
    /// Capacity of the detection channel of a distribution.
    Capacity(CapacityArgs),
    /// Monte Carlo error rates of a distinguisher.
    Simulate(SimulateArgs),
    /// Renyi divergence from uniform.
    Renyi(RenyiArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV `index,count` file or JSON array.
    #[arg(long, value_name = "PATH")]
    input: std::path::PathBuf,
    /// Treat input values as probabilities instead of counts.
    #[arg(long)]
    normalized: bool,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Report destination: a file path or `stdout`.
    #[arg(long, value_name = "PATH|stdout", default_value = "stdout")]
    json: String,
}

#[derive(Debug, Args)]
struct FwtArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Divide by the total before transforming.
    #[arg(long)]
    normalize: bool,
    /// Number of largest nontrivial coefficients to list.
    #[arg(long, default_value_t = 5)]
    top: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false, args = ["bias", "mass", "coeffs", "input"])]
struct PlanArgs {
    /// Bias of a single binary variable, e.g. `0.015625` or `2^-6`.
    #[arg(long, value_parser = commands::parse_real, allow_hyphen_values = true)]
    bias: Option<f64>,
    /// Spectral mass.
    #[arg(long, value_parser = commands::parse_real)]
    mass: Option<f64>,
    /// Comma-separated nontrivial Walsh coefficients.
    #[arg(long, value_name = "LIST", value_parser = commands::parse_real_list, allow_hyphen_values = true)]
    coeffs: Option<commands::CoeffList>,
    /// Count or probability file.
    #[arg(long, value_name = "PATH")]
    input: Option<std::path::PathBuf>,
    #[arg(long, requires = "input")]
    normalized: bool,
    /// Sample budget, e.g. `1000000` or `2^40`.
    #[arg(long = "N", value_name = "INT", value_parser = commands::parse_count)]
    samples: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Approx,
    BlahutArimoto,
    General,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "blahut-arimoto")]
    method: Method,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Samples per trial.
    #[arg(long = "N", value_name = "INT", value_parser = commands::parse_count)]
    samples: u64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `llr` or `spectral`.
    #[arg(long, default_value = "llr")]
    decider: String,
    /// Significance level of the spectral decider.
    #[arg(long, default_value_t = walshcap::distinguisher::Decider::DEFAULT_ALPHA, value_parser = commands::parse_real)]
    alpha: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct RenyiArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Order of the divergence.
    #[arg(long, default_value_t = 0.5, value_parser = commands::parse_real)]
    alpha: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (envelope, target) = match cli.command {
        Command::Fwt(a) => (commands::fwt(&a)?, a.output.json),
        Command::Plan(a) => (commands::plan(&a)?, a.output.json),
        Command::Capacity(a) => (commands::capacity(&a)?, a.output.json),
        Command::Simulate(a) => (commands::simulate(&a)?, a.output.json),
        Command::Renyi(a) => (commands::renyi(&a)?, a.output.json),
    };
    envelope.emit(&target)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
