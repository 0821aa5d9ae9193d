mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "qcp", version, about = "Exact identification of a quantum change point")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal success probability, regime and efficiency profile.
    Compute(ComputeArgs),
    /// Checks matched primal/dual certificates at one overlap or a grid.
    Certify(CertifyArgs),
    /// Emits the data behind the efficiency-profile and success-curve plots.
    Figure(FigureArgs),
    /// Monte Carlo run of a measurement strategy.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[arg(long, value_parser = parse_length)]
    pub n: usize,
    #[arg(long, value_parser = parse_overlap)]
    pub c: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long, value_parser = parse_length)]
    pub n: usize,
    #[arg(long, value_parser = parse_overlap, conflicts_with = "c_range", required_unless_present = "c_range")]
    pub c: Option<f64>,
    /// START STOP STEP, both ends inclusive.
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "STEP"], allow_negative_numbers = true)]
    pub c_range: Option<Vec<f64>>,
    /// Tolerance on eigenvalues, dual diagonal and duality gap.
    #[arg(long, env = "QCP_TOL", default_value_t = 1e-9, value_parser = parse_positive)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub id: u8,
    /// Defaults to 20 for figure 1 and 15 for figure 2.
    #[arg(long, value_parser = parse_length)]
    pub n: Option<usize>,
    /// Overlap for figure 1.
    #[arg(long, value_parser = parse_overlap, default_value_t = 0.7)]
    pub c: f64,
    /// Overlap spacing for figure 2.
    #[arg(long, value_parser = parse_positive, default_value_t = 0.01)]
    pub step: f64,
    /// Seed for the local weight optimisation starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Collective,
    LocalEqual,
    LocalAlternating,
    LocalCustom,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_length)]
    pub n: usize,
    #[arg(long, value_parser = parse_overlap)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Collective)]
    pub strategy: StrategyArg,
    /// Interior weights x_1..x_{n-1} for `local-custom`.
    #[arg(long, value_delimiter = ',', required_if_eq("strategy", "local-custom"))]
    pub weights: Option<Vec<f64>>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample the collective POVM through explicit Born probabilities (n <= 8).
    #[arg(long)]
    pub born: bool,
    /// Allowed deviation from the analytic rate, in standard deviations.
    #[arg(long, default_value_t = 4.0, value_parser = parse_positive)]
    pub sigmas: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn parse_length(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 2 {
        return Err(format!("n must be at least 2, got {n}"));
    }
    Ok(n)
}

fn parse_overlap(s: &str) -> Result<f64, String> {
    let c: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(0.0..=1.0).contains(&c) {
        return Err(format!("overlap must lie in [0, 1], got {c}"));
    }
    Ok(c)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("expected a positive number, got {s}"));
    }
    Ok(v)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Compute(a) => commands::compute(a),
        Command::Certify(a) => commands::certify(a),
        Command::Figure(a) => commands::figure(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 1,
                CliError::Certification(_) => 2,
                CliError::Statistical(_) => 3,
                CliError::Io(_) => 1,
            })
        }
    }
}
