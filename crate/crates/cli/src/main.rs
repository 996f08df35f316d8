mod commands;
mod config;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "shiftdens", version, about = "Estimate random time shifts in curve panels and the density of the shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a panel of shifted noisy curves and the true shifts.
    Simulate(SimulateArgs),
    /// Estimate one shift per curve of a panel CSV.
    Estimate(EstimateArgs),
    /// Kernel density estimate of a column of shifts.
    Density(DensityArgs),
    /// Run a benchmark suite and write its metrics.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// sim1 (half-sine, bimodal shifts, n=100, J=50), sim2 (laser, n=100, J=30),
    /// illustration (laser, n=800, one curve at 0.35), demo (illustration at amplitude 0.015).
    #[arg(long)]
    pub preset: Option<String>,
    /// single-harmonic, half-sine, laser, or laser:AMPLITUDE,FREQUENCY.
    #[arg(long)]
    pub signal: Option<String>,
    /// uniform:LO,HI, bump:CENTER,HALF_WIDTH, bimodal, or point:X.
    #[arg(long)]
    pub dist: Option<String>,
    /// Constant added to every drawn shift.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Snap shifts to the nearest point of the grid TAU_MIN,TAU_MAX,M.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Read sigma and seed defaults from a run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Panel CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// True-shift CSV to write; defaults to `<out stem>.shifts.csv`.
    #[arg(long)]
    pub shifts_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EstimateArgs {
    /// Panel CSV with header t,curve_1,...,curve_J.
    pub panel: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV; overrides `shifts_out` from the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DensityArgs {
    /// CSV with a theta_hat or theta_true column.
    pub shifts: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// gaussian or epanechnikov.
    #[arg(long)]
    pub kernel: Option<String>,
    /// theoretical:BETA, lscv, or fixed:H.
    #[arg(long)]
    pub bandwidth: Option<String>,
    /// Curve length, used by the theoretical bandwidth.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// lemma24, lemma23, lemma25, theorem32, theorem33, sim1, or sim2.
    pub suite: String,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    /// Reduced replicate counts for a quick run.
    #[arg(long)]
    pub smoke: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Density(a) => commands::density(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("shiftdens: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
