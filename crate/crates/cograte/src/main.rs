use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cograte::cli::{self, ExperimentConfig};
use cograte::Error;

/// Achievable-rate analysis of a sensing-constrained cognitive-radio link.
#[derive(Parser)]
#[command(name = "cograte", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized rate vs average SNR at a fixed operating point (Fig. 1 style).
    SweepSnr(RunArgs),
    /// Threshold sweep: rates and power split vs (P_d, P_f) (Fig. 2/3 style).
    SweepPd(RunArgs),
    /// One power optimization at the configured budget and operating point.
    Optimize(RunArgs),
    /// Detector operating characteristic over the threshold grid.
    Roc(RunArgs),
    /// Run every oracle cross-check; nonzero exit on any failure.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Report rates in bits/sec instead of nats/sec.
    #[arg(long)]
    bits: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Error::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(other) => {
            eprintln!("error: {other}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> cograte::Result<ExitCode> {
    let (args, table, ok) = match &cli.command {
        Command::SweepSnr(a) => {
            let cfg = ExperimentConfig::from_path(&a.config)?;
            (a, cli::run_sweep_snr(&cfg, a.bits)?, true)
        }
        Command::SweepPd(a) => {
            let cfg = ExperimentConfig::from_path(&a.config)?;
            (a, cli::run_sweep_pd(&cfg, a.bits)?, true)
        }
        Command::Optimize(a) => {
            let cfg = ExperimentConfig::from_path(&a.config)?;
            (a, cli::run_optimize(&cfg, a.bits)?, true)
        }
        Command::Roc(a) => {
            let cfg = ExperimentConfig::from_path(&a.config)?;
            (a, cli::run_roc(&cfg)?, true)
        }
        Command::Validate(a) => {
            let cfg = ExperimentConfig::from_path(&a.config)?;
            let (table, ok) = cli::run_validate(&cfg, 1.0)?;
            (a, table, ok)
        }
    };

    let format = match args.format {
        Some(FormatArg::Csv) => "csv".to_string(),
        Some(FormatArg::Json) => "json".to_string(),
        None => {
            let cfg = ExperimentConfig::from_path(&args.config)?;
            cfg.format
        }
    };

    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            table.write(&mut file, &format)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(&mut lock, &format)?;
            lock.flush()?;
        }
    }

    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
