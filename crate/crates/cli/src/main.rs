use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use stirap_tomo::SignalMode;
use stirap_tomo_cli::commands::{self, parse_grid, CommandError, CommandResult, SweepParam};
use stirap_tomo_cli::RunConfig;

/// Simulate STIRAP-based local density-matrix measurements.
#[derive(Parser)]
#[command(name = "stirap-tomo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation and write the trajectory as CSV.
    Simulate(Common),
    /// Run the measurement protocol and write the reconstruction report as JSON.
    Measure(Common),
    /// Repeat the simulation over a parameter grid and tabulate transfer against the decay formula.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of gamma_a, omega_max, delay_tau, delta, alpha, beta.
        #[arg(long, value_parser = parse_param)]
        param: SweepParam,
        /// `start:stop:count` or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
}

#[derive(Args)]
struct Common {
    /// Key-value or JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides run.output_path. Standard output when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Integrator tolerance; overrides run.integrator_tol.
    #[arg(long)]
    tol: Option<f64>,
    /// final or fluorescence; overrides protocol.signal_mode.
    #[arg(long, value_parser = parse_mode)]
    signal_mode: Option<SignalMode>,
}

fn parse_param(s: &str) -> Result<SweepParam, String> {
    SweepParam::parse(s)
        .ok_or_else(|| format!("unknown parameter `{s}` (expected one of {})", SweepParam::NAMES.join(", ")))
}

fn parse_mode(s: &str) -> Result<SignalMode, String> {
    SignalMode::parse(s).ok_or_else(|| format!("unknown signal mode `{s}` (expected final or fluorescence)"))
}

impl Common {
    fn load(&self) -> CommandResult<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CommandError::Config(stirap_tomo_cli::ConfigError {
                    source: "--tol".into(),
                    line: None,
                    field: None,
                    message: format!("must be positive, got {tol}"),
                }));
            }
            cfg.integrator_tol = tol;
        }
        if let Some(mode) = self.signal_mode {
            cfg.signal_mode = mode;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        if let Some(jobs) = self.jobs {
            // Only fails if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
        }
        log::info!("loaded {}", self.config.display());
        Ok(cfg)
    }
}

fn sink(cfg: &RunConfig) -> CommandResult<Box<dyn Write>> {
    Ok(match &cfg.output_path {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn stamp(command: &str) -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("stirap-tomo {} {command}, generated at unix time {secs}", env!("CARGO_PKG_VERSION"))
}

fn run(cli: Cli) -> CommandResult<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = common.load()?;
            let mut out = sink(&cfg)?;
            let traj = commands::simulate(&cfg, &stamp("simulate"), &mut out)?;
            out.flush()?;
            log::info!("{} samples, signal integral {:.6e}", traj.len(), traj.signal_integral());
        }
        Command::Measure(common) => {
            let cfg = common.load()?;
            let mut out = sink(&cfg)?;
            commands::measure(&cfg, &stamp("measure"), &mut out)?;
            out.flush()?;
        }
        Command::Sweep { common, param, grid } => {
            let cfg = common.load()?;
            let grid = parse_grid(&grid)?;
            let mut out = sink(&cfg)?;
            commands::sweep(&cfg, param, &grid, &stamp("sweep"), &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STIRAP_TOMO_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stirap-tomo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
