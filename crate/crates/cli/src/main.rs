mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use calib_core::CalibError;
use clap::{Parser, Subcommand};

use config::{RhoMode, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Calib(CalibError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Calib(e) => write!(f, "{e}"),
        }
    }
}

impl From<CalibError> for CliError {
    fn from(e: CalibError) -> Self {
        CliError::Calib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Calib(CalibError::InfeasibleParams(_) | CalibError::InvalidTriple(_)) => 2,
            CliError::Calib(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "calib", version, about = "Build and verify the calibration of a triple-junction candidate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for report.json and CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the hypotheses on the harmonic triple.
    Check,
    /// Build the field and run the selected checks.
    Verify {
        /// Comma-separated subset of a,b,c,d,e,rho,m,step3.
        #[arg(long, value_delimiter = ',')]
        conditions: Option<Vec<String>>,
        /// Coarse grid nodes per axis for condition (d).
        #[arg(long)]
        grid: Option<usize>,
        /// Refinement rounds for condition (d).
        #[arg(long)]
        refine: Option<usize>,
    },
    /// Emit samples of rho for plotting.
    Rho {
        #[arg(long, value_enum)]
        mode: Option<RhoModeArg>,
    },
    /// Compare the energy of u with sampled competitors.
    Energy,
    /// Check the planar containments over the configured (epsilon, delta) grid.
    Step3,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum RhoModeArg {
    AlongRay,
    Slice,
}

fn init_logging() {
    let level = std::env::var("CALIB_LOG").unwrap_or_else(|_| "error".into());
    env_logger::Builder::new().parse_filters(&level).format_timestamp(None).init();
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot set thread count: {e}")))?;
    }
    let out_dir = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let out = output::Output::new(&out_dir)?;
    match cli.command {
        Command::Check => commands::check(&cfg, &out),
        Command::Verify { conditions, grid, refine } => {
            if let Some(g) = grid {
                cfg.scan.grid = g;
            }
            if let Some(k) = refine {
                cfg.scan.refine = k;
            }
            commands::verify(&cfg, conditions.as_deref(), &out)
        }
        Command::Rho { mode } => {
            if let Some(m) = mode {
                cfg.rho.mode = match m {
                    RhoModeArg::AlongRay => RhoMode::AlongRay,
                    RhoModeArg::Slice => RhoMode::Slice,
                };
            }
            commands::rho(&cfg, &out)
        }
        Command::Energy => commands::energy(&cfg, &out),
        Command::Step3 => commands::step3(&cfg, &out),
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("calib: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
