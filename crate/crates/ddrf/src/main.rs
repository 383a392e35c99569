//! Thin command-line front end over the `ddrf` library.
//!
//! Exit codes: 0 success, 1 I/O or numeric failure, 2 config error,
//! 3 validation against the full-drive oracle failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ddrf::cli::{
    cmd_calibrate, cmd_sweep_bathfid, cmd_sweep_gatefid, cmd_total, cmd_trajectory,
    cmd_validate, CliError, SweepParameter, SweepSpec,
};
use ddrf::evolution::ElectronBranch;
use ddrf::oracle::IntegratorSpec;
use ddrf::system::NodeConfig;

#[derive(Parser)]
#[command(name = "ddrf", version, about = "DDRF spin-register simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// TOML config describing the node
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Swept parameter: beta, betaBar, or aParBar
    #[arg(long, value_parser = parse_param)]
    param: SweepParameter,
    /// First swept value (rad for angles, kHz for couplings)
    #[arg(long)]
    start: f64,
    /// Last swept value
    #[arg(long)]
    stop: f64,
    /// Number of evenly spaced points
    #[arg(long, default_value_t = 101)]
    count: usize,
    /// Worker threads (1 = sequential)
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch-vector trajectory of one spin over the sequence
    Trajectory {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Spin label (defaults to the target)
        #[arg(long)]
        spin: Option<String>,
        /// Electron branch, 0 or 1
        #[arg(long, default_value_t = 0, value_parser = parse_branch_digit)]
        branch: u8,
        /// Samples per sequence segment
        #[arg(long, default_value_t = 32)]
        samples: u32,
    },
    /// Sweep the register gate fidelity
    SweepGatefid(SweepArgs),
    /// Sweep the bath-spin infidelity (exact and sinc^2 models)
    SweepBathfid(SweepArgs),
    /// Search the Rabi factor maximizing the target gate fidelity
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compose the total fidelity for p entangled pairs
    Total {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Remote entangled pairs consumed
        #[arg(long, default_value_t = 2)]
        pairs: usize,
    },
    /// Check rotating-wave propagators against the full-drive integrator
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_param(s: &str) -> Result<SweepParameter, String> {
    s.parse()
}

fn parse_branch_digit(s: &str) -> Result<u8, String> {
    match s {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(format!("branch must be 0 or 1, got {other:?}")),
    }
}

fn load_config(path: &PathBuf) -> Result<NodeConfig, ExitFailure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExitFailure::io(format!("read {}: {e}", path.display())))?;
    NodeConfig::from_toml_str(&text)
        .map_err(|e| ExitFailure::new(2, format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<(), ExitFailure> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| ExitFailure::io(format!("write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

struct ExitFailure {
    code: u8,
    message: String,
}

impl ExitFailure {
    fn new(code: u8, message: String) -> Self {
        ExitFailure { code, message }
    }

    fn io(message: String) -> Self {
        ExitFailure::new(1, message)
    }
}

impl From<CliError> for ExitFailure {
    fn from(e: CliError) -> Self {
        let code = match e {
            CliError::Config(_) => 2,
            _ => 1,
        };
        ExitFailure::new(code, e.to_string())
    }
}

fn run(cli: Cli) -> Result<u8, ExitFailure> {
    match cli.command {
        Command::Trajectory {
            config,
            out,
            spin,
            branch,
            samples,
        } => {
            let cfg = load_config(&config)?;
            let branch = if branch == 0 {
                ElectronBranch::Zero
            } else {
                ElectronBranch::One
            };
            let body = cmd_trajectory(&cfg, spin.as_deref(), branch, samples)?;
            emit(&out, &body)?;
            Ok(0)
        }
        Command::SweepGatefid(args) => {
            let cfg = load_config(&args.config)?;
            let spec = SweepSpec {
                parameter: args.param,
                start: args.start,
                stop: args.stop,
                count: args.count,
            };
            let body = cmd_sweep_gatefid(&cfg, &spec, args.jobs)?;
            emit(&args.out, &body)?;
            Ok(0)
        }
        Command::SweepBathfid(args) => {
            let cfg = load_config(&args.config)?;
            let spec = SweepSpec {
                parameter: args.param,
                start: args.start,
                stop: args.stop,
                count: args.count,
            };
            let body = cmd_sweep_bathfid(&cfg, &spec, args.jobs)?;
            emit(&args.out, &body)?;
            Ok(0)
        }
        Command::Calibrate { config, out } => {
            let cfg = load_config(&config)?;
            let body = cmd_calibrate(&cfg)?;
            emit(&out, &body)?;
            Ok(0)
        }
        Command::Total { config, out, pairs } => {
            let cfg = load_config(&config)?;
            let body = cmd_total(&cfg, pairs)?;
            emit(&out, &body)?;
            Ok(0)
        }
        Command::Validate { config, out } => {
            let cfg = load_config(&config)?;
            let (body, passed) = cmd_validate(&cfg, &IntegratorSpec::default())?;
            emit(&out, &body)?;
            if passed {
                Ok(0)
            } else {
                Err(ExitFailure::new(
                    3,
                    "rotating-wave propagators exceed the oracle distance tolerance".to_string(),
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ddrf: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
