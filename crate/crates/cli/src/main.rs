//! `reeb`: command-line front end for reeb-core.
//!
//! Exit codes: 0 success, 2 mathematical non-success (inconclusive
//! certificate, no orbit found, degenerate index), 1 usage or input error.
//! Errors go to standard error as `{"error": {"kind", "message", "exit_code"}}`.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use config::{Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "reeb", version, about = "Reeb flows on R⁴: convexity, periodic orbits, Conley–Zehnder indices, linking")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Built-in model name or path to a JSON model definition.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub energy: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON run configuration; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OrbitArgs {
    /// rotational, reversible or none.
    #[arg(long)]
    pub symmetry: Option<String>,
    /// Seed `x1,x2,y1,y2` for `--symmetry none`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub seed_point: Option<Vec<f64>>,
    #[arg(long)]
    pub period_guess: Option<f64>,
    /// Section window `a,b` on the x2-axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long)]
    pub orbit_samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hill-region boundary (CSV x1,x2,loop or JSON).
    Hill {
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Grid scan of G_E, or an interval certificate with --certify.
    Convexity {
        #[arg(long)]
        certify: bool,
        #[arg(long)]
        grid: Option<usize>,
        /// Random points per certificate for the enclosure spot check.
        #[arg(long)]
        spot_check: Option<usize>,
    },
    /// Periodic orbit by symmetric shooting (JSON, or CSV projection t,x1,x2).
    Orbit(OrbitArgs),
    /// Conley–Zehnder index of a periodic orbit.
    Cz {
        #[command(flatten)]
        orbit: OrbitArgs,
        /// Orbit JSON written by `reeb orbit`.
        #[arg(long)]
        orbit_file: Option<PathBuf>,
        /// global or disk.
        #[arg(long)]
        frame: Option<String>,
        #[arg(long)]
        iterate: Option<usize>,
        /// geometric, spectral or both.
        #[arg(long)]
        engine: Option<String>,
        /// Samples per period; a power of two ≥ 256 for the spectral engine.
        #[arg(long)]
        path_samples: Option<usize>,
    },
    /// Linking number of two closed curves on S³ (JSON arrays of [x1,x2,y1,y2]).
    Linking {
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
    },
    /// Self-linking number of a transverse knot on S³ with an explicit disk.
    Sl {
        /// Knot samples; the round z1-circle when absent.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// p1 (bounded by the z1-circle) or p2.
        #[arg(long)]
        disk: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        radial: Option<usize>,
        #[arg(long)]
        angular: Option<usize>,
    },
    /// Closed-form reference data.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// The ellipsoid with radii r1 ≤ r2 and its quotient by g_{p,1}.
    Ellipsoid {
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        r2: Option<f64>,
        #[arg(long)]
        p: Option<i64>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(reeb_core::Error),
}

impl From<reeb_core::Error> for CliError {
    fn from(e: reeb_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_mathematical() => 2,
            CliError::Core(_) => 1,
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Usage(_) => "Usage".into(),
            CliError::Core(e) => {
                let debug = format!("{e:?}");
                debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
            }
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

/// Rendered document and whether it reports mathematical success.
pub struct Output {
    pub body: String,
    pub success: bool,
}

fn report(err: &CliError) -> ExitCode {
    let code = err.exit_code();
    let doc = json!({ "error": { "kind": err.kind(), "message": err.message(), "exit_code": code } });
    eprintln!("{doc}");
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let config = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = commands::Context { global: cli.global.clone(), config };
    match cli.command {
        Command::Hill { resolution } => commands::hill(&ctx, resolution),
        Command::Convexity { certify, grid, spot_check } => {
            commands::convexity(&ctx, certify.then_some(true), grid, spot_check)
        }
        Command::Orbit(args) => commands::orbit(&ctx, &args),
        Command::Cz { orbit, orbit_file, frame, iterate, engine, path_samples } => {
            commands::cz(&ctx, &orbit, orbit_file, frame, iterate, engine, path_samples)
        }
        Command::Linking { a, b } => commands::linking(&ctx, a, b),
        Command::Sl { curve, disk, eps, radial, angular } => commands::sl(&ctx, curve, disk, eps, radial, angular),
        Command::Oracle { which: OracleCommand::Ellipsoid { r1, r2, p } } => commands::oracle(&ctx, r1, r2, p),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return report(&CliError::Usage(e.to_string().trim().to_string()));
        }
    };
    let out_path = cli.global.out.clone();
    let config_out = cli.global.config.as_ref().and_then(|p| RunConfig::load(p).ok()).and_then(|c| c.out);
    let output = match run(cli) {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    let written = match out_path.or(config_out) {
        Some(path) => std::fs::write(&path, &output.body).map_err(|e| format!("{}: {e}", path.display())),
        None => match std::io::stdout().write_all(output.body.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|e| e.to_string()),
        },
    };
    if let Err(m) = written {
        return report(&CliError::Usage(m));
    }
    if output.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
