//! Command-line front end: JSON config in, JSON reports and CSV profiles out.
//!
//! Exit codes: 0 success, 2 config error, 3 domain error, 4 nonconvergence.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use commands::{run_command, Command, CommandOutput};
pub use config::AnalysisConfig;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "orbitvol", version, about = "Orbit volumes, Ricci curvature and convexity checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
    /// JSON configuration file; defaults apply to every omitted field.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for line sampling and multistart (overrides `sampler.seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CliCommand {
    /// Ricci classification and convexity of the volume functionals.
    Analyze,
    /// Critical orbit search, multistart uniqueness and boundary decay.
    Critical,
    /// Functional along the configured segment.
    Profile,
    /// Orbit volume profiles along SU(2) geodesics in CP^3.
    Su2,
    /// Haar-averaged PSH functions along a geodesic.
    Lassalle,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Analyze => Command::Analyze,
            CliCommand::Critical => Command::Critical,
            CliCommand::Profile => Command::Profile,
            CliCommand::Su2 => Command::Su2,
            CliCommand::Lassalle => Command::Lassalle,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
struct ErrorEnvelope {
    error: ErrorReport,
}

impl ErrorReport {
    pub fn from_error(e: &Error) -> Self {
        if e.is_domain_error() {
            Self { code: EXIT_DOMAIN, kind: "domain", message: e.to_string() }
        } else {
            Self { code: EXIT_CONFIG, kind: "config", message: e.to_string() }
        }
    }

    fn io(context: &str, e: &std::io::Error) -> Self {
        Self { code: EXIT_CONFIG, kind: "config", message: format!("{context}: {e}") }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorEnvelope { error: self.clone() }).expect("error serializes")
    }
}

/// Loads the config and applies the command-line overrides.
pub fn load_config(cli: &Cli) -> Result<AnalysisConfig, ErrorReport> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ErrorReport::io(&format!("reading {}", path.display()), &e))?;
            AnalysisConfig::from_json(&text).map_err(|e| ErrorReport::from_error(&e))?
        }
        None => AnalysisConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sampler.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

/// Runs one invocation; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(report) => {
            eprintln!("{}", report.to_json());
            report.code
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, ErrorReport> {
    let cfg = load_config(cli)?;
    let out = run_command(cli.command.into(), &cfg).map_err(|e| ErrorReport::from_error(&e))?;
    let dir = PathBuf::from(&cfg.output.dir);
    for f in &out.files {
        let path = output::write_atomic(&dir, &f.name, &f.bytes)
            .map_err(|e| ErrorReport::io(&format!("writing {}", f.name), &e))?;
        if !cli.quiet {
            println!("wrote {}", path.display());
        }
    }
    if !cli.quiet {
        println!("{}", out.summary);
    }
    if out.nonconvergence {
        let report = ErrorReport {
            code: EXIT_NONCONVERGENCE,
            kind: "nonconvergence",
            message: out.summary.clone(),
        };
        eprintln!("{}", report.to_json());
        return Ok(EXIT_NONCONVERGENCE);
    }
    Ok(EXIT_OK)
}
