mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use config::{Overrides, RunConfig};

/// Exit codes: 0 pass, 1 verification failure, 2 input error, 3 domain error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Failure(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Failure(_) => 1,
            Self::Input(_) => 2,
            Self::Domain(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "crext", version, about = "Maurer-Cartan coefficients, their continuation, and CR frame extension")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Opts {
    /// Print the report as JSON
    #[arg(long, global = true)]
    json: bool,
    /// Pass threshold for residuals [default: 1e-8]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Finite-difference step, within [1e-8, 1e-2] [default: 1e-4]
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Richardson extrapolation levels, 0..=4 [default: 1]
    #[arg(long, global = true)]
    richardson: Option<usize>,
    /// Sample grid: auto, lattice:N or random:N
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Chart radius in the max-norm of t [default: 1]
    #[arg(long, global = true)]
    rmax: Option<f64>,
    /// Seed for random sampling
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random samples for the dependence check and the certificate [default: 50]
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Number of transverse vectors to add [default: k]
    #[arg(long = "target-l", global = true)]
    target_l: Option<usize>,
    /// JSON file with any of the options above
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit
    #[arg(long, global = true)]
    show_config: bool,
}

impl Opts {
    fn overrides(&self) -> Overrides {
        Overrides {
            tol: self.tol,
            step: self.step,
            richardson: self.richardson,
            grid: self.grid.clone(),
            rmax: self.rmax,
            seed: self.seed,
            samples: self.samples,
            target_l: self.target_l,
            json: self.json.then_some(true),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the Jacobi identity and classify; for CR structures also check the structure
    Validate { input: String },
    /// Residual sweeps of the structure equation, the flatness system, and triangular dependence
    Verify { input: String },
    /// Run the extension pipeline on a CR structure and print the certificate
    Embed { input: String },
    /// Exact polynomial coefficients and residuals for a nilpotent algebra
    Oracle { input: String },
    /// Run every catalog entry through its checks
    Selftest,
    /// Built-in algebras and structures
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
}

fn run(cli: Cli) -> Result<(commands::Outcome, bool), CliError> {
    let file = cli.opts.config.as_deref().map(Overrides::load).transpose()?;
    let cfg = RunConfig::resolve(cli.opts.overrides(), file)?;
    if cli.opts.show_config {
        let out = commands::Outcome { code: 0, report: cfg.to_json(), human: String::new() };
        return Ok((out, true));
    }
    let outcome = match cli.command {
        Some(Command::Validate { input }) => commands::validate(&input)?,
        Some(Command::Verify { input }) => commands::verify(&input, &cfg)?,
        Some(Command::Embed { input }) => commands::embed(&input, &cfg)?,
        Some(Command::Oracle { input }) => commands::oracle(&input)?,
        Some(Command::Selftest) => commands::selftest(&cfg)?,
        Some(Command::Catalog { action: CatalogAction::List }) => commands::catalog_list(),
        None => return Err(CliError::Input(Cli::command().render_help().to_string())),
    };
    Ok((outcome, cfg.json))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_flag = cli.opts.json;
    match run(cli) {
        Ok((out, json)) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&out.report).expect("report serializes"));
            } else {
                print!("{}", out.human);
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            if json_flag {
                let report = json!({ "error": e.to_string(), "exit_code": e.code() });
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code())
        }
    }
}
