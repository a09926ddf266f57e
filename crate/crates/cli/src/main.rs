//! Experiment runner for the finite-volume solver: evolve scenarios,
//! solve stationary problems, sweep parameters, audit hypotheses.
//!
//! Exit codes: 0 on success, 1 when a run completes but an asserted
//! diagnostic fails (the check is named on stderr), 2 on configuration
//! errors.

mod check;
mod manifest;
mod run;
mod stationary;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manifest::Manifest;

#[derive(Debug)]
pub enum CliError {
    /// Bad manifest, flags or input files; exits 2.
    Config(String),
    /// A computed result failed an asserted check; exits 1.
    Diagnostic(String),
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn diagnostic(msg: impl Into<String>) -> Self {
        CliError::Diagnostic(msg.into())
    }
}

#[derive(Parser)]
#[command(
    name = "degenfv",
    version,
    about = "Finite-volume solver for degenerate convection-diffusion \
             problems with a nonlinear boundary flux"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a problem and write snapshots, a run log and diagnostics.
    Run(RunArgs),
    /// Solve the stationary problem u + (total flux)' = g.
    Stationary(StationaryArgs),
    /// Run a family of problems varying one parameter.
    Sweep(SweepArgs),
    /// Audit the structural hypotheses of a problem and print a table.
    Check(CheckArgs),
}

/// Problem selection and overrides shared by every subcommand. Values
/// apply in order: built-in defaults, scenario, config file, flags.
#[derive(Args)]
struct CommonArgs {
    /// Built-in scenario: traffic-drain | burgers-weak-drain |
    /// traffic-direct-drain | sealed.
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
    /// Flat `key = value` problem description.
    #[arg(long, value_name = "PATH", conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Cell size.
    #[arg(long, value_name = "R")]
    dx: Option<f64>,
    /// Numerical flux: godunov | rusanov | engquist-osher.
    #[arg(long, value_name = "NAME")]
    flux: Option<String>,
}

impl CommonArgs {
    fn manifest(&self) -> Result<Manifest, CliError> {
        let mut m = Manifest::default();
        if let Some(name) = &self.scenario {
            m.apply_scenario(name)?;
        }
        if let Some(path) = &self.config {
            m.apply_config(path)?;
        }
        if let Some(dx) = self.dx {
            m.dx = dx;
        }
        if let Some(flux) = &self.flux {
            m.flux = flux.clone();
        }
        if let Ok(seed) = std::env::var("DEGENFV_SEED") {
            m.seed = seed
                .parse()
                .map_err(|_| CliError::config(format!("DEGENFV_SEED '{seed}' is not an integer")))?;
        }
        Ok(m)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Viscous regularization strength.
    #[arg(long, value_name = "R")]
    epsilon: Option<f64>,
    /// Final time.
    #[arg(long, value_name = "R")]
    horizon: Option<f64>,
    /// Comma-separated snapshot times inside (0, horizon).
    #[arg(long, value_name = "T1,T2,...")]
    snapshots: Option<String>,
    /// Keep the sign convention of the original boundary discretization
    /// at x = a (the drain there becomes a source).
    #[arg(long)]
    paper_literal_left_boundary: bool,
    /// Also write a gnuplot script for the snapshots.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct StationaryArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Constant source term g.
    #[arg(long, value_name = "R", conflicts_with = "g_csv")]
    g: Option<f64>,
    /// Source term as a CSV column (one value per cell, header allowed).
    #[arg(long, value_name = "PATH")]
    g_csv: Option<PathBuf>,
    /// Also solve at dx/2 and record the flux-jump ratio.
    #[arg(long)]
    refine: bool,
    /// Also write a gnuplot script for the profile.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory; one subdirectory per member.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Swept parameter: epsilon | dx.
    #[arg(long, value_name = "NAME")]
    param: String,
    /// Comma-separated values, strictly decreasing.
    #[arg(long, value_name = "V1,V2,...")]
    values: String,
    /// Viscous strength applied to every member of a dx sweep.
    #[arg(long, value_name = "R")]
    epsilon: Option<f64>,
    #[arg(long)]
    paper_literal_left_boundary: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let mut m = args.common.manifest()?;
            if let Some(eps) = args.epsilon {
                m.epsilon = eps;
            }
            if let Some(t) = args.horizon {
                m.horizon = t;
            }
            if let Some(list) = &args.snapshots {
                m.snapshots = manifest::parse_list(list).map_err(CliError::config)?;
            }
            if args.paper_literal_left_boundary {
                m.paper_literal_left_boundary = true;
            }
            run::cmd_run(&m.resolve()?, &args.out, args.gnuplot)
        }
        Command::Stationary(args) => {
            let m = args.common.manifest()?;
            let source = match (args.g, &args.g_csv) {
                (Some(v), None) => stationary::Source::Constant(v),
                (None, Some(path)) => stationary::Source::Csv(path.clone()),
                (None, None) => return Err(CliError::config("one of --g or --g-csv is required")),
                (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
            };
            stationary::cmd_stationary(&m.resolve()?, &source, args.refine, &args.out, args.gnuplot)
        }
        Command::Sweep(args) => {
            let mut m = args.common.manifest()?;
            if let Some(eps) = args.epsilon {
                m.epsilon = eps;
            }
            if args.paper_literal_left_boundary {
                m.paper_literal_left_boundary = true;
            }
            let values = manifest::parse_list(&args.values).map_err(CliError::config)?;
            sweep::cmd_sweep(&m, &args.param, &values, &args.out)
        }
        Command::Check(args) => check::cmd_check(&args.common.manifest()?.resolve()?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Diagnostic(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
