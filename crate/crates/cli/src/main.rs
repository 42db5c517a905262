//! `cmc`: batch front-end for the solver, verification experiments and the rearrangement lab.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cmc_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Core(cmc_core::Error::Io(_) | cmc_core::Error::Parse(_)) => 2,
            _ => 1,
        }
    }
}

/// Whether every check performed by a command held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

#[derive(Parser)]
#[command(name = "cmc", version, about = "Constant mean curvature radial graphs: solve, verify, export")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Flat key=value configuration file; KEY=VALUE arguments override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out=`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Settings as KEY=VALUE.
    settings: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build and export a mesh.
    Mesh(RunArgs),
    /// Solve the Dirichlet problem.
    Solve(RunArgs),
    /// Solve with closed-form boundary data and check the error.
    VerifyExact(RunArgs),
    /// Cone curvature, boundary barriers and the sandwich check.
    BarrierCheck(RunArgs),
    /// Crystalline rearrangement experiments.
    Rearrange(RunArgs),
    /// Exhaustion of the hemisphere by caps.
    Asymptotic(RunArgs),
    /// Rotationally symmetric 1-D reference solution.
    Oracle(RunArgs),
    /// Refinement study against the closed form.
    Convergence(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Mesh(a) => ("mesh", a),
        Command::Solve(a) => ("solve", a),
        Command::VerifyExact(a) => ("verify-exact", a),
        Command::BarrierCheck(a) => ("barrier-check", a),
        Command::Rearrange(a) => ("rearrange", a),
        Command::Asymptotic(a) => ("asymptotic", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Convergence(a) => ("convergence", a),
    };
    let result = Config::load(args.config.as_deref(), &args.settings).and_then(|cfg| {
        let out = cfg.out_dir(args.out.as_deref());
        commands::run(name, &cfg, &out)
    });
    match result {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => {
            eprintln!("{name}: check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
