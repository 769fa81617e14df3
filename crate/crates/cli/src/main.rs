//! `pnp-ddg`: runs the built-in benchmarks, convergence studies and steady
//! state checks, writing CSV output.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use env_logger::Env;

use config::{CflChoice, ConfigError, Overrides};

#[derive(Parser)]
#[command(name = "pnp-ddg", version, about = "Positivity-preserving DDG solver for Poisson-Nernst-Planck benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mesh and write diagnostics.csv and final snapshots.
    Run(Common),
    /// Run every mesh size and write errors.csv with observed orders.
    Convergence(Common),
    /// Step from a steady state and report the change per step.
    SteadyCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding [output] dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow NP flux parameters outside the positivity range.
    #[arg(long)]
    override_admissibility: bool,
    #[arg(long, value_enum)]
    cfl: Option<CflChoice>,
    /// Runge-Kutta order.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    rk: Option<u8>,
    #[arg(long)]
    no_limiter: bool,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn execute(command: Command) -> anyhow::Result<()> {
    let (Command::Run(c) | Command::Convergence(c) | Command::SteadyCheck(c)) = &command;
    let text = std::fs::read_to_string(&c.config)
        .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", c.config.display())))?;
    let mut cfg = config::parse_config(&text).map_err(|e| anyhow::Error::new(e).context(c.config.display().to_string()))?;
    cfg.apply(&Overrides {
        out: c.out.clone(),
        override_admissibility: c.override_admissibility,
        cfl: c.cfl,
        rk: c.rk,
        no_limiter: c.no_limiter,
    });
    let r = cfg.resolve()?;
    log::info!("{r}");
    if r.override_admissibility && !r.np.in_positivity_range() {
        eprintln!("warning: NP flux ({}, {}) is outside the proven range; positivity is not guaranteed", r.np.beta0, r.np.beta1);
    }
    match command {
        Command::Run(_) => commands::run(&r, &config::to_toml(&cfg)),
        Command::Convergence(_) => commands::convergence(&r),
        Command::SteadyCheck(_) => commands::steady_check_cmd(&r),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<pnp_ddg::Error>() {
            return if e.is_numerical_fatal() { EXIT_NUMERICAL } else { EXIT_CONFIG };
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
