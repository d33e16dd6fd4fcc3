mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Overrides;
use crate::error::CliError;
use crate::output::Outputs;

/// Squeezed-vacuum simulations: Rabi ground states, phase-space rotation,
/// coupling quenches and multimode spectrum tests.
#[derive(Debug, Parser)]
#[command(name = "sqvac", version, about)]
struct Cli {
    /// TOML run configuration, merged over the built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact Rabi ground state against the effective squeezed vacuum.
    GroundState,
    /// Husimi panels and quadrature-variance traces of a rotating squeezed vacuum.
    Figure1,
    /// Sudden removal of the coupling, with an adiabatic ramp for contrast.
    Quench,
    /// Photon-count histogram against the fluctuation spectrum.
    SpectrumTest,
    /// Fast internal consistency checks.
    Selftest,
    /// Print the built-in defaults table.
    Defaults,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Defaults = cli.command {
        print!("{}", config::DEFAULTS);
        return Ok(());
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    let resolved = config::load(
        cli.config.as_deref(),
        &Overrides {
            seed: cli.seed,
            out: cli.out,
        },
    )?;
    let cfg = &resolved.config;
    let mut outputs = Outputs::default();
    let summary = match cli.command {
        Command::GroundState => commands::ground_state::run(cfg, &mut outputs)?,
        Command::Figure1 => commands::figure1::run(cfg, &mut outputs)?,
        Command::Quench => commands::quench::run(cfg, &mut outputs)?,
        Command::SpectrumTest => commands::spectrum::run(cfg, &mut outputs)?,
        Command::Selftest => commands::selftest::run(cfg, &mut outputs)?,
        Command::Defaults => unreachable!(),
    };
    outputs.add("resolved_config.toml", resolved.to_toml());
    let names: Vec<String> = outputs.names().map(|p| p.display().to_string()).collect();
    outputs.commit(&cfg.output.dir)?;
    println!("{summary}");
    println!(
        "wrote {} files to {}: {}",
        names.len(),
        cfg.output.dir.display(),
        names.join(", ")
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sqvac: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
