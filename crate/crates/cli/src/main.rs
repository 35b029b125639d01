mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinpair::BellKind;

use crate::commands::SpectrumSource;
use crate::config::RunConfig;
use crate::error::CliResult;

/// Two-spin ¹H–¹³C NMR simulator: Bell-state preparation, tomography,
/// spectra and cross-correlated relaxation.
#[derive(Debug, Parser)]
#[command(name = "spinpair", version, about)]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Random seed for the rf-error ensemble (overrides the config).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Relative rf-amplitude spread (standard deviation, overrides the config).
    #[arg(long = "rf-spread", global = true, value_name = "F")]
    rf_spread: Option<f64>,

    /// Initial-fit window in seconds (overrides the config).
    #[arg(long, global = true, value_name = "S")]
    window: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the built-in preparation of a Bell state from equilibrium.
    Prepare {
        #[arg(value_parser = parse_kind)]
        kind: BellKind,
    },
    /// Simulated state tomography of a prepared Bell state.
    Tomo {
        #[arg(value_parser = parse_kind)]
        kind: BellKind,
    },
    /// ¹H spectrum and G_a of a prepared Bell state, or `eq` for equilibrium.
    Spectrum {
        #[arg(value_parser = parse_source)]
        kind: SpectrumSource,
    },
    /// G_a(τ) relaxation curve of a prepared Bell state.
    Relax {
        #[arg(value_parser = parse_kind)]
        kind: BellKind,
    },
    /// Initial exponential fit of a `tau_s,ga` CSV curve.
    Fit { curve: PathBuf },
    /// Execute a pulse-program file from equilibrium.
    Run { program: PathBuf },
}

fn parse_kind(s: &str) -> Result<BellKind, String> {
    s.parse::<BellKind>()
        .map_err(|_| format!("expected one of S0, T0, psi_plus, psi_minus; got `{s}`"))
}

fn parse_source(s: &str) -> Result<SpectrumSource, String> {
    if s.eq_ignore_ascii_case("eq") {
        Ok(SpectrumSource::Equilibrium)
    } else {
        parse_kind(s).map(SpectrumSource::Bell)
    }
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(spread) = cli.rf_spread {
        cfg.rf_spread = spread;
    }
    if let Some(window) = cli.window {
        cfg.window = window;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let cfg = load_config(cli)?;
    let out = &cli.out;
    match &cli.command {
        Command::Prepare { kind } => commands::prepare(*kind, &cfg, out),
        Command::Tomo { kind } => commands::tomo(*kind, &cfg, out),
        Command::Spectrum { kind } => commands::spectrum(*kind, &cfg, out),
        Command::Relax { kind } => commands::relax(*kind, &cfg, out),
        Command::Fit { curve } => commands::fit(curve, cfg.window),
        Command::Run { program } => commands::run(program, &cfg, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
