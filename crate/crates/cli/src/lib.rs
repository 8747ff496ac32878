//! Command-line front end of the eitline simulator.
//!
//! `eitline <command> [--config PATH] [--out DIR] [--seed N] ...` loads a
//! [`config::RunConfig`], validates every section, computes all outputs in
//! memory and only then writes them. Failures print a single
//! `error[tag]: message` line on stderr.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::{CliError, EXIT_FAILED_CHECK, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "eitline", version, about = "Phase-noise to amplitude-noise conversion in an EIT vapor cell")]
pub struct Cli {
    /// TOML run configuration; the built-in paper preset when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Base seed of the Monte-Carlo realization streams (overrides `seed`)
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Skip the Monte-Carlo checks of `validate`.
    #[arg(long, global = true)]
    pub quick: bool,
    /// Ensemble size for `mc` and the checks of `validate`
    #[arg(long, global = true, value_name = "N")]
    pub realizations: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Input and transmitted beat spectra with their fits.
    Figure2 {
        /// Write only the incident spectrum; no propagation.
        #[arg(long)]
        off_resonance_only: bool,
    },
    /// Monochromatic EIT scan against the transmitted noise spectrum.
    Figure3,
    /// Transmitted width over a sweep of drive powers.
    Figure4,
    /// Reduced-scale cross-route and Monte-Carlo checks.
    Validate,
    /// Transmitted spectrum for the configured route.
    Propagate,
    /// Monte-Carlo ensemble of the transmitted beat spectrum.
    Mc,
    /// Fit both model lineshapes to a spectrum CSV.
    Fit {
        #[arg(long, value_name = "PATH")]
        spectrum: PathBuf,
        /// gaussian, lorentzian or both.
        #[arg(long)]
        model: Option<String>,
        /// Fit only within this distance of the peak.
        #[arg(long, value_name = "KHZ")]
        half_window_khz: Option<f64>,
    },
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::usage("usage", first));
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.code
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.realizations {
        cfg.mc.realizations = n;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    let r = cfg.resolve()?;
    if let Command::Figure4 = cli.command {
        commands::check_sweep(&r)?;
    }
    if let Command::Mc = cli.command {
        r.mc.validate().map_err(CliError::config)?;
    }

    let outcome = match &cli.command {
        Command::Figure2 { off_resonance_only } => commands::figure2(&r, *off_resonance_only)?,
        Command::Figure3 => commands::figure3(&r)?,
        Command::Figure4 => commands::figure4(&r)?,
        Command::Validate => commands::validate(&r, cli.quick, cli.realizations)?,
        Command::Propagate => commands::propagate(&r)?,
        Command::Mc => commands::mc(&r)?,
        Command::Fit {
            spectrum,
            model,
            half_window_khz,
        } => commands::fit(&r, spectrum, model.as_deref(), *half_window_khz)?,
    };

    outcome.artifacts.write_all(&out)?;
    for w in &outcome.warnings {
        eprintln!("{w}");
    }
    for line in &outcome.artifacts.report {
        println!("{line}");
    }
    if outcome.failures > 0 {
        let e = CliError::failed(format!("{} check(s) failed", outcome.failures));
        eprintln!("{e}");
        return Ok(EXIT_FAILED_CHECK);
    }
    Ok(EXIT_OK)
}
