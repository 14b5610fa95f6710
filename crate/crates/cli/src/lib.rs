//! Command-line driver: reads a scenario, runs one analysis and writes
//! plot-ready CSV tables and JSON records.

pub mod commands;
pub mod config;
pub mod error;
pub mod record;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Analysis;
use config::{Format, Scenario, ScenarioConfig};
use error::{CliError, Result};
use record::{ResultRecord, Status};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "CSLQP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "cslqp", version, about = "Quasiparticles generated by collapse noise in superconducting qubits")]
pub struct Cli {
    /// Scenario file in TOML.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in scenario.
    #[arg(long, global = true)]
    pub preset: Option<String>,

    /// Output directory; overrides the environment variable and the scenario file.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,

    /// Files to write.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatChoice>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatChoice {
    Csv,
    Json,
    Both,
}

impl FormatChoice {
    fn formats(&self) -> Vec<Format> {
        match self {
            FormatChoice::Csv => vec![Format::Csv],
            FormatChoice::Json => vec![Format::Json],
            FormatChoice::Both => vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collapse-noise rates, electron-phonon rates, power density and reduction rate.
    Rates,
    /// Numeric and linearised steady states at each configured temperature.
    SteadyState,
    /// Temperatures where collapse generation matches the phonon rates.
    Crossover,
    /// Gate-budget frontier and workload verdicts.
    Budget,
    /// Run one analysis for each value of a numeric configuration field.
    Sweep {
        /// Dotted path of the field, e.g. `csl.lambda`, `solver.n_nodes` or `temperature`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value = "steady-state")]
        analysis: Analysis,
    },
    /// Print the resolved scenario as TOML.
    ShowConfig,
}

/// Load the scenario named by `--config` or `--preset`.
pub fn resolve_config(cli: &Cli) -> Result<ScenarioConfig> {
    let mut config = match (&cli.config, &cli.preset) {
        (Some(path), None) => config::load_config(path)?,
        (None, Some(name)) => config::preset(name)?,
        _ => {
            return Err(CliError::config(
                "--config",
                format!("give a scenario file or one of the presets {:?}", config::PRESETS),
            ))
        }
    };
    if let Some(out) = &cli.out {
        config.output.directory = out.clone();
    }
    if let Some(f) = cli.format {
        config.output.formats = f.formats();
    }
    Ok(config)
}

/// Run the command and write its records. Returns the most severe status.
pub fn execute(cli: &Cli) -> Result<Status> {
    if let Some(n) = cli.threads {
        // A pool that already exists (for example in tests) is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global();
    }
    let config = resolve_config(cli)?;
    if matches!(cli.command, Command::ShowConfig) {
        print!("{}", config::to_toml(&config)?);
        return Ok(Status::Success);
    }
    let out_dir = config.output.directory.clone();
    let formats = config.output.formats.clone();
    let records: Vec<ResultRecord> = match &cli.command {
        Command::Sweep { axis, values, analysis } => {
            let outcome = commands::sweep(&config, axis, values, *analysis)?;
            let mut all = outcome.points;
            all.push(outcome.summary);
            all
        }
        other => {
            let analysis = match other {
                Command::Rates => Analysis::Rates,
                Command::SteadyState => Analysis::SteadyState,
                Command::Crossover => Analysis::Crossover,
                Command::Budget => Analysis::Budget,
                Command::Sweep { .. } | Command::ShowConfig => unreachable!("handled above"),
            };
            let scenario = Scenario::validate(config)?;
            vec![analysis.run(&scenario)?]
        }
    };
    let mut status = Status::Success;
    for record in &records {
        let written = record.write(&out_dir, &formats)?;
        println!(
            "{} [{}] {}: {} file(s) in {}",
            record.analysis,
            record.scenario_hash,
            record.status.label(),
            written.len(),
            record.directory(&out_dir).display()
        );
        for w in &record.warnings {
            eprintln!("warning: {w}");
        }
        status = status.max(record.status);
    }
    Ok(status)
}

/// Entry point shared by the binary: returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
