//! `crn`: run radar network scenarios and summarize their CSV output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use crn_core::config::{presets, read_raw, RawConfig};
use crn_core::output::render_summary;
use crn_core::{monte_carlo, report, write_results, ConfigError, OutputError, Scenario, SimError};

#[derive(Parser)]
#[command(name = "crn", version, about = "Decentralized cognitive radar network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every variant of a scenario and write CSV results.
    Simulate {
        /// Scenario file; layered over --preset when both are given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in scenario (see `crn presets`).
        #[arg(long)]
        preset: Option<String>,
        /// Master seed, replacing the scenario's.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo run count, replacing the scenario's.
        #[arg(long)]
        runs: Option<usize>,
        /// Run only this variant.
        #[arg(long)]
        variant: Option<String>,
        /// Output directory; named variants go to DIR/<variant>/.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Do not write the per-PRI action log.
        #[arg(long)]
        no_actions: bool,
        #[arg(long, short)]
        quiet: bool,
    },
    /// Summarize result directories into summary.csv.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in presets, or print one.
    Presets { name: Option<String> },
}

enum Failure {
    Config(ConfigError),
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load_scenario(config: Option<&Path>, preset: Option<&str>) -> Result<Scenario, Failure> {
    let raw = match (preset, config) {
        (None, None) => return Err(Failure::Usage("give --config, --preset or both".into())),
        (Some(p), None) => presets::raw(p)?,
        (None, Some(c)) => read_raw(c)?,
        (Some(p), Some(c)) => presets::raw(p)?.overlay(read_raw(c)?),
    };
    Ok(raw.resolve()?)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    config: Option<&Path>,
    preset: Option<&str>,
    seed: Option<u64>,
    runs: Option<usize>,
    variant: Option<&str>,
    out: &Path,
    no_actions: bool,
    quiet: bool,
) -> Result<(), Failure> {
    let mut scenario = load_scenario(config, preset)?;
    scenario.override_all(seed, runs)?;
    if let Some(v) = variant {
        if scenario.variant(v).is_none() {
            let names: Vec<_> = scenario.variants.iter().filter_map(|x| x.name.clone()).collect();
            return Err(Failure::Usage(format!("no variant {v:?}; available: {}", names.join(", "))));
        }
        scenario.variants.retain(|x| x.name.as_deref() == Some(v));
    }
    for v in &mut scenario.variants {
        if no_actions {
            v.config.record_actions = false;
        }
        let dir = match &v.name {
            Some(n) => out.join(n),
            None => out.to_path_buf(),
        };
        let started = Instant::now();
        let mc = monte_carlo(&v.config)?;
        write_results(&dir, &v.config, &mc)?;
        if !quiet {
            println!(
                "{:<24} runs={:<4} final R/t={:.6} final err={:.3} m  ({:.1?}) -> {}",
                v.name.as_deref().unwrap_or("(scenario)"),
                v.config.runs,
                mc.final_regret(),
                mc.final_error(),
                started.elapsed(),
                dir.display()
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { config, preset, seed, runs, variant, out, no_actions, quiet } => {
            simulate(config.as_deref(), preset.as_deref(), seed, runs, variant.as_deref(), &out, no_actions, quiet)
        }
        Command::Report { input, out } => {
            let rows = report(&input, &out)?;
            print!("{}", render_summary(&rows));
            Ok(())
        }
        Command::Presets { name: None } => {
            presets::NAMES.iter().for_each(|n| println!("{n}"));
            Ok(())
        }
        Command::Presets { name: Some(n) } => {
            let text = presets::text(&n).ok_or(ConfigError::UnknownPreset(n))?;
            // parse so a listed preset is known to be loadable
            RawConfig::parse(text)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("crn: configuration error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("crn: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("crn: {msg}");
            ExitCode::from(3)
        }
    }
}
