//! `fusion`: command-line front end for the fusion-gate models.

mod args;
mod commands;
mod config;
mod inputs;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use photonic_fusion::numfmt::round_json;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use args::{Command, Format};
use commands::Body;
use config::{merge, ConfigFile};

/// Seed used when neither `--seed` nor the config file gives one.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Parser)]
#[command(name = "fusion", version, about = "Polarization-parity fusion gate: simulation and analysis")]
struct Cli {
    /// RNG seed [default: 1729]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format [default: csv for antidip and simulate, json otherwise]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON config; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn global<T: DeserializeOwned>(config: &ConfigFile, key: &str) -> Result<Option<T>> {
    config
        .global(key)
        .map(|v| serde_json::from_value(v.clone()).with_context(|| format!("config key {key:?}")))
        .transpose()
}

fn default_format(command: &Command) -> Format {
    match command {
        Command::Antidip(_) | Command::Simulate(_) => Format::Csv,
        _ => Format::Json,
    }
}

fn json_only(command: &str, format: Format) -> Result<()> {
    anyhow::ensure!(format == Format::Json, "{command} writes JSON only, drop --format csv");
    Ok(())
}

/// Merges config and flags, fills defaults, and returns the resolved
/// parameters for the echo.
fn resolve<T: Serialize + DeserializeOwned>(
    name: &str,
    flags: &T,
    config: &ConfigFile,
    fill: impl FnOnce(&mut T),
) -> Result<(T, Value)> {
    let mut args = merge(name, flags, config)?;
    fill(&mut args);
    let echo = serde_json::to_value(&args)?;
    Ok((args, echo))
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => global(&config, "seed")?.unwrap_or(DEFAULT_SEED),
    };
    let out: Option<PathBuf> = match cli.out {
        Some(o) => Some(o),
        None => global(&config, "out")?,
    };
    let format = match cli.format {
        Some(f) => f,
        None => global(&config, "format")?.unwrap_or_else(|| default_format(&cli.command)),
    };
    let name = cli.command.name();

    let (params, body) = match &cli.command {
        Command::Antidip(a) => {
            let (a, echo) = resolve(name, a, &config, |a| a.fill_defaults())?;
            (echo, commands::antidip(&a, seed, format)?)
        }
        Command::Fuse(a) => {
            json_only(name, format)?;
            let (a, echo) = resolve(name, a, &config, |a| {
                a.state.fill_defaults();
                a.channel.fill_defaults();
            })?;
            (echo, commands::fuse(&a)?)
        }
        Command::ChiCompose(a) => {
            let (a, echo) = resolve(name, a, &config, |a| {
                a.channel.fill_defaults();
                if a.start.is_some() {
                    a.points.get_or_insert(41);
                }
            })?;
            (echo, commands::chi_compose(&a, format)?)
        }
        Command::TomoState(a) | Command::TomoProcess(a) => {
            json_only(name, format)?;
            let (a, echo) = resolve(name, a, &config, |a| {
                a.n_mc.get_or_insert(photonic_fusion::tomography::DEFAULT_N_MC);
            })?;
            let body = if matches!(cli.command, Command::TomoState(_)) {
                commands::tomo_state(&a, seed)?
            } else {
                commands::tomo_process(&a, seed)?
            };
            (echo, body)
        }
        Command::HigherOrder(a) => {
            json_only(name, format)?;
            let (a, echo) = resolve(name, a, &config, |a| a.fill_defaults())?;
            (echo, commands::higher_order(&a)?)
        }
        Command::Fit(a) => {
            json_only(name, format)?;
            let (a, echo) = resolve(name, a, &config, |a| {
                a.sigma_t.get_or_insert(1.0);
            })?;
            (echo, commands::fit(&a)?)
        }
        Command::Simulate(a) => {
            let (a, echo) = resolve(name, a, &config, |a| {
                a.mode.get_or_insert(args::SimulateMode::State);
                a.trials.get_or_insert(10_000);
                a.duration.get_or_insert(1.0);
                match a.mode {
                    Some(args::SimulateMode::State) => a.state.fill_defaults(),
                    _ => a.channel.fill_defaults(),
                }
            })?;
            (echo, commands::simulate(&a, seed, format)?)
        }
        Command::Pipeline(a) => {
            let (a, _) = resolve(name, a, &config, |_| {})?;
            let resolved = commands::pipeline_config(&a, seed)?;
            let mut echo = serde_json::to_value(&resolved)?;
            if let Value::Object(m) = &mut echo {
                m.remove("seed");
            }
            (echo, commands::pipeline(&a, seed, format)?)
        }
    };

    let echo = json!({"command": name, "seed": seed, "format": format, "params": params});
    let bytes = match body {
        Body::Json(result) => {
            let mut doc = json!({"config": echo, "result": result});
            round_json(&mut doc);
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s.into_bytes()
        }
        Body::Csv(bytes) => {
            let mut e = echo;
            round_json(&mut e);
            eprintln!("# config: {e}");
            bytes
        }
    };
    match out {
        Some(path) => std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
