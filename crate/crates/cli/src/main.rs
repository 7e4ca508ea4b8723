use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use noma_v2x_core::experiments::{run_scenario, run_sweep, DEFAULT_SEEDS};
use noma_v2x_core::output::{emit_csv, emit_plot};
use noma_v2x_core::{Method, ScenarioConfig, SweepParam, SweepSpec};

/// Drone-assisted NOMA V2X downlink simulator.
#[derive(Debug, Parser)]
#[command(name = "noma-v2x", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and print a JSON summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed stored in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep one parameter and write the averaged efficiency as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: SweepParam,
        /// Comma separated, strictly increasing.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = DEFAULT_SEEDS)]
        seeds: usize,
        #[arg(long, default_value_t = Method::Proposed)]
        baseline: Method,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_plot: Option<PathBuf>,
    },
}

fn load_config(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    ScenarioConfig::from_json(&text).with_context(|| format!("config {}", path.display()))
}

fn parse_values(list: &str) -> anyhow::Result<Vec<f64>> {
    let values = list
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<f64>()
                .with_context(|| format!("bad sweep value {item:?}"))
        })
        .collect::<anyhow::Result<Vec<f64>>>()?;
    if values.is_empty() {
        bail!("no sweep values given");
    }
    Ok(values)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { config, seed } => {
            let config = load_config(&config)?;
            let seed = seed.unwrap_or(config.seed);
            let outcome = run_scenario(&config, seed)?;
            println!("{}", serde_json::to_string_pretty(&outcome)?);
        }
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            baseline,
            out_csv,
            out_plot,
        } => {
            let spec = SweepSpec {
                parameter: param,
                values: parse_values(&values)?,
                seeds,
                base_config: load_config(&config)?,
                baseline,
            };
            let result = run_sweep(&spec)?;
            emit_csv(&result, &out_csv)
                .with_context(|| format!("cannot write {}", out_csv.display()))?;
            if let Some(plot) = out_plot {
                emit_plot(std::slice::from_ref(&result), &plot)
                    .with_context(|| format!("cannot write {}", plot.display()))?;
            }
        }
    }
    Ok(())
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if err.use_stderr() => {
            let rendered = err.to_string();
            let head = rendered.split("\n\n").next().unwrap_or("invalid arguments");
            eprintln!("{}", one_line(head));
            return ExitCode::from(2);
        }
        Err(err) => err.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", one_line(&format!("{err:#}")));
            ExitCode::FAILURE
        }
    }
}
