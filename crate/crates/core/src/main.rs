use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use floquet_lab::cli::{self, presets, ScenarioConfig};
use floquet_lab::models::VARIANTS;

#[derive(Parser)]
#[command(name = "floquet-lab", version, about = "Floquet and orbit-recurrence diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario file (JSON).
    config: Option<PathBuf>,
    /// Built-in scenario instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report and artifacts.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory; defaults to the scenario's `output_dir` or `.`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario without running it.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// List model variants and their parameters.
    ListModels,
    /// List built-in scenarios.
    ListPresets,
}

fn load(source: &Source) -> Result<ScenarioConfig> {
    Ok(match (&source.config, &source.preset) {
        (Some(path), None) => cli::load_config(path)?,
        (None, Some(name)) => presets::preset(name)?,
        _ => bail!("give a scenario file or --preset NAME"),
    })
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FLOQUET_LAB_THREADS") {
        let n: usize = v.parse().with_context(|| format!("FLOQUET_LAB_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.command {
        Command::Run { source, out } => {
            let config = load(&source)?;
            let dir = out.or_else(|| config.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| ".".into());
            let outcome = cli::run_scenario(&config)?;
            outcome.write(&dir).with_context(|| format!("writing results to {}", dir.display()))?;
            for e in &outcome.report.entries {
                match (&e.verdict, &e.error) {
                    (_, Some(err)) => eprintln!("[{}] {}: error: {err}", e.index, e.kind),
                    (Some(v), None) => println!("[{}] {}: {v}", e.index, e.kind),
                    (None, None) => println!("[{}] {}: ok", e.index, e.kind),
                }
            }
            println!("report: {}", dir.join(outcome.report_name()).display());
            Ok(if outcome.report.failed() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Validate { source } => {
            load(&source)?;
            println!("ok");
            Ok(ExitCode::SUCCESS)
        }
        Command::ListModels => {
            for (name, params) in VARIANTS {
                println!("{name}: {params}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListPresets => {
            for name in presets::PRESETS {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
