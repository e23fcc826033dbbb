use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use engram_lab::config::{load_raw, resolve};
use engram_lab::error::{HarnessError, Result};
use engram_lab::experiments::{ExperimentKind, RunContext};
use engram_lab::index_check::check_index_completeness;
use engram_lab::manifest::{write_atomic, ResultManifest};
use engram_lab::plots::emit_plot_data;
use engram_lab::runner::{trial_seeds, worker_count};

#[derive(Parser)]
#[command(
    name = "engram-lab",
    about = "Deterministic experiment runner for the engram laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and write outputs + manifest.
    Run { config: PathBuf },
    /// List the experiment registry.
    List,
    /// Validate a config file without running anything.
    Validate { config: PathBuf },
    /// Reshape a finished run's outputs into long-format plot data.
    EmitPlots { manifest: PathBuf },
    /// Verify the operation index against the built-in registry.
    CheckIndex { index: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::List => {
            for k in ExperimentKind::ALL {
                println!("{:<20} {}", k.name(), k.summary());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let resolved = resolve(&load_raw(&config)?)?;
            println!(
                "ok: {} ({} trial{})",
                resolved.experiment,
                resolved.trials,
                if resolved.trials == 1 { "" } else { "s" }
            );
            Ok(())
        }
        Command::Run { config } => {
            let resolved = resolve(&load_raw(&config)?)?;
            let kind = ExperimentKind::from_name(&resolved.experiment)
                .expect("validated name");
            std::fs::create_dir_all(&resolved.output_dir)?;
            let workers = worker_count(resolved.trials)?;
            let started = Instant::now();
            let ctx = RunContext {
                seed: resolved.seed,
                trials: resolved.trials,
                out_dir: &resolved.output_dir,
                workers,
            };
            let outputs = kind.run(&ctx, &resolved.params)?;
            let manifest = ResultManifest {
                experiment: resolved.experiment.clone(),
                artifact_version: engram_lab::ARTIFACT_VERSION.to_string(),
                trial_seeds: trial_seeds(resolved.seed, resolved.trials),
                outputs,
                duration_seconds: started.elapsed().as_secs_f64(),
                config: resolved,
            };
            let path = write_atomic(&manifest.config.output_dir, &manifest)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::EmitPlots { manifest } => {
            let path = emit_plot_data(&manifest)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::CheckIndex { index } => {
            let report = check_index_completeness(&index)?;
            if report.is_complete() {
                println!("index complete");
                Ok(())
            } else {
                Err(HarnessError::Runtime(report.describe()))
            }
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's own exit codes don't match ours; print and map to 2.
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
