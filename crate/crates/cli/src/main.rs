use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use unilearn_cli::config::{default_config, Experiment, RunConfig};
use unilearn_cli::experiments::{run, with_seed, RunError};
use unilearn_cli::modulations::{emit, parse_geometry};
use unilearn_cli::sweep::run_sweep;

#[derive(Parser)]
#[command(
    name = "unilearn",
    version,
    about = "Train complex-valued networks on the unitary group and map them to optical masks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one experiment and write curve, checkpoint and metrics.
    Run {
        /// Built-in experiment: xor4, phase_xor, diffractive, mnist, fashion.
        #[arg(long, conflicts_with = "config")]
        experiment: Option<String>,
        /// TOML config file replacing the built-in defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed for both the weight draw and the batch shuffle.
        #[arg(long)]
        seed: Option<u64>,
        /// Artifact directory (overrides the config and UNILEARN_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run or resume the ε × k convergence mesh.
    Sweep {
        /// TOML config file replacing the built-in sweep defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed for both the weight draw and the batch shuffle.
        #[arg(long)]
        seed: Option<u64>,
        /// Artifact directory (overrides the config and UNILEARN_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract per-layer optical modulation masks from a checkpoint.
    EmitModulations {
        /// Path to a checkpoint.json written by `run`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Geometry string: n=128,aperture=5e-3,wavelength=632.8e-9[,distance=...].
        #[arg(long)]
        geometry: String,
        /// Output path; defaults to modulations.json beside the checkpoint.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(
    experiment: Option<String>,
    config: Option<PathBuf>,
    fallback: Option<Experiment>,
) -> Result<RunConfig, RunError> {
    if let Some(path) = config {
        return Ok(RunConfig::load(&path)?);
    }
    if let Some(name) = experiment {
        return Ok(default_config(Experiment::parse(&name)?));
    }
    match fallback {
        Some(e) => Ok(default_config(e)),
        None => Err(unilearn_cli::config::ConfigError::Invalid(
            "pass --experiment <name> or --config <file>".into(),
        )
        .into()),
    }
}

fn apply_overrides(mut cfg: RunConfig, seed: Option<u64>, out: Option<PathBuf>) -> RunConfig {
    if let Some(s) = seed {
        cfg = with_seed(cfg, s);
    }
    if let Some(dir) = out {
        cfg.out_dir = Some(dir);
    }
    cfg
}

fn dispatch(command: Command) -> Result<(), RunError> {
    match command {
        Command::Run {
            experiment,
            config,
            seed,
            out,
        } => {
            let cfg = apply_overrides(load_config(experiment, config, None)?, seed, out);
            if cfg.experiment == Experiment::Sweep {
                return Err(unilearn_cli::config::ConfigError::Invalid(
                    "the sweep experiment runs through the `sweep` subcommand".into(),
                )
                .into());
            }
            let metrics = run(&cfg)?;
            println!(
                "{}: {} epochs, final loss {}, converged {}",
                metrics.experiment,
                metrics.epochs_run,
                metrics
                    .final_loss
                    .map_or("-".to_string(), |l| l.to_string()),
                metrics.converged
            );
            if let Some(err) = metrics.test_energy_error {
                println!("test energy error: {err}");
            }
            if let Some(acc) = metrics.test_accuracy {
                println!("test accuracy: {acc}");
            }
            println!("artifacts: {}", cfg.out_dir().display());
            Ok(())
        }
        Command::Sweep { config, seed, out } => {
            let cfg = apply_overrides(
                load_config(None, config, Some(Experiment::Sweep))?,
                seed,
                out,
            );
            let summary = run_sweep(&cfg)?;
            for cell in &summary.cells {
                println!(
                    "eps_power={} k={} converged={} epochs={}",
                    cell.eps_power, cell.k, cell.converged, cell.epochs_run
                );
            }
            println!(
                "{}/{} cells converged; grid: {}",
                summary.converged_count(),
                summary.cells.len(),
                summary.grid_path.display()
            );
            Ok(())
        }
        Command::EmitModulations {
            checkpoint,
            geometry,
            out,
        } => {
            let g = parse_geometry(&geometry)?;
            let out_path = out.unwrap_or_else(|| {
                checkpoint
                    .parent()
                    .unwrap_or_else(|| std::path::Path::new("."))
                    .join("modulations.json")
            });
            let stack = emit(&checkpoint, g, &out_path)?;
            println!(
                "{} masks, max residual {}: {}",
                stack.layers.len(),
                stack.max_residual,
                out_path.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
