//! The ε × k convergence mesh: one short training run per grid cell with a
//! leaky phase activation, resumable through per-cell JSON files and
//! summarized in a single `grid.csv`.
//!
//! The interval-rotation direction is realized on the data side: rotating
//! the pass interval rigidly by an angle is the same computation as
//! counter-rotating every input and target phase by it, and the latter
//! leaves the activation's symmetric-interval contract untouched. At ε = 0
//! the rotation margin vanishes, the data sits exactly on the interval
//! endpoints, and cells abort on the boundary diagnostic — they report as
//! non-converged, which is the expected shape of that grid column.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unilearn::activation::Activation;
use unilearn::data::{Dataset, Sample};
use unilearn::optim::{convergence_indicator, train};

use crate::artifacts::{write_atomic, write_json_checked};
use crate::config::{ConfigError, EpsPower, RunConfig, SweepConfig};
use crate::experiments::{build_network, load_datasets, RunError};

/// Outcome of one grid cell; the JSON form of this struct is the cell's
/// resume marker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    /// ε axis label (`"inf"` for the ε = 0 column).
    pub eps_power: String,
    /// Slope power q with k = −10^(−q).
    pub k_power: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub k: f64,
    pub converged: bool,
    pub epochs_run: usize,
    pub final_loss: Option<f64>,
    pub abort: Option<String>,
}

/// What `run_sweep` reports back to the caller.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub cells: Vec<CellResult>,
    pub grid_path: PathBuf,
}

impl SweepSummary {
    pub fn converged_count(&self) -> usize {
        self.cells.iter().filter(|c| c.converged).count()
    }
}

/// Phase-rotates every input and target by `angle`; propagation targets
/// stay consistent because free-space propagation is linear.
pub fn rotate_dataset(data: &Dataset, angle: f64) -> Dataset {
    let phase = Complex64::from_polar(1.0, angle);
    let samples = data
        .samples
        .iter()
        .map(|s| Sample {
            input: s.input.scale(phase),
            target: s.target.scale(phase),
            label: s.label,
        })
        .collect();
    Dataset::new(data.kind, samples)
}

/// Margin the widened interval `(−π/(2−ε), π/(2−ε))` gains over `π/2` on
/// each side; the data rotation uses half of it.
pub fn rotation_margin(eps: f64) -> f64 {
    PI / (2.0 - eps) - PI / 2.0
}

fn cell_path(cells_dir: &Path, eps: EpsPower, k_power: f64, seed: u64) -> PathBuf {
    cells_dir.join(format!("eps_{}__k_{}__s_{}.json", eps.label(), k_power, seed))
}

fn run_cell(
    cfg: &RunConfig,
    sweep: &SweepConfig,
    data: &Dataset,
    eps_power: EpsPower,
    k_power: f64,
    cells_dir: &Path,
) -> Result<CellResult, RunError> {
    let seed = cfg.optimizer.seed;
    let path = cell_path(cells_dir, eps_power, k_power, seed);
    if let Ok(bytes) = std::fs::read(&path) {
        if let Ok(cell) = serde_json::from_slice::<CellResult>(&bytes) {
            return Ok(cell);
        }
        // An unreadable marker (interrupted write, older schema) is simply
        // recomputed and replaced.
    }

    let epsilon = eps_power.epsilon(sweep.eps_coefficient);
    let k = -(10f64.powf(-k_power));
    let mut cell_cfg = cfg.clone();
    let last = cell_cfg.network.activations.len() - 1;
    for a in &mut cell_cfg.network.activations[..last] {
        *a = Activation::phase_lrelu(k, epsilon);
    }
    cell_cfg.optimizer.epochs = sweep.max_epochs;

    let rotated = rotate_dataset(data, sweep.direction.sign() * rotation_margin(epsilon) / 2.0);
    let mut net = build_network(&cell_cfg.network);
    let report = train(&mut net, &rotated, &cell_cfg.optimizer, cell_cfg.mode);

    let cell = CellResult {
        eps_power: eps_power.label(),
        k_power,
        seed,
        epsilon,
        k,
        converged: convergence_indicator(&report),
        epochs_run: report.loss_curve.len(),
        final_loss: report.loss_curve.last().copied(),
        abort: report.abort,
    };
    write_json_checked(&path, &cell)?;
    Ok(cell)
}

/// Renders the mesh as CSV in configured axis order.
pub fn grid_csv(cells: &[CellResult]) -> String {
    let mut out = String::from("eps_power,k,converged,final_loss,epochs\n");
    for c in cells {
        let loss = match c.final_loss {
            Some(l) => l.to_string(),
            None => "nan".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.eps_power, c.k, c.converged, loss, c.epochs_run
        ));
    }
    out
}

/// Runs (or resumes) every cell of the configured mesh and writes
/// `grid.csv`. A numeric abort inside a cell marks that cell non-converged
/// and the sweep continues; only infrastructure failures stop it.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepSummary, RunError> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("missing [sweep] section".into()))?;
    if sweep.workers == 0 {
        return Err(ConfigError::Invalid("sweep.workers must be at least 1".into()).into());
    }
    let out = cfg.out_dir();
    let cells_dir = out.join("cells");
    let config_text =
        toml::to_string_pretty(cfg).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    write_atomic(&out.join("config.toml"), config_text.as_bytes())?;

    let (data, _) = load_datasets(cfg)?;
    let jobs: Vec<(EpsPower, f64)> = sweep
        .eps_powers
        .iter()
        .flat_map(|&p| sweep.k_powers.iter().map(move |&q| (p, q)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep.workers)
        .build()
        .map_err(|e| ConfigError::Invalid(format!("cannot start {} workers: {e}", sweep.workers)))?;
    let results: Vec<Result<CellResult, RunError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, q)| run_cell(cfg, sweep, &data, p, q, &cells_dir))
            .collect()
    });
    let cells = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let grid_path = out.join("grid.csv");
    write_atomic(&grid_path, grid_csv(&cells).as_bytes())?;
    Ok(SweepSummary { cells, grid_path })
}
