//! Experiment assembly: dataset loading, seeded network construction, the
//! training call, and the artifact set every run leaves behind
//! (`config.toml`, `curve.csv`, `checkpoint.json`, `metrics.json`, plus
//! `confusion.csv` for labelled tasks).

use thiserror::Error;
use unilearn::data::{
    confusion, gen_diffraction_samples, load_idx, phase_xor_dataset, xor4_dataset, DataError,
    Dataset,
};
use unilearn::linalg::{random_unitary, CMatrix, CVector, InitScheme};
use unilearn::network::{Layer, Network, NetworkError};
use unilearn::optim::{train, TrainReport};

use crate::artifacts::{write_atomic, write_json_checked, ArtifactError, Metrics};
use crate::config::{ConfigError, Experiment, NetworkConfig, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
    #[error("training aborted: {0}")]
    Numeric(String),
}

impl RunError {
    /// Process exit code: 2 config, 3 data, 4 numeric abort, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Data(_) => 3,
            RunError::Numeric(_) => 4,
            RunError::Network(_) | RunError::Artifact(_) => 1,
        }
    }
}

/// Re-seeds a configuration for an independent repetition: the same seed
/// drives both the weight draw and the batch shuffle.
pub fn with_seed(mut cfg: RunConfig, seed: u64) -> RunConfig {
    cfg.network.init.seed = seed;
    cfg.optimizer.seed = seed;
    cfg
}

/// Builds the configured network. Layer ℓ draws from seed
/// `init.seed + 1000·ℓ` so widening or deepening the stack never reuses a
/// stream; unconstrained layers get uniform weights at the 1/√fan_in scale
/// and a zero bias.
pub fn build_network(cfg: &NetworkConfig) -> Network {
    let layers = (0..cfg.widths.len() - 1)
        .map(|l| {
            let n_in = cfg.widths[l];
            let n_out = cfg.widths[l + 1];
            let scheme = InitScheme {
                seed: cfg.init.seed + 1000 * l as u64,
                ..cfg.init
            };
            if cfg.unitary[l] {
                Layer::unitary(random_unitary(n_out, &scheme), cfg.activations[l])
            } else {
                let scale = (1.0 / n_in as f64).sqrt();
                let weight = CMatrix::random_uniform(n_out, n_in, scheme.seed, scale);
                Layer::new(weight, CVector::zeros(n_out), cfg.activations[l])
            }
        })
        .collect();
    Network::new(layers)
}

/// Training split plus the held-out split for experiments that have one.
pub fn load_datasets(cfg: &RunConfig) -> Result<(Dataset, Option<Dataset>), RunError> {
    match cfg.experiment {
        Experiment::Xor4 => Ok((xor4_dataset(), None)),
        Experiment::PhaseXor => Ok((phase_xor_dataset(), None)),
        Experiment::Diffractive | Experiment::Sweep => {
            let d = cfg.diffraction.as_ref().ok_or_else(|| {
                ConfigError::Invalid("missing [diffraction] section".into())
            })?;
            let g = d.geometry();
            let train = gen_diffraction_samples(d.kind, d.train_count, g, d.seed);
            let test = (d.test_count > 0)
                .then(|| gen_diffraction_samples(d.kind, d.test_count, g, d.seed + 1));
            Ok((train, test))
        }
        Experiment::Mnist | Experiment::Fashion => {
            let idx = cfg
                .idx
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid("missing [idx] section".into()))?;
            let train = load_idx(
                &idx.train_images,
                &idx.train_labels,
                idx.limit,
                idx.downsample,
            )?;
            let test = load_idx(
                &idx.test_images,
                &idx.test_labels,
                idx.limit,
                idx.downsample,
            )?;
            Ok((train, Some(test)))
        }
    }
}

/// Relative output energy error `Σ‖y − t‖² / Σ‖t‖²` over a dataset; the
/// ratio of sums stays defined when individual targets are dark.
pub fn mean_energy_error(net: &Network, data: &Dataset) -> Result<f64, NetworkError> {
    let mut errors = 0.0;
    let mut energy = 0.0;
    for s in &data.samples {
        let trace = net.forward(&s.input)?;
        let diff = trace.output() - &s.target;
        errors += diff.norm_sqr();
        energy += s.target.norm_sqr();
    }
    Ok(errors / energy)
}

fn worst_defect(report: &TrainReport) -> f64 {
    report.final_defects.iter().copied().fold(0.0, f64::max)
}

/// Runs one configured experiment end to end and writes its artifacts.
///
/// A numeric abort still writes everything the run produced (partial curve,
/// metrics carrying the abort cause, the checkpoint at the stopping point)
/// before surfacing as [`RunError::Numeric`]. The one exception is a
/// checkpoint whose parameters went non-finite: NaN cannot survive a JSON
/// round trip, so it is skipped and the abort cause in `metrics.json` is the
/// record of what happened.
pub fn run(cfg: &RunConfig) -> Result<Metrics, RunError> {
    cfg.validate()?;
    let out = cfg.out_dir();
    let config_text =
        toml::to_string_pretty(cfg).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    write_atomic(&out.join("config.toml"), config_text.as_bytes())?;

    let (train_set, test_set) = load_datasets(cfg)?;
    let mut net = build_network(&cfg.network);
    check_dimensions(&net, &train_set)?;

    let report = train(&mut net, &train_set, &cfg.optimizer, cfg.mode);
    write_atomic(&out.join("curve.csv"), report.curve_csv().as_bytes())?;

    let mut metrics = Metrics {
        experiment: cfg.experiment.name().to_string(),
        seed: cfg.optimizer.seed,
        epochs_run: report.loss_curve.len(),
        final_loss: report.loss_curve.last().copied(),
        converged: report.converged,
        unitarity_defect: worst_defect(&report),
        test_energy_error: None,
        test_accuracy: None,
        abort: report.abort.clone(),
    };
    if report.abort.is_none() {
        if let Some(test) = &test_set {
            match cfg.experiment {
                Experiment::Mnist | Experiment::Fashion => {
                    let cm = confusion(&net, test)?;
                    metrics.test_accuracy = Some(cm.accuracy());
                    write_atomic(&out.join("confusion.csv"), cm.to_csv().as_bytes())?;
                }
                _ => {
                    metrics.test_energy_error = Some(mean_energy_error(&net, test)?);
                }
            }
        }
    }
    write_json_checked(&out.join("metrics.json"), &metrics)?;
    if net
        .layers
        .iter()
        .all(|l| l.weight.is_finite() && l.bias.is_finite())
    {
        write_json_checked(&out.join("checkpoint.json"), &net)?;
    }

    match report.abort {
        Some(cause) => Err(RunError::Numeric(cause)),
        None => Ok(metrics),
    }
}

/// The config widths must match the data; catching this before training
/// turns a panic into a clean config error.
fn check_dimensions(net: &Network, data: &Dataset) -> Result<(), ConfigError> {
    if net.input_dim() != data.input_dim {
        return Err(ConfigError::Invalid(format!(
            "network expects {}-dim inputs but the dataset provides {}",
            net.input_dim(),
            data.input_dim
        )));
    }
    if net.output_dim() != data.target_dim {
        return Err(ConfigError::Invalid(format!(
            "network produces {}-dim outputs but targets are {}-dim",
            net.output_dim(),
            data.target_dim
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_config;
    use unilearn::linalg::unitarity_defect;

    #[test]
    fn built_networks_match_their_config() {
        let cfg = default_config(Experiment::PhaseXor);
        let net = build_network(&cfg.network);
        assert_eq!(net.layers.len(), 2);
        assert_eq!(net.input_dim(), 4);
        assert_eq!(net.output_dim(), 4);
        for layer in &net.layers {
            assert!(layer.unitary_constrained);
            assert!(unitarity_defect(&layer.weight) < 1e-12);
        }
    }

    #[test]
    fn layer_seeds_differ_between_layers() {
        let cfg = default_config(Experiment::PhaseXor);
        let net = build_network(&cfg.network);
        assert_ne!(net.layers[0].weight, net.layers[1].weight);
    }

    #[test]
    fn reseeding_changes_the_draw_reproducibly() {
        let cfg = default_config(Experiment::PhaseXor);
        let a = build_network(&with_seed(cfg.clone(), 3).network);
        let b = build_network(&with_seed(cfg.clone(), 4).network);
        let a2 = build_network(&with_seed(cfg, 3).network);
        assert_ne!(a.layers[0].weight, b.layers[0].weight);
        assert_eq!(a.layers[0].weight, a2.layers[0].weight);
    }

    #[test]
    fn unconstrained_layers_scale_with_fan_in() {
        let cfg = default_config(Experiment::Mnist);
        let net = build_network(&cfg.network);
        let readout = &net.layers[1];
        assert!(!readout.unitary_constrained);
        let bound = (1.0 / 196f64).sqrt() + 1e-12;
        for v in &readout.weight.data {
            assert!(v.re.abs() <= bound && v.im.abs() <= bound);
        }
    }

    #[test]
    fn energy_error_is_zero_on_a_perfect_net() {
        let data = xor4_dataset();
        let cfg = default_config(Experiment::Xor4);
        let net = build_network(&cfg.network);
        let err = mean_energy_error(&net, &data).unwrap();
        assert!(err.is_finite() && err > 0.0);
        // An identity target task solved by an identity map has zero error.
        let id_net = Network::new(vec![Layer::new(
            CMatrix::identity(4),
            CVector::zeros(4),
            unilearn::activation::Activation::identity(),
        )]);
        let id_data = Dataset::new(
            unilearn::data::DatasetKind::Diffractive,
            data.samples
                .iter()
                .map(|s| unilearn::data::Sample {
                    input: s.input.clone(),
                    target: s.input.clone(),
                    label: None,
                })
                .collect(),
        );
        assert_eq!(mean_energy_error(&id_net, &id_data).unwrap(), 0.0);
    }

    #[test]
    fn xor4_run_emits_artifacts_and_converges() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = default_config(Experiment::Xor4);
        cfg.out_dir = Some(dir.path().to_path_buf());
        cfg.optimizer.epochs = 500;
        let metrics = run(&cfg).unwrap();
        assert!(metrics.final_loss.unwrap() < 0.1);
        for name in ["config.toml", "curve.csv", "checkpoint.json", "metrics.json"] {
            assert!(dir.path().join(name).is_file(), "{name} missing");
        }
        let net: Network = serde_json::from_slice(
            &std::fs::read(dir.path().join("checkpoint.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(net.input_dim(), 4);
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = default_config(Experiment::Xor4);
        cfg.out_dir = Some(dir.path().to_path_buf());
        cfg.network.widths = vec![6, 6, 6];
        cfg.network.init = InitScheme {
            seed: 1,
            ..cfg.network.init
        };
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
