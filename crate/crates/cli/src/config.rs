//! Run configuration: a single TOML document with embedded defaults per
//! experiment, so `unilearn run --experiment phase_xor` works with no file.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unilearn::activation::Activation;
use unilearn::data::FieldKind;
use unilearn::diffraction::DiffractionGeometry;
use unilearn::linalg::{InitKind, InitScheme};
use unilearn::optim::{OptimizerConfig, TrainMode};

/// Environment variable holding the default parent directory for artifacts.
pub const OUT_DIR_ENV: &str = "UNILEARN_OUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Unparsable {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Xor4,
    PhaseXor,
    Diffractive,
    Mnist,
    Fashion,
    Sweep,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Xor4,
        Experiment::PhaseXor,
        Experiment::Diffractive,
        Experiment::Mnist,
        Experiment::Fashion,
        Experiment::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Xor4 => "xor4",
            Experiment::PhaseXor => "phase_xor",
            Experiment::Diffractive => "diffractive",
            Experiment::Mnist => "mnist",
            Experiment::Fashion => "fashion",
            Experiment::Sweep => "sweep",
        }
    }

    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| {
                ConfigError::Invalid(format!(
                    "unknown experiment {name:?}; expected one of xor4, phase_xor, \
                     diffractive, mnist, fashion, sweep"
                ))
            })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Layer sizes, activations, constraint flags and the init recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Dimensions `[input, hidden…, output]`; layer ℓ maps widths[ℓ] →
    /// widths[ℓ+1].
    pub widths: Vec<usize>,
    /// One descriptor per layer.
    pub activations: Vec<Activation>,
    /// Per-layer unitary flag; constrained layers must be square.
    pub unitary: Vec<bool>,
    pub init: InitScheme,
}

/// IDX file locations for the classification experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdxConfig {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    /// Block-mean factor applied to both image sides.
    pub downsample: Option<usize>,
    /// Keep only the first `limit` samples of each split.
    pub limit: Option<usize>,
}

/// Generator settings for the diffractive experiment and the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffractionDataConfig {
    pub kind: FieldKind,
    pub train_count: usize,
    pub test_count: usize,
    /// Dataset seed; the held-out set uses `seed + 1`.
    pub seed: u64,
    pub n_samples: usize,
    pub aperture: f64,
    pub wavelength: f64,
    /// Propagation distance; omit for the self-imaging sample distance.
    pub distance: Option<f64>,
}

impl DiffractionDataConfig {
    pub fn geometry(&self) -> DiffractionGeometry {
        match self.distance {
            Some(z) => {
                DiffractionGeometry::new(self.n_samples, self.aperture, self.wavelength, z)
            }
            None => DiffractionGeometry::at_sample_distance(
                self.n_samples,
                self.aperture,
                self.wavelength,
            ),
        }
    }
}

/// One point on the sweep's ε axis: a finite negative power, or the ε = 0
/// column written as `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EpsPowerRepr", into = "EpsPowerRepr")]
pub enum EpsPower {
    Finite(f64),
    Infinite,
}

impl EpsPower {
    /// ε = c·10^(−p); the infinite power is exactly zero.
    pub fn epsilon(self, coefficient: f64) -> f64 {
        match self {
            EpsPower::Finite(p) => coefficient * 10f64.powf(-p),
            EpsPower::Infinite => 0.0,
        }
    }

    /// Stable text form used in cell file names and the grid CSV.
    pub fn label(self) -> String {
        match self {
            EpsPower::Finite(p) => format!("{p}"),
            EpsPower::Infinite => "inf".to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EpsPowerRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<EpsPowerRepr> for EpsPower {
    type Error = String;

    fn try_from(repr: EpsPowerRepr) -> Result<Self, Self::Error> {
        match repr {
            EpsPowerRepr::Number(p) if p.is_finite() => Ok(EpsPower::Finite(p)),
            EpsPowerRepr::Number(p) => Err(format!("eps power must be finite, got {p}")),
            EpsPowerRepr::Text(t) if t == "inf" => Ok(EpsPower::Infinite),
            EpsPowerRepr::Text(t) => Err(format!("eps power must be a number or \"inf\", got {t:?}")),
        }
    }
}

impl From<EpsPower> for EpsPowerRepr {
    fn from(p: EpsPower) -> Self {
        match p {
            EpsPower::Finite(v) => EpsPowerRepr::Number(v),
            EpsPower::Infinite => EpsPowerRepr::Text("inf".to_string()),
        }
    }
}

/// Which way the widened pass interval is rotated relative to the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationDirection {
    Clockwise,
    Anticlockwise,
}

impl RotationDirection {
    pub fn sign(self) -> f64 {
        match self {
            RotationDirection::Clockwise => -1.0,
            RotationDirection::Anticlockwise => 1.0,
        }
    }
}

/// Axes and budget for the ε × k convergence mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Coefficient c in ε = c·10^(−p).
    pub eps_coefficient: f64,
    pub eps_powers: Vec<EpsPower>,
    /// Slope powers q; each cell trains with leak k = −10^(−q).
    pub k_powers: Vec<f64>,
    pub direction: RotationDirection,
    /// Epoch cap per cell.
    pub max_epochs: usize,
    /// Parallel cell workers.
    pub workers: usize,
}

/// Everything one invocation needs; `[data]`/`[sweep]` sections apply only
/// to the experiments that read them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Artifact directory; defaults to `$UNILEARN_OUT_DIR/<experiment>` or
    /// `runs/<experiment>`.
    pub out_dir: Option<PathBuf>,
    pub mode: TrainMode,
    pub network: NetworkConfig,
    pub optimizer: OptimizerConfig,
    pub idx: Option<IdxConfig>,
    pub diffraction: Option<DiffractionDataConfig>,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|source| ConfigError::Unparsable {
            path: path.to_path_buf(),
            source: Box::new(source),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn out_dir(&self) -> PathBuf {
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        let base = std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs"));
        base.join(self.experiment.name())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = &self.network;
        if n.widths.len() < 2 {
            return Err(ConfigError::Invalid(
                "network.widths needs an input and at least one layer output".into(),
            ));
        }
        let layers = n.widths.len() - 1;
        if n.activations.len() != layers {
            return Err(ConfigError::Invalid(format!(
                "expected {layers} activations for {} widths, got {}",
                n.widths.len(),
                n.activations.len()
            )));
        }
        if n.unitary.len() != layers {
            return Err(ConfigError::Invalid(format!(
                "expected {layers} unitary flags, got {}",
                n.unitary.len()
            )));
        }
        for (l, &constrained) in n.unitary.iter().enumerate() {
            if constrained && n.widths[l] != n.widths[l + 1] {
                return Err(ConfigError::Invalid(format!(
                    "layer {l} is unitary but maps {} → {}",
                    n.widths[l],
                    n.widths[l + 1]
                )));
            }
        }
        for (l, a) in n.activations.iter().enumerate() {
            // Deserialization bypasses the constructor asserts, so repeat
            // the parameter contracts here with a recoverable error.
            if !(0.0..1.0).contains(&a.rotation_eps) {
                return Err(ConfigError::Invalid(format!(
                    "layer {l}: rotation_eps {} is outside [0, 1)",
                    a.rotation_eps
                )));
            }
            if !a.slope_k.is_finite() {
                return Err(ConfigError::Invalid(format!(
                    "layer {l}: slope_k must be finite"
                )));
            }
        }
        match self.experiment {
            Experiment::Mnist | Experiment::Fashion => {
                if self.idx.is_none() {
                    return Err(ConfigError::Invalid(format!(
                        "experiment {} needs an [idx] section",
                        self.experiment
                    )));
                }
            }
            Experiment::Diffractive => {
                if self.diffraction.is_none() {
                    return Err(ConfigError::Invalid(
                        "experiment diffractive needs a [diffraction] section".into(),
                    ));
                }
            }
            Experiment::Sweep => {
                let sweep = self.sweep.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("experiment sweep needs a [sweep] section".into())
                })?;
                if sweep.eps_powers.is_empty() || sweep.k_powers.is_empty() {
                    return Err(ConfigError::Invalid(
                        "sweep axes must be non-empty".into(),
                    ));
                }
                for p in &sweep.eps_powers {
                    let eps = p.epsilon(sweep.eps_coefficient);
                    if !(0.0..1.0).contains(&eps) {
                        return Err(ConfigError::Invalid(format!(
                            "eps power {} gives ε = {eps}, outside [0, 1)",
                            p.label()
                        )));
                    }
                }
                if self.network.init.kind != InitKind::PureImaginaryUnitary {
                    return Err(ConfigError::Invalid(
                        "the sweep regime requires pure_imaginary_unitary initialization".into(),
                    ));
                }
                if self.diffraction.is_none() {
                    return Err(ConfigError::Invalid(
                        "experiment sweep needs a [diffraction] section".into(),
                    ));
                }
            }
            Experiment::Xor4 | Experiment::PhaseXor => {}
        }
        Ok(())
    }
}

/// The built-in configuration for each experiment; every field is the tuned
/// default the acceptance runs use.
pub fn default_config(experiment: Experiment) -> RunConfig {
    let optimizer = OptimizerConfig::default();
    match experiment {
        Experiment::Xor4 => RunConfig {
            experiment,
            out_dir: None,
            mode: TrainMode::Euclidean,
            network: NetworkConfig {
                widths: vec![4, 4, 4],
                activations: vec![Activation::complex_tanh(), Activation::complex_tanh()],
                unitary: vec![false, false],
                init: InitScheme::new(InitKind::TrabelsiUnitary, 0),
            },
            optimizer: OptimizerConfig {
                euclidean_rate: 0.1,
                epochs: 2000,
                ..optimizer
            },
            idx: None,
            diffraction: None,
            sweep: None,
        },
        Experiment::PhaseXor => RunConfig {
            experiment,
            out_dir: None,
            mode: TrainMode::Unitary,
            network: NetworkConfig {
                widths: vec![4, 4, 4],
                activations: vec![Activation::phase_relu(0.0), Activation::identity()],
                unitary: vec![true, true],
                init: InitScheme::new(InitKind::TrabelsiUnitary, 1),
            },
            optimizer: OptimizerConfig {
                riemannian_rate: 0.02,
                epochs: 5000,
                ..optimizer
            },
            idx: None,
            diffraction: None,
            sweep: None,
        },
        Experiment::Diffractive => RunConfig {
            experiment,
            out_dir: None,
            mode: TrainMode::Unitary,
            network: NetworkConfig {
                widths: vec![128, 128, 128],
                activations: vec![Activation::identity(), Activation::identity()],
                unitary: vec![true, true],
                init: InitScheme::new(InitKind::TrabelsiUnitary, 42),
            },
            optimizer: OptimizerConfig {
                euclidean_rate: 0.0,
                riemannian_rate: 0.5,
                epochs: 30,
                batch_size: 50,
                convergence_threshold: 0.0,
                ..optimizer
            },
            idx: None,
            diffraction: Some(DiffractionDataConfig {
                kind: FieldKind::AmplitudePhase,
                train_count: 2000,
                test_count: 200,
                seed: 99,
                n_samples: 128,
                aperture: 5e-3,
                wavelength: 632.8e-9,
                distance: None,
            }),
            sweep: None,
        },
        Experiment::Mnist | Experiment::Fashion => {
            let dir = PathBuf::from("data").join(experiment.name());
            RunConfig {
                experiment,
                out_dir: None,
                mode: TrainMode::Unitary,
                network: NetworkConfig {
                    widths: vec![196, 196, 10],
                    activations: vec![
                        Activation::complex_tanh(),
                        Activation::complex_sigmoid(),
                    ],
                    unitary: vec![true, false],
                    init: InitScheme::new(InitKind::TrabelsiUnitary, 7),
                },
                optimizer: OptimizerConfig {
                    euclidean_rate: 0.1,
                    riemannian_rate: 0.1,
                    epochs: 30,
                    batch_size: 100,
                    convergence_threshold: 0.0,
                    ..optimizer
                },
                idx: Some(IdxConfig {
                    train_images: dir.join("train-images-idx3-ubyte"),
                    train_labels: dir.join("train-labels-idx1-ubyte"),
                    test_images: dir.join("t10k-images-idx3-ubyte"),
                    test_labels: dir.join("t10k-labels-idx1-ubyte"),
                    downsample: Some(2),
                    limit: None,
                }),
                diffraction: None,
                sweep: None,
            }
        }
        Experiment::Sweep => RunConfig {
            experiment,
            out_dir: None,
            mode: TrainMode::Unitary,
            network: NetworkConfig {
                widths: vec![16, 16, 16],
                // The hidden slope and rotation are overwritten per cell.
                activations: vec![Activation::phase_lrelu(-0.1, 0.11), Activation::identity()],
                unitary: vec![true, true],
                init: InitScheme::new(InitKind::PureImaginaryUnitary, 5),
            },
            optimizer: OptimizerConfig {
                euclidean_rate: 0.0,
                riemannian_rate: 0.2,
                epochs: 2000,
                batch_size: 5,
                ..optimizer
            },
            idx: None,
            diffraction: Some(DiffractionDataConfig {
                kind: FieldKind::AmplitudeOnly,
                train_count: 30,
                test_count: 0,
                seed: 99,
                n_samples: 16,
                aperture: 5e-3,
                wavelength: 632.8e-9,
                distance: None,
            }),
            sweep: Some(SweepConfig {
                eps_coefficient: 1.1,
                eps_powers: vec![
                    EpsPower::Infinite,
                    EpsPower::Finite(1.0),
                    EpsPower::Finite(2.0),
                    EpsPower::Finite(3.0),
                    EpsPower::Finite(4.0),
                ],
                k_powers: vec![1.0, 2.0, 3.0],
                direction: RotationDirection::Anticlockwise,
                max_epochs: 2000,
                workers: 1,
            }),
        },
    }
}
