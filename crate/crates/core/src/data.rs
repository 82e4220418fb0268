//! Training data: the two fixed logic tasks, randomized diffraction pairs,
//! IDX-format image loading, and classification metrics.
//!
//! Every dataset is an ordered list of `(input, target)` complex-vector
//! pairs; classification datasets additionally carry integer labels and use
//! 10-dim one-hot targets. Generated datasets are bit-reproducible from
//! their seed, with per-sample RNG streams so generation order (or
//! parallelism) cannot change the result.

use crate::diffraction::{build_operator, DiffractionGeometry};
use crate::linalg::CVector;
use crate::network::{Network, NetworkError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

/// IDX magic for unsigned-byte 3D tensors (image files).
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
/// IDX magic for unsigned-byte 1D tensors (label files).
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
/// Number of classes in the supported classification tasks.
pub const NUM_CLASSES: usize = 10;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: bad magic {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        path: String,
        expected: u32,
        found: u32,
    },
    #[error("{path}: truncated, needed {needed} bytes but found {found}")]
    TruncatedFile {
        path: String,
        needed: usize,
        found: usize,
    },
    #[error("image file holds {images} items but label file holds {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("sample {index} carries no label")]
    UnlabeledSample { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// One training pair; `label` is set only on classification datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SampleRepr", into = "SampleRepr")]
pub struct Sample {
    pub input: CVector,
    pub target: CVector,
    pub label: Option<usize>,
}

/// JSON shape of a sample: plain `(re, im)` pair lists.
#[derive(Serialize, Deserialize)]
struct SampleRepr {
    input: Vec<(f64, f64)>,
    target: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
}

fn to_pairs(v: &CVector) -> Vec<(f64, f64)> {
    v.data.iter().map(|c| (c.re, c.im)).collect()
}

fn from_pairs(pairs: &[(f64, f64)]) -> CVector {
    CVector::new(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
}

impl From<Sample> for SampleRepr {
    fn from(s: Sample) -> Self {
        SampleRepr {
            input: to_pairs(&s.input),
            target: to_pairs(&s.target),
            label: s.label,
        }
    }
}

impl From<SampleRepr> for Sample {
    fn from(r: SampleRepr) -> Self {
        Sample {
            input: from_pairs(&r.input),
            target: from_pairs(&r.target),
            label: r.label,
        }
    }
}

/// What a dataset contains; determines how harness code interprets it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    PhaseXor,
    Xor4,
    Diffractive,
    Classification,
}

/// An ordered, dimension-consistent collection of samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    pub kind: DatasetKind,
    pub samples: Vec<Sample>,
    pub input_dim: usize,
    pub target_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    kind: DatasetKind,
    samples: Vec<Sample>,
}

impl From<Dataset> for DatasetRepr {
    fn from(d: Dataset) -> Self {
        DatasetRepr {
            kind: d.kind,
            samples: d.samples,
        }
    }
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = String;

    fn try_from(r: DatasetRepr) -> Result<Self, String> {
        if r.samples.is_empty() {
            return Err("dataset holds no samples".into());
        }
        let input_dim = r.samples[0].input.dim();
        let target_dim = r.samples[0].target.dim();
        if r.samples
            .iter()
            .any(|s| s.input.dim() != input_dim || s.target.dim() != target_dim)
        {
            return Err("samples disagree on dimensions".into());
        }
        Ok(Dataset {
            kind: r.kind,
            samples: r.samples,
            input_dim,
            target_dim,
        })
    }
}

impl Dataset {
    pub fn new(kind: DatasetKind, samples: Vec<Sample>) -> Self {
        DatasetRepr { kind, samples }
            .try_into()
            .expect("dataset samples must be non-empty and dimension-consistent")
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// The two-sample phase-XOR task. Inputs have modulus 2 and targets
/// modulus 1; the target phase of each component is the XOR-style sum of the
/// two input phases folded into a turn.
pub fn phase_xor_dataset() -> Dataset {
    let amp2 = [2.0; 4];
    let amp1 = [1.0; 4];
    let s1 = Sample {
        input: CVector::from_polar(&amp2, &[PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0]),
        target: CVector::from_polar(&amp1, &[0.0, PI / 2.0, PI, 3.0 * PI / 2.0]),
        label: None,
    };
    let s2 = Sample {
        input: CVector::from_polar(&amp2, &[PI / 3.0, 5.0 * PI / 6.0, 8.0 * PI / 6.0, 11.0 * PI / 6.0]),
        target: CVector::from_polar(&amp1, &[PI / 6.0, 4.0 * PI / 6.0, 7.0 * PI / 6.0, 10.0 * PI / 6.0]),
        label: None,
    };
    Dataset::new(DatasetKind::PhaseXor, vec![s1, s2])
}

/// The 4×4 XOR logic task: inputs replicate the two-bit pattern
/// `[b₁, b₂, b₁, b₂]`, targets replicate the parity `b₁ ⊕ b₂` across all
/// four components. Entirely real-valued.
pub fn xor4_dataset() -> Dataset {
    let samples = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)]
        .iter()
        .map(|&(b1, b2)| {
            let x = (b1 ^ b2) as f64;
            Sample {
                input: CVector::from_real(&[b1 as f64, b2 as f64, b1 as f64, b2 as f64]),
                target: CVector::from_real(&[x; 4]),
                label: None,
            }
        })
        .collect();
    Dataset::new(DatasetKind::Xor4, samples)
}

/// Field content of generated diffraction samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Random real amplitude inside the aperture, zero phase.
    AmplitudeOnly,
    /// Unit amplitude inside the aperture, random phase.
    PhaseOnly,
    /// Random amplitude and random phase.
    AmplitudePhase,
}

/// Random rectangular-aperture fields paired with their propagated
/// counterparts. Aperture width is uniform in `[N/8, N/2]` samples at a
/// uniform in-bounds position; each pixel inside the aperture draws its own
/// amplitude uniform in `[0.5, 1]` and phase uniform in `(−π, π]`. Per-pixel
/// draws keep the ensemble covariance near-diagonal, which training needs;
/// a single shared phase would cancel out of every covariance entry and
/// leave a badly conditioned long-range kernel. Sample `i` draws from RNG
/// stream `i` of `seed`, so the dataset is reproducible and
/// order-independent.
pub fn gen_diffraction_samples(
    kind: FieldKind,
    count: usize,
    g: DiffractionGeometry,
    seed: u64,
) -> Dataset {
    assert!(count >= 1, "need at least one sample");
    let op = build_operator(g);
    let n = g.n_samples;
    let samples = (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            // Draw all aperture parameters regardless of kind so the three
            // kinds share geometry for a given (seed, index).
            let width = rng.gen_range(n / 8..=n / 2);
            let start = rng.gen_range(0..=n - width);
            let mut input = CVector::zeros(n);
            for j in start..start + width {
                let amplitude = rng.gen_range(0.5..=1.0);
                let phase = PI - 2.0 * PI * rng.gen::<f64>();
                let (amp, ph) = match kind {
                    FieldKind::AmplitudeOnly => (amplitude, 0.0),
                    FieldKind::PhaseOnly => (1.0, phase),
                    FieldKind::AmplitudePhase => (amplitude, phase),
                };
                input[j] = Complex64::from_polar(amp, ph);
            }
            let target = op
                .propagate(&input)
                .expect("generated fields match the operator dimension");
            Sample {
                input,
                target,
                label: None,
            }
        })
        .collect();
    Dataset::new(DatasetKind::Diffractive, samples)
}

fn read_u32_be(bytes: &[u8], offset: usize) -> u32 {
    u32::from_be_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

fn check_len(path: &Path, bytes: &[u8], needed: usize) -> Result<(), DataError> {
    if bytes.len() < needed {
        return Err(DataError::TruncatedFile {
            path: path.display().to_string(),
            needed,
            found: bytes.len(),
        });
    }
    Ok(())
}

/// Loads an IDX image/label file pair into a classification dataset.
///
/// Pixels scale to `[0, 1]` real values, flattened row-major; targets are
/// 10-dim one-hot vectors and `label` carries the class index. `limit`
/// truncates to the first samples in file order; `downsample` block-averages
/// `f×f` pixel tiles (the factor must divide both image sides).
pub fn load_idx(
    images_path: &Path,
    labels_path: &Path,
    limit: Option<usize>,
    downsample: Option<usize>,
) -> Result<Dataset, DataError> {
    let images = std::fs::read(images_path)?;
    let labels = std::fs::read(labels_path)?;

    check_len(images_path, &images, 16)?;
    let magic = read_u32_be(&images, 0);
    if magic != IDX_IMAGES_MAGIC {
        return Err(DataError::BadMagic {
            path: images_path.display().to_string(),
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let image_count = read_u32_be(&images, 4) as usize;
    let rows = read_u32_be(&images, 8) as usize;
    let cols = read_u32_be(&images, 12) as usize;
    check_len(images_path, &images, 16 + image_count * rows * cols)?;

    check_len(labels_path, &labels, 8)?;
    let magic = read_u32_be(&labels, 0);
    if magic != IDX_LABELS_MAGIC {
        return Err(DataError::BadMagic {
            path: labels_path.display().to_string(),
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let label_count = read_u32_be(&labels, 4) as usize;
    check_len(labels_path, &labels, 8 + label_count)?;

    if image_count != label_count {
        return Err(DataError::CountMismatch {
            images: image_count,
            labels: label_count,
        });
    }

    let factor = downsample.unwrap_or(1);
    assert!(
        factor >= 1 && rows % factor == 0 && cols % factor == 0,
        "downsample factor must divide the image sides"
    );
    let (out_rows, out_cols) = (rows / factor, cols / factor);

    let count = limit.unwrap_or(image_count).min(image_count);
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let at = |r: usize, c: usize| images[16 + (i * rows + r) * cols + c] as f64 / 255.0;
        let mut pixels = Vec::with_capacity(out_rows * out_cols);
        for br in 0..out_rows {
            for bc in 0..out_cols {
                let mut sum = 0.0;
                for r in 0..factor {
                    for c in 0..factor {
                        sum += at(br * factor + r, bc * factor + c);
                    }
                }
                pixels.push(sum / (factor * factor) as f64);
            }
        }
        let label = labels[8 + i] as usize;
        assert!(label < NUM_CLASSES, "label {label} out of range");
        let mut one_hot = [0.0; NUM_CLASSES];
        one_hot[label] = 1.0;
        samples.push(Sample {
            input: CVector::from_real(&pixels),
            target: CVector::from_real(&one_hot),
            label: Some(label),
        });
    }
    Ok(Dataset::new(DatasetKind::Classification, samples))
}

/// Predicted class of one sample: argmax of output intensity `|x_i|²`, so
/// the readout is phase-blind. Exact ties resolve to the lowest index.
pub fn classify(net: &Network, sample: &Sample) -> Result<usize, NetworkError> {
    let trace = net.forward(&sample.input)?;
    let mut best = 0;
    let mut best_intensity = f64::NEG_INFINITY;
    for (i, v) in trace.output().data.iter().enumerate() {
        let intensity = v.norm_sqr();
        if intensity > best_intensity {
            best_intensity = intensity;
            best = i;
        }
    }
    Ok(best)
}

/// Class-versus-class prediction counts; rows index the true class, columns
/// the predicted class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        assert!(classes >= 1);
        ConfusionMatrix {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, true_class: usize, predicted: usize) {
        self.counts[true_class][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Overall accuracy: trace over total count.
    pub fn accuracy(&self) -> f64 {
        let correct: u64 = (0..self.classes()).map(|k| self.counts[k][k]).sum();
        correct as f64 / self.total() as f64
    }

    /// Row-normalized rates; rows with no samples normalize to zeros.
    pub fn row_rates(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let sum: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if sum == 0 { 0.0 } else { c as f64 / sum as f64 })
                    .collect()
            })
            .collect()
    }

    /// Count rows as CSV lines, one true class per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.counts {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Evaluates `net` over every labeled sample and tallies the confusion
/// counts; the matrix size is the network output dimension.
pub fn confusion(net: &Network, data: &Dataset) -> Result<ConfusionMatrix, DataError> {
    let mut matrix = ConfusionMatrix::new(net.output_dim());
    for (index, sample) in data.samples.iter().enumerate() {
        let label = sample.label.ok_or(DataError::UnlabeledSample { index })?;
        let predicted = classify(net, sample)?;
        matrix.record(label, predicted);
    }
    Ok(matrix)
}
