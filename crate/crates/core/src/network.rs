//! Multilayer complex-valued networks: the forward pass with full trace
//! capture, square-error loss, and two backpropagation routes.
//!
//! The forward rule per layer is `z_ℓ = W_ℓ·x_{ℓ−1} + b_ℓ`, `x_ℓ = f(z_ℓ)`.
//! The compatible backward route works for any activation satisfying
//! `f(z*) = [f(z)]*`:
//!
//! `δ_L = (x_L − t) ⊙ f'(z*_L)`,
//! `δ_ℓ = W^H_{ℓ+1}·δ_{ℓ+1} ⊙ f'(z*_ℓ)`,
//! `ΔW_ℓ = δ_ℓ·x^H_{ℓ−1}`,  `Δb_ℓ = δ_ℓ`.
//!
//! The holomorphic route swaps the elementwise factor for `[f'_h(z_ℓ)]*`
//! using the analytic derivative; it agrees with the compatible route on the
//! activations that support it. Gradients carry no learning rate — step
//! sizes belong to the optimizer.
//!
//! # Checkpoint format
//!
//! [`Network`] serializes to JSON with one object per layer: `rows`, `cols`,
//! row-major `weight_re`/`weight_im`, `bias_re`/`bias_im`, the activation
//! descriptor, and the `unitary_constrained` flag. No binary payloads, so
//! checkpoints diff cleanly and survive text transports.

use crate::activation::{Activation, ActivationError};
use crate::linalg::{CMatrix, CVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("layer {layer} expects input dimension {expected}, got {got}")]
    DimensionMismatch {
        layer: usize,
        expected: usize,
        got: usize,
    },
    #[error("target has dimension {got}, network output has {expected}")]
    TargetDimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Activation(#[from] ActivationError),
}

/// One affine-plus-activation layer `x ↦ f(W·x + b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayerRepr", into = "LayerRepr")]
pub struct Layer {
    pub weight: CMatrix,
    pub bias: CVector,
    pub activation: Activation,
    /// Marks the weight as living on the unitary manifold; the optimizer
    /// keeps it there with Riemannian steps instead of Euclidean ones.
    pub unitary_constrained: bool,
}

impl Layer {
    /// Unconstrained layer with a trainable bias.
    pub fn new(weight: CMatrix, bias: CVector, activation: Activation) -> Self {
        assert_eq!(
            bias.dim(),
            weight.rows,
            "bias dimension must match weight rows"
        );
        Self {
            weight,
            bias,
            activation,
            unitary_constrained: false,
        }
    }

    /// Unitary-constrained layer; the bias starts at zero (only the weight
    /// is pinned to the manifold — optimizers may still train the bias).
    pub fn unitary(weight: CMatrix, activation: Activation) -> Self {
        assert!(weight.is_square(), "unitary layers need square weights");
        let bias = CVector::zeros(weight.rows);
        Self {
            weight,
            bias,
            activation,
            unitary_constrained: true,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows
    }
}

/// JSON shape of one layer inside a checkpoint.
#[derive(Serialize, Deserialize)]
struct LayerRepr {
    rows: usize,
    cols: usize,
    weight_re: Vec<f64>,
    weight_im: Vec<f64>,
    bias_re: Vec<f64>,
    bias_im: Vec<f64>,
    activation: Activation,
    unitary_constrained: bool,
}

impl From<Layer> for LayerRepr {
    fn from(layer: Layer) -> Self {
        LayerRepr {
            rows: layer.weight.rows,
            cols: layer.weight.cols,
            weight_re: layer.weight.data.iter().map(|c| c.re).collect(),
            weight_im: layer.weight.data.iter().map(|c| c.im).collect(),
            bias_re: layer.bias.data.iter().map(|c| c.re).collect(),
            bias_im: layer.bias.data.iter().map(|c| c.im).collect(),
            activation: layer.activation,
            unitary_constrained: layer.unitary_constrained,
        }
    }
}

impl TryFrom<LayerRepr> for Layer {
    type Error = String;

    fn try_from(repr: LayerRepr) -> Result<Self, String> {
        let n = repr.rows * repr.cols;
        if repr.weight_re.len() != n || repr.weight_im.len() != n {
            return Err(format!(
                "weight arrays must hold {n} entries for a {}×{} layer",
                repr.rows, repr.cols
            ));
        }
        if repr.bias_re.len() != repr.rows || repr.bias_im.len() != repr.rows {
            return Err(format!("bias arrays must hold {} entries", repr.rows));
        }
        let weight = CMatrix::new(
            repr.rows,
            repr.cols,
            repr.weight_re
                .iter()
                .zip(&repr.weight_im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        );
        let bias = CVector::new(
            repr.bias_re
                .iter()
                .zip(&repr.bias_im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        );
        Ok(Layer {
            weight,
            bias,
            activation: repr.activation,
            unitary_constrained: repr.unitary_constrained,
        })
    }
}

/// A stack of layers with chained dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
}

/// Everything the forward pass computed, indexed by layer: `z_ℓ` before and
/// `x_ℓ` after the activation, plus the network input `x₀`.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub input: CVector,
    pub pre_activations: Vec<CVector>,
    pub activations: Vec<CVector>,
}

impl ForwardTrace {
    /// The network output `x_L`.
    pub fn output(&self) -> &CVector {
        self.activations
            .last()
            .expect("traces come from non-empty networks")
    }

    /// The input seen by layer `l`: `x₀` for the first layer, otherwise the
    /// previous layer's activation.
    pub fn layer_input(&self, l: usize) -> &CVector {
        if l == 0 {
            &self.input
        } else {
            &self.activations[l - 1]
        }
    }
}

/// Per-layer deltas and parameter gradients produced by one backward pass.
#[derive(Clone, Debug)]
pub struct GradientSet {
    pub deltas: Vec<CVector>,
    pub weight_grads: Vec<CMatrix>,
    pub bias_grads: Vec<CVector>,
}

impl GradientSet {
    /// All-zero gradients shaped like `net`, the identity for accumulation.
    pub fn zeros_like(net: &Network) -> Self {
        GradientSet {
            deltas: net
                .layers
                .iter()
                .map(|l| CVector::zeros(l.output_dim()))
                .collect(),
            weight_grads: net
                .layers
                .iter()
                .map(|l| CMatrix::zeros(l.weight.rows, l.weight.cols))
                .collect(),
            bias_grads: net
                .layers
                .iter()
                .map(|l| CVector::zeros(l.output_dim()))
                .collect(),
        }
    }

    /// Adds `other` in place; used to sum per-sample gradients over a batch.
    pub fn accumulate(&mut self, other: &GradientSet) {
        for (a, b) in self.deltas.iter_mut().zip(&other.deltas) {
            *a = &*a + b;
        }
        for (a, b) in self.weight_grads.iter_mut().zip(&other.weight_grads) {
            *a = &*a + b;
        }
        for (a, b) in self.bias_grads.iter_mut().zip(&other.bias_grads) {
            *a = &*a + b;
        }
    }

    /// Multiplies every component by a real factor (e.g. `1/batch`).
    pub fn scale(&mut self, factor: f64) {
        let f = Complex64::new(factor, 0.0);
        for d in &mut self.deltas {
            *d = d.scale(f);
        }
        for w in &mut self.weight_grads {
            *w = w.scale(f);
        }
        for b in &mut self.bias_grads {
            *b = b.scale(f);
        }
    }
}

/// Selects which derivative feeds the delta recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BackwardRoute {
    Compatible,
    Holomorphic,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Self {
        assert!(!layers.is_empty(), "a network needs at least one layer");
        for w in layers.windows(2) {
            assert_eq!(
                w[1].input_dim(),
                w[0].output_dim(),
                "adjacent layer dimensions must chain"
            );
        }
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    /// Runs the forward pass, recording every `z_ℓ` and `x_ℓ`.
    pub fn forward(&self, x0: &CVector) -> Result<ForwardTrace, NetworkError> {
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut x = x0.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            if x.dim() != layer.input_dim() {
                return Err(NetworkError::DimensionMismatch {
                    layer: l,
                    expected: layer.input_dim(),
                    got: x.dim(),
                });
            }
            let z = &layer.weight.matvec(&x) + &layer.bias;
            x = layer.activation.apply(&z)?;
            pre_activations.push(z);
            activations.push(x.clone());
        }
        Ok(ForwardTrace {
            input: x0.clone(),
            pre_activations,
            activations,
        })
    }

    /// Compatible-learning backpropagation; works for every activation in
    /// this crate.
    pub fn backward_compatible(
        &self,
        trace: &ForwardTrace,
        target: &CVector,
    ) -> Result<GradientSet, NetworkError> {
        self.backward(trace, target, BackwardRoute::Compatible)
    }

    /// Holomorphic-condition backpropagation; restricted to activations with
    /// an analytic derivative (identity and the phase family).
    pub fn backward_holomorphic(
        &self,
        trace: &ForwardTrace,
        target: &CVector,
    ) -> Result<GradientSet, NetworkError> {
        self.backward(trace, target, BackwardRoute::Holomorphic)
    }

    fn backward(
        &self,
        trace: &ForwardTrace,
        target: &CVector,
        route: BackwardRoute,
    ) -> Result<GradientSet, NetworkError> {
        let count = self.layers.len();
        let output = trace.output();
        if target.dim() != output.dim() {
            return Err(NetworkError::TargetDimensionMismatch {
                expected: output.dim(),
                got: target.dim(),
            });
        }
        let factor = |l: usize| -> Result<CVector, ActivationError> {
            let z = &trace.pre_activations[l];
            match route {
                BackwardRoute::Compatible => self.layers[l].activation.derivative_conjugate(z),
                BackwardRoute::Holomorphic => self.layers[l].activation.derivative_holomorphic(z),
            }
        };

        let mut deltas = vec![CVector::zeros(0); count];
        deltas[count - 1] = (output - target).hadamard(&factor(count - 1)?);
        for l in (0..count - 1).rev() {
            let back = self.layers[l + 1].weight.hermitian_transpose();
            deltas[l] = back.matvec(&deltas[l + 1]).hadamard(&factor(l)?);
        }

        let weight_grads = (0..count)
            .map(|l| CMatrix::outer(&deltas[l], trace.layer_input(l)))
            .collect();
        let bias_grads = deltas.clone();
        Ok(GradientSet {
            deltas,
            weight_grads,
            bias_grads,
        })
    }
}

/// Square-error loss `E = ½·Σ_i |x_L,i − t_i|²` of a completed forward pass.
pub fn loss(trace: &ForwardTrace, target: &CVector) -> Result<f64, NetworkError> {
    let output = trace.output();
    if target.dim() != output.dim() {
        return Err(NetworkError::TargetDimensionMismatch {
            expected: output.dim(),
            got: target.dim(),
        });
    }
    Ok(0.5 * (output - target).norm_sqr())
}
