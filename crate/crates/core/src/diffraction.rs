//! Free-space coherent propagation by the angular-spectrum method, and the
//! extraction of per-layer modulation masks that equate a trained digital
//! layer with an optical one.
//!
//! Fields are 1D complex vectors sampled on an aperture of width `d` with `N`
//! points. Propagation over a distance `z` multiplies the unitary DFT of the
//! field by the transfer function
//!
//! `H(f) = exp(i·2π·(z/λ)·√(1 − (λf)²))`   for propagating modes `|λf| < 1`,
//! `H(f) = exp(−2π·(z/λ)·√((λf)² − 1))`    for evanescent modes,
//!
//! with frequencies `f_k = k/d` in standard DFT order. With every mode
//! propagating the implied operator is unitary, which is what lets trained
//! unitary weights pose as stacks of diffraction-plus-modulation layers.

use crate::activation::{Activation, ActivationError};
use crate::linalg::{CMatrix, CVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Relative floor under which a modulation denominator pixel counts as zero:
/// entries with modulus below `MODULATION_FLOOR_REL · max modulus` make the
/// optical equivalence ill-defined at that pixel.
pub const MODULATION_FLOOR_REL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DiffractionError {
    #[error("field has dimension {got}, operator expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "modulation denominator entry {index} has modulus {modulus:.3e}, below the floor {floor:.3e}"
    )]
    NearZeroDenominator {
        index: usize,
        modulus: f64,
        floor: f64,
    },
    #[error(transparent)]
    Activation(#[from] ActivationError),
}

/// Sampling geometry of a 1D coherent field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffractionGeometry {
    /// Number of samples across the aperture (power of two).
    pub n_samples: usize,
    /// Aperture width in meters.
    pub aperture: f64,
    /// Wavelength in meters.
    pub wavelength: f64,
    /// Propagation distance in meters; negative distances run the inverse
    /// propagation, zero is the identity.
    pub distance: f64,
}

impl DiffractionGeometry {
    pub fn new(n_samples: usize, aperture: f64, wavelength: f64, distance: f64) -> Self {
        assert!(
            n_samples >= 2 && n_samples.is_power_of_two(),
            "n_samples must be a power of two ≥ 2"
        );
        assert!(aperture > 0.0, "aperture must be positive");
        assert!(wavelength > 0.0, "wavelength must be positive");
        assert!(distance.is_finite(), "distance must be finite");
        Self {
            n_samples,
            aperture,
            wavelength,
            distance,
        }
    }

    /// Geometry at the characteristic sampling distance `d²/(λN)`.
    pub fn at_sample_distance(n_samples: usize, aperture: f64, wavelength: f64) -> Self {
        let distance = sample_distance(aperture, wavelength, n_samples);
        Self::new(n_samples, aperture, wavelength, distance)
    }
}

/// Characteristic diffraction-distance sampling rule `z = d²/(λ·N)`.
pub fn sample_distance(aperture: f64, wavelength: f64, n_samples: usize) -> f64 {
    assert!(aperture > 0.0 && wavelength > 0.0 && n_samples > 0);
    aperture * aperture / (wavelength * n_samples as f64)
}

/// Angular-spectrum propagation operator over a fixed geometry.
///
/// The production path is FFT-based (`O(N log N)` per field); the dense
/// `N × N` materialization exists for verification, where tests compare the
/// FFT path against direct matrix arithmetic.
#[derive(Clone)]
pub struct DiffractionOperator {
    pub geometry: DiffractionGeometry,
    /// Diagonal of the transfer function in standard DFT frequency order.
    pub transfer: CVector,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DiffractionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffractionOperator")
            .field("geometry", &self.geometry)
            .finish_non_exhaustive()
    }
}

/// Builds the transfer function for `g` and plans the FFTs.
pub fn build_operator(g: DiffractionGeometry) -> DiffractionOperator {
    let n = g.n_samples;
    let z_over_lambda = g.distance / g.wavelength;
    let mut transfer = Vec::with_capacity(n);
    for k in 0..n {
        // Standard DFT ordering: 0, 1, …, N/2, −N/2+1, …, −1 (cycles/meter).
        let k_signed = if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        let lf = g.wavelength * k_signed / g.aperture;
        let h = if lf.abs() < 1.0 {
            Complex64::from_polar(1.0, 2.0 * PI * z_over_lambda * (1.0 - lf * lf).sqrt())
        } else {
            Complex64::new(
                (-2.0 * PI * z_over_lambda * (lf * lf - 1.0).sqrt()).exp(),
                0.0,
            )
        };
        transfer.push(h);
    }
    let mut planner = FftPlanner::new();
    DiffractionOperator {
        geometry: g,
        transfer: CVector::new(transfer),
        fft_forward: planner.plan_fft_forward(n),
        fft_inverse: planner.plan_fft_inverse(n),
    }
}

impl DiffractionOperator {
    /// Propagates one field: unitary DFT, elementwise transfer, inverse
    /// unitary DFT. Preserves the 2-norm when every mode propagates.
    pub fn propagate(&self, field: &CVector) -> Result<CVector, DiffractionError> {
        let n = self.geometry.n_samples;
        if field.dim() != n {
            return Err(DiffractionError::DimensionMismatch {
                expected: n,
                got: field.dim(),
            });
        }
        let scale = 1.0 / (n as f64).sqrt();
        let mut buf = field.data.clone();
        self.fft_forward.process(&mut buf);
        for (b, h) in buf.iter_mut().zip(&self.transfer.data) {
            *b = *b * scale * h;
        }
        self.fft_inverse.process(&mut buf);
        for b in buf.iter_mut() {
            *b *= scale;
        }
        Ok(CVector::new(buf))
    }

    /// The implied matrix `D = F^H·diag(transfer)·F`, materialized column by
    /// column. Verification only; production code calls [`Self::propagate`].
    pub fn dense_matrix(&self) -> CMatrix {
        let n = self.geometry.n_samples;
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut basis = CVector::zeros(n);
            basis[j] = Complex64::new(1.0, 0.0);
            let col = self
                .propagate(&basis)
                .expect("basis vectors match the operator dimension");
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

/// Extracts the modulation mask `r` that makes the optical layer
/// `(D·y_prev) ⊙ r` reproduce the digital layer `f(W·y_prev)`:
/// `r_i = f(W·y_prev)_i / (D·y_prev)_i`.
pub fn modulation_from_weights(
    w: &CMatrix,
    a: &Activation,
    y_prev: &CVector,
    op: &DiffractionOperator,
) -> Result<CVector, DiffractionError> {
    let n = op.geometry.n_samples;
    if w.rows != n || w.cols != n || y_prev.dim() != n {
        return Err(DiffractionError::DimensionMismatch {
            expected: n,
            got: if w.rows != n { w.rows } else { y_prev.dim() },
        });
    }
    let numerator = a.apply(&w.matvec(y_prev))?;
    let denominator = op.propagate(y_prev)?;
    let floor = MODULATION_FLOOR_REL * denominator.max_modulus();
    let mut r = Vec::with_capacity(n);
    for (index, (&num, &den)) in numerator.data.iter().zip(&denominator.data).enumerate() {
        let modulus = den.norm();
        if modulus < floor || modulus == 0.0 {
            return Err(DiffractionError::NearZeroDenominator {
                index,
                modulus,
                floor,
            });
        }
        r.push(num / den);
    }
    Ok(CVector::new(r))
}
