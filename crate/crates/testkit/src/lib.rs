//! Reference implementations for cross-checking the main crate.
//!
//! Everything here trades speed for independence: the matrix exponential is
//! a scaled-and-squared Taylor series instead of an eigendecomposition, the
//! propagation operator is assembled from explicit DFT sums instead of FFTs,
//! and gradients come from central finite differences instead of the
//! backward pass. Tests compare the fast production routes against these.

use std::f64::consts::PI;

use num_complex::Complex64;
use unilearn::diffraction::DiffractionGeometry;
use unilearn::linalg::{CMatrix, CVector};
use unilearn::network::{loss, Network};

/// `exp(−step·g)` via plain Taylor summation with scaling and squaring.
///
/// Converges for any square matrix; no structure is assumed, so agreement
/// with the eigendecomposition route is meaningful evidence rather than a
/// shared code path.
pub fn expm_reference(g: &CMatrix, step: f64) -> CMatrix {
    assert!(g.is_square(), "matrix exponential needs a square matrix");
    let n = g.rows;
    let a = g.scale(Complex64::new(-step, 0.0));
    // Halve until the norm is small enough that the series converges in a
    // few dozen terms, then square the result back up.
    let mut squarings = 0u32;
    let mut norm = a.frobenius_norm();
    while norm > 0.5 {
        norm /= 2.0;
        squarings += 1;
    }
    let b = a.scale(Complex64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=64u32 {
        term = term.matmul(&b).scale(Complex64::new(1.0 / f64::from(k), 0.0));
        result = &result + &term;
        if term.frobenius_norm() <= 1e-18 * result.frobenius_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Dense free-space propagation matrix assembled from explicit DFT sums.
///
/// The column response is `(1/N)·Σ_m H(f_m)·e^{+i2πmj/N}·e^{−i2πml/N}` with
/// the transfer factor recomputed here from the geometry, so no FFT code is
/// exercised.
pub fn dense_propagation_reference(g: DiffractionGeometry) -> CMatrix {
    let n = g.n_samples;
    let h: Vec<Complex64> = (0..n).map(|k| transfer_factor(g, k)).collect();
    CMatrix::from_fn(n, n, |j, l| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, hm) in h.iter().enumerate() {
            let angle = 2.0 * PI * (m * j) as f64 / n as f64
                - 2.0 * PI * (m * l) as f64 / n as f64;
            acc += hm * Complex64::from_polar(1.0, angle);
        }
        acc.unscale(n as f64)
    })
}

/// Per-bin angular-spectrum factor: unit-modulus rotation for propagating
/// frequencies, real exponential decay past the evanescent cutoff.
fn transfer_factor(g: DiffractionGeometry, k: usize) -> Complex64 {
    let n = g.n_samples;
    let signed = if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    };
    let lf = g.wavelength * signed / g.aperture;
    let z_over_lambda = g.distance / g.wavelength;
    if lf.abs() < 1.0 {
        Complex64::from_polar(1.0, 2.0 * PI * z_over_lambda * (1.0 - lf * lf).sqrt())
    } else {
        Complex64::new(
            (-2.0 * PI * z_over_lambda * (lf * lf - 1.0).sqrt()).exp(),
            0.0,
        )
    }
}

const FD_STEP: f64 = 1e-6;

fn squared_error(net: &Network, input: &CVector, target: &CVector) -> f64 {
    let trace = net.forward(input).expect("forward must succeed during FD");
    loss(&trace, target).expect("loss must succeed during FD")
}

/// Central-difference gradient of the squared error with respect to one
/// weight matrix, assembled as `∂E/∂Re + i·∂E/∂Im` per entry.
pub fn fd_weight_gradient(
    net: &Network,
    layer: usize,
    input: &CVector,
    target: &CVector,
) -> CMatrix {
    let w = &net.layers[layer].weight;
    CMatrix::from_fn(w.rows, w.cols, |i, j| {
        let d_re = fd_slope(net, input, target, |n, t| {
            n.layers[layer].weight[(i, j)] += Complex64::new(t, 0.0);
        });
        let d_im = fd_slope(net, input, target, |n, t| {
            n.layers[layer].weight[(i, j)] += Complex64::new(0.0, t);
        });
        Complex64::new(d_re, d_im)
    })
}

/// Central-difference gradient with respect to one bias vector.
pub fn fd_bias_gradient(
    net: &Network,
    layer: usize,
    input: &CVector,
    target: &CVector,
) -> CVector {
    let dim = net.layers[layer].bias.dim();
    CVector::new(
        (0..dim)
            .map(|i| {
                let d_re = fd_slope(net, input, target, |n, t| {
                    n.layers[layer].bias[i] += Complex64::new(t, 0.0);
                });
                let d_im = fd_slope(net, input, target, |n, t| {
                    n.layers[layer].bias[i] += Complex64::new(0.0, t);
                });
                Complex64::new(d_re, d_im)
            })
            .collect(),
    )
}

fn fd_slope<F: Fn(&mut Network, f64)>(
    net: &Network,
    input: &CVector,
    target: &CVector,
    perturb: F,
) -> f64 {
    let mut plus = net.clone();
    perturb(&mut plus, FD_STEP);
    let mut minus = net.clone();
    perturb(&mut minus, -FD_STEP);
    (squared_error(&plus, input, target) - squared_error(&minus, input, target)) / (2.0 * FD_STEP)
}
