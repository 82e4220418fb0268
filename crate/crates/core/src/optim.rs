//! Training loops: plain Euclidean gradient descent and Riemannian descent
//! on the unitary group, where constrained weights move along the manifold
//! instead of through the ambient space.
//!
//! The Euclidean gradient `Γ = δ·x^H` translates to the Riemannian gradient
//!
//! `G = Γ·U^H − U·Γ^H`,
//!
//! which is skew-Hermitian by construction, and the update is the
//! exponential-map multiplication `U ← exp(−λ·G)·U`. Because `exp(−λG)` is
//! unitary, the constraint survives every step up to roundoff; an optional
//! periodic re-orthonormalization scrubs the accumulated drift.
//!
//! Both modes share the batch machinery: per-epoch deterministic shuffling,
//! mini-batch gradient averaging with an order-fixed reduction (batch
//! members may evaluate in parallel), and early stopping on a strict
//! loss-threshold test. Numeric failures abort the run but keep the partial
//! loss curve, so sweeps can treat an aborted cell as a data point rather
//! than a crash.

use crate::data::Dataset;
use crate::linalg::{
    expm_skew_hermitian, reorthonormalize, unitarity_defect, CMatrix, LinalgError,
};
use crate::network::{loss, GradientSet, Network, NetworkError};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("gradient is {g_rows}×{g_cols} but the unitary weight is {u_rows}×{u_cols}")]
    DimensionMismatch {
        u_rows: usize,
        u_cols: usize,
        g_rows: usize,
        g_cols: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which update rule `train` applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// `W ← W − η·ΔW` everywhere; unitary flags are ignored (weights drift
    /// off the manifold — the compatible-learning baseline).
    Euclidean,
    /// Constrained layers take exponential-map steps; unconstrained weights
    /// and all biases update as in Euclidean mode.
    Unitary,
}

/// Step sizes, schedule and stopping rule for one training run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Step size η for every Euclidean update (unconstrained weights and
    /// trainable biases).
    pub euclidean_rate: f64,
    /// Step size λ for exponential-map updates of constrained weights.
    pub riemannian_rate: f64,
    /// Epoch cap; training may stop earlier on convergence.
    pub epochs: usize,
    /// Samples per gradient update; 0 means full batch.
    pub batch_size: usize,
    /// Re-project constrained weights every this many epochs; 0 disables.
    pub reorthonormalize_every: usize,
    /// Converged when an epoch's mean loss falls strictly below this.
    pub convergence_threshold: f64,
    /// Seed for the per-epoch sample shuffle.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            euclidean_rate: 0.2,
            riemannian_rate: 0.2,
            epochs: 1000,
            batch_size: 0,
            reorthonormalize_every: 0,
            convergence_threshold: 1e-3,
            seed: 0,
        }
    }
}

/// What one training run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean pre-update loss per completed epoch.
    pub loss_curve: Vec<f64>,
    /// Final epoch loss fell strictly below the convergence threshold.
    pub converged: bool,
    /// Unitarity defect of each constrained layer after training.
    pub final_defects: Vec<f64>,
    /// Elapsed seconds; informational only (excluded from deterministic
    /// artifacts).
    pub wall_time: f64,
    /// Description of the numeric failure that ended the run early, if any.
    pub abort: Option<String>,
}

impl TrainReport {
    /// Learning curve as `epoch,loss` CSV rows (1-based epochs).
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (i, l) in self.loss_curve.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, l));
        }
        out
    }
}

/// The sweep-grid cell value: did this run finish and converge?
pub fn convergence_indicator(report: &TrainReport) -> bool {
    report.converged && report.abort.is_none()
}

/// Translates a Euclidean gradient `Γ` at the unitary point `U` to the
/// skew-Hermitian Riemannian gradient `G = Γ·U^H − U·Γ^H`.
pub fn riemannian_gradient(u: &CMatrix, euclid_grad: &CMatrix) -> Result<CMatrix, OptimError> {
    if !u.is_square() || euclid_grad.rows != u.rows || euclid_grad.cols != u.cols {
        return Err(OptimError::DimensionMismatch {
            u_rows: u.rows,
            u_cols: u.cols,
            g_rows: euclid_grad.rows,
            g_cols: euclid_grad.cols,
        });
    }
    let gu = euclid_grad.matmul(&u.hermitian_transpose());
    let ug = u.matmul(&euclid_grad.hermitian_transpose());
    Ok(&gu - &ug)
}

/// One geodesic descent step `exp(−λ·G)·U`. A zero step returns `U`
/// bit-identically.
pub fn unitary_step(u: &CMatrix, g: &CMatrix, lambda: f64) -> Result<CMatrix, OptimError> {
    if !u.is_square() || g.rows != u.rows || g.cols != u.cols {
        return Err(OptimError::DimensionMismatch {
            u_rows: u.rows,
            u_cols: u.cols,
            g_rows: g.rows,
            g_cols: g.cols,
        });
    }
    if lambda == 0.0 {
        return Ok(u.clone());
    }
    let rotation = expm_skew_hermitian(g, lambda)?;
    Ok(rotation.matmul(u))
}

fn apply_update(
    net: &mut Network,
    grads: &GradientSet,
    cfg: &OptimizerConfig,
    mode: TrainMode,
) -> Result<(), OptimError> {
    let step = Complex64::new(-cfg.euclidean_rate, 0.0);
    for (l, layer) in net.layers.iter_mut().enumerate() {
        if mode == TrainMode::Unitary && layer.unitary_constrained {
            let g = riemannian_gradient(&layer.weight, &grads.weight_grads[l])?;
            layer.weight = unitary_step(&layer.weight, &g, cfg.riemannian_rate)?;
        } else {
            layer.weight = &layer.weight + &grads.weight_grads[l].scale(step);
        }
        // Biases live in the ambient space on every layer; only the weight
        // is pinned to the manifold.
        layer.bias = &layer.bias + &grads.bias_grads[l].scale(step);
    }
    Ok(())
}

/// Trains `net` in place and reports the loss curve. The epoch loss is the
/// mean per-sample loss at evaluation time (before that batch's update), so
/// the curve reflects the surface the gradients actually saw.
///
/// Any numeric failure — activation boundaries, factorization breakdowns,
/// non-finite values — stops the run, records the cause in `abort`, and
/// keeps the loss curve of all completed epochs.
pub fn train(
    net: &mut Network,
    data: &Dataset,
    cfg: &OptimizerConfig,
    mode: TrainMode,
) -> TrainReport {
    assert!(cfg.epochs >= 1, "epochs must be at least 1");
    assert!(
        cfg.euclidean_rate.is_finite() && cfg.euclidean_rate >= 0.0,
        "euclidean_rate must be finite and non-negative"
    );
    assert!(
        cfg.riemannian_rate.is_finite() && cfg.riemannian_rate >= 0.0,
        "riemannian_rate must be finite and non-negative"
    );
    assert!(
        cfg.convergence_threshold.is_finite(),
        "convergence_threshold must be finite"
    );

    let start = Instant::now();
    let batch_size = if cfg.batch_size == 0 {
        data.len()
    } else {
        cfg.batch_size
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut loss_curve = Vec::new();
    let mut converged = false;
    let mut abort = None;

    'epochs: for _epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss_sum = 0.0;
        for batch in order.chunks(batch_size) {
            // Per-sample losses and gradients in parallel; the reduction
            // below runs in batch order so results are schedule-independent.
            let evaluated: Vec<Result<(f64, GradientSet), NetworkError>> = batch
                .par_iter()
                .map(|&i| {
                    let sample = &data.samples[i];
                    let trace = net.forward(&sample.input)?;
                    let l = loss(&trace, &sample.target)?;
                    let grads = net.backward_compatible(&trace, &sample.target)?;
                    Ok((l, grads))
                })
                .collect();
            let mut batch_grads = GradientSet::zeros_like(net);
            for result in evaluated {
                match result {
                    Ok((l, grads)) => {
                        epoch_loss_sum += l;
                        batch_grads.accumulate(&grads);
                    }
                    Err(e) => {
                        abort = Some(e.to_string());
                        break 'epochs;
                    }
                }
            }
            batch_grads.scale(1.0 / batch.len() as f64);
            if let Err(e) = apply_update(net, &batch_grads, cfg, mode) {
                abort = Some(e.to_string());
                break 'epochs;
            }
            if net
                .layers
                .iter()
                .any(|l| !l.weight.is_finite() || !l.bias.is_finite())
            {
                abort = Some("parameters became non-finite after an update".into());
                break 'epochs;
            }
        }
        let epoch_loss = epoch_loss_sum / data.len() as f64;
        loss_curve.push(epoch_loss);
        if !epoch_loss.is_finite() {
            abort = Some(format!("epoch {}: non-finite loss", loss_curve.len()));
            break;
        }
        if mode == TrainMode::Unitary
            && cfg.reorthonormalize_every > 0
            && loss_curve.len() % cfg.reorthonormalize_every == 0
        {
            for layer in net.layers.iter_mut().filter(|l| l.unitary_constrained) {
                match reorthonormalize(&layer.weight) {
                    Ok(w) => layer.weight = w,
                    Err(e) => {
                        abort = Some(e.to_string());
                        break 'epochs;
                    }
                }
            }
        }
        if epoch_loss < cfg.convergence_threshold {
            converged = true;
            break;
        }
    }

    let final_defects = net
        .layers
        .iter()
        .filter(|l| l.unitary_constrained)
        .map(|l| unitarity_defect(&l.weight))
        .collect();
    TrainReport {
        loss_curve,
        converged,
        final_defects,
        wall_time: start.elapsed().as_secs_f64(),
        abort,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;
    use crate::data::{phase_xor_dataset, xor4_dataset, Dataset, DatasetKind, Sample};
    use crate::linalg::{random_unitary, CVector, InitKind, InitScheme};
    use crate::network::Layer;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vector(n: usize, seed: u64) -> CVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CVector::new(
            (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    /// Probe objective J(U) = ½‖U·x − t‖² and its Euclidean gradient
    /// Γ = (U·x − t)·x^H.
    fn probe(u: &CMatrix, x: &CVector, t: &CVector) -> (f64, CMatrix) {
        let residual = &u.matvec(x) - t;
        (0.5 * residual.norm_sqr(), CMatrix::outer(&residual, x))
    }

    #[test]
    fn zero_gradient_maps_to_zero() {
        let u = random_unitary(4, &InitScheme::new(InitKind::SvdGaussianUnitary, 1));
        let g = riemannian_gradient(&u, &CMatrix::zeros(4, 4)).unwrap();
        assert_eq!(g.frobenius_norm(), 0.0);
    }

    #[test]
    fn riemannian_gradient_is_skew_hermitian() {
        for seed in 0..20 {
            let n = 2 + (seed as usize % 5);
            let u = random_unitary(n, &InitScheme::new(InitKind::SvdGaussianUnitary, seed));
            let gamma = CMatrix::random_uniform(n, n, 100 + seed, 2.0);
            let g = riemannian_gradient(&u, &gamma).unwrap();
            let defect = (&g + &g.hermitian_transpose()).frobenius_norm();
            assert!(
                defect <= 1e-12 * (1.0 + g.frobenius_norm()),
                "seed {seed}: defect {defect}"
            );
        }
    }

    #[test]
    fn scalar_riemannian_gradient_keeps_the_imaginary_part() {
        // U = [1], Γ = [g] → G = [g − g*] = [2i·Im g].
        let u = CMatrix::identity(1);
        let gamma = CMatrix::new(1, 1, vec![c(0.3, -0.8)]);
        let g = riemannian_gradient(&u, &gamma).unwrap();
        assert_eq!(g[(0, 0)], c(0.0, -1.6));
    }

    #[test]
    fn riemannian_gradient_checks_shapes() {
        let u = random_unitary(3, &InitScheme::new(InitKind::SvdGaussianUnitary, 2));
        match riemannian_gradient(&u, &CMatrix::zeros(2, 3)) {
            Err(OptimError::DimensionMismatch {
                u_rows: 3,
                g_rows: 2,
                ..
            }) => {}
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
    }

    #[test]
    fn zero_step_is_bit_identical() {
        let u = random_unitary(5, &InitScheme::new(InitKind::TrabelsiUnitary, 3));
        let gamma = CMatrix::random_uniform(5, 5, 4, 1.0);
        let g = riemannian_gradient(&u, &gamma).unwrap();
        let stepped = unitary_step(&u, &g, 0.0).unwrap();
        assert_eq!(stepped.data, u.data);
    }

    #[test]
    fn diagonal_step_rotates_the_phases() {
        // U = I, G = diag(2i), λ = π/2 → exp(−λG) = diag(e^{−iπ}) = −I.
        let n = 3;
        let u = CMatrix::identity(n);
        let g = CMatrix::from_fn(n, n, |i, j| if i == j { c(0.0, 2.0) } else { c(0.0, 0.0) });
        let stepped = unitary_step(&u, &g, std::f64::consts::FRAC_PI_2).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { c(-1.0, 0.0) } else { c(0.0, 0.0) };
                assert!((stepped[(i, j)] - expected).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn small_steps_descend_the_probe_objective() {
        for seed in 0..10 {
            let n = 4;
            let u = random_unitary(n, &InitScheme::new(InitKind::SvdGaussianUnitary, 10 + seed));
            let x = random_vector(n, 20 + seed);
            let t = random_vector(n, 30 + seed);
            let (before, gamma) = probe(&u, &x, &t);
            let g = riemannian_gradient(&u, &gamma).unwrap();
            let stepped = unitary_step(&u, &g, 1e-3).unwrap();
            let (after, _) = probe(&stepped, &x, &t);
            assert!(after < before, "seed {seed}: {after} !< {before}");
        }
    }

    #[test]
    fn step_rejects_non_skew_directions() {
        let u = CMatrix::identity(2);
        let not_skew = CMatrix::from_fn(2, 2, |i, j| c((i + j) as f64 + 1.0, 0.0));
        match unitary_step(&u, &not_skew, 0.1) {
            Err(OptimError::Linalg(LinalgError::NotSkewHermitian { .. })) => {}
            other => panic!("expected NotSkewHermitian, got {other:?}"),
        }
    }

    #[test]
    fn first_order_loss_slope_is_half_gradient_norm() {
        // J(exp(−λG)·U) = J(U) − λ‖G‖²_F/2 + O(λ²); Richardson-extrapolate
        // the forward difference to kill the O(λ) truncation term.
        for seed in 0..5 {
            let n = 4;
            let u = random_unitary(n, &InitScheme::new(InitKind::SvdGaussianUnitary, 40 + seed));
            let x = random_vector(n, 50 + seed);
            let t = random_vector(n, 60 + seed);
            let (j0, gamma) = probe(&u, &x, &t);
            let g = riemannian_gradient(&u, &gamma).unwrap();
            let expected = 0.5 * g.frobenius_norm().powi(2);
            let slope = |lambda: f64| {
                let (j, _) = probe(&unitary_step(&u, &g, lambda).unwrap(), &x, &t);
                (j0 - j) / lambda
            };
            let lambda = 1e-4;
            let richardson = 2.0 * slope(lambda / 2.0) - slope(lambda);
            assert!(
                (richardson - expected).abs() <= 1e-5 * (1.0 + expected),
                "seed {seed}: {richardson} vs {expected}"
            );
        }
    }

    #[test]
    fn repeated_steps_hold_the_manifold() {
        // 1000 steps against random gradients: defect stays ≤ 1e-8 with no
        // re-orthonormalization at all.
        let n = 8;
        let mut u = random_unitary(n, &InitScheme::new(InitKind::SvdGaussianUnitary, 70));
        for k in 0..1000 {
            let gamma = CMatrix::random_uniform(n, n, 71 + k, 0.05);
            let g = riemannian_gradient(&u, &gamma).unwrap();
            u = unitary_step(&u, &g, 0.05).unwrap();
        }
        let defect = unitarity_defect(&u);
        assert!(defect <= 1e-8, "defect {defect}");
    }

    fn two_layer_unitary_net(seed: u64, activation: Activation) -> Network {
        let u1 = random_unitary(4, &InitScheme::new(InitKind::SvdGaussianUnitary, seed));
        let u2 = random_unitary(4, &InitScheme::new(InitKind::SvdGaussianUnitary, seed + 1000));
        Network::new(vec![
            Layer::unitary(u1, activation),
            Layer::unitary(u2, Activation::identity()),
        ])
    }

    #[test]
    fn zero_error_dataset_converges_immediately() {
        let net0 = two_layer_unitary_net(1, Activation::identity());
        let inputs: Vec<CVector> = (0..3).map(|i| random_vector(4, 80 + i)).collect();
        let samples = inputs
            .iter()
            .map(|x| Sample {
                input: x.clone(),
                target: net0.forward(x).unwrap().output().clone(),
                label: None,
            })
            .collect();
        let data = Dataset::new(DatasetKind::Diffractive, samples);
        let mut net = net0.clone();
        let report = train(&mut net, &data, &OptimizerConfig::default(), TrainMode::Unitary);
        assert!(report.converged);
        assert!(convergence_indicator(&report));
        assert_eq!(report.loss_curve.len(), 1);
        assert!(report.loss_curve[0] <= 1e-20);
        assert_eq!(report.final_defects.len(), 2);
    }

    #[test]
    fn convergence_test_is_strictly_less_than() {
        // A zero-loss run against threshold 0 must not count as converged;
        // any positive threshold must.
        let net0 = two_layer_unitary_net(2, Activation::identity());
        let x = random_vector(4, 90);
        let data = Dataset::new(
            DatasetKind::Diffractive,
            vec![Sample {
                input: x.clone(),
                target: net0.forward(&x).unwrap().output().clone(),
                label: None,
            }],
        );
        let strict = OptimizerConfig {
            epochs: 3,
            convergence_threshold: 0.0,
            ..OptimizerConfig::default()
        };
        let mut net = net0.clone();
        let report = train(&mut net, &data, &strict, TrainMode::Unitary);
        assert!(!report.converged);
        assert_eq!(report.loss_curve.len(), 3);

        let lenient = OptimizerConfig {
            convergence_threshold: 1e-300,
            ..strict
        };
        let mut net = net0.clone();
        let report = train(&mut net, &data, &lenient, TrainMode::Unitary);
        assert!(report.converged);
    }

    #[test]
    fn unitary_training_learns_the_phase_xor_task() {
        let data = phase_xor_dataset();
        let mut net = two_layer_unitary_net(7, Activation::phase_relu(0.1));
        let cfg = OptimizerConfig {
            riemannian_rate: 0.02,
            epochs: 2000,
            ..OptimizerConfig::default()
        };
        let report = train(&mut net, &data, &cfg, TrainMode::Unitary);
        assert!(report.abort.is_none(), "abort: {:?}", report.abort);
        assert!(
            report.converged,
            "final loss {:?}",
            report.loss_curve.last()
        );
        for defect in &report.final_defects {
            assert!(*defect <= 1e-8, "defect {defect}");
        }
    }

    #[test]
    fn euclidean_training_learns_xor4() {
        let data = xor4_dataset();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut layer = |n_in: usize| {
            Layer::new(
                CMatrix::random_uniform(4, n_in, rng.gen(), 0.5),
                CVector::zeros(4),
                Activation::complex_tanh(),
            )
        };
        let mut net = Network::new(vec![layer(4), layer(4)]);
        let cfg = OptimizerConfig {
            euclidean_rate: 0.1,
            epochs: 2000,
            convergence_threshold: 0.0,
            ..OptimizerConfig::default()
        };
        let report = train(&mut net, &data, &cfg, TrainMode::Euclidean);
        assert!(report.abort.is_none(), "abort: {:?}", report.abort);
        let first = report.loss_curve[0];
        let last = *report.loss_curve.last().unwrap();
        assert!(last < first / 10.0, "{last} !< {first}/10");
    }

    #[test]
    fn zero_riemannian_rate_freezes_constrained_weights() {
        let data = phase_xor_dataset();
        let mut net = Network::new(vec![
            Layer::unitary(
                random_unitary(4, &InitScheme::new(InitKind::SvdGaussianUnitary, 9)),
                Activation::phase_relu(0.1),
            ),
            Layer::new(
                CMatrix::random_uniform(4, 4, 10, 0.5),
                CVector::zeros(4),
                Activation::identity(),
            ),
        ]);
        let frozen = net.layers[0].weight.clone();
        let moving = net.layers[1].weight.clone();
        let cfg = OptimizerConfig {
            riemannian_rate: 0.0,
            euclidean_rate: 0.1,
            epochs: 5,
            convergence_threshold: 0.0,
            ..OptimizerConfig::default()
        };
        let report = train(&mut net, &data, &cfg, TrainMode::Unitary);
        assert!(report.abort.is_none());
        assert_eq!(net.layers[0].weight.data, frozen.data);
        assert_ne!(net.layers[1].weight.data, moving.data);
    }

    #[test]
    fn boundary_hit_aborts_with_partial_curve() {
        // An input exactly on the pass-interval boundary kills the very
        // first backward pass: empty curve, abort recorded, not converged.
        let mut net = Network::new(vec![Layer::unitary(
            CMatrix::identity(2),
            Activation::phase_relu(0.0),
        )]);
        let boundary_input = CVector::from_polar(&[1.0, 1.0], &[std::f64::consts::FRAC_PI_2, 0.0]);
        let data = Dataset::new(
            DatasetKind::Diffractive,
            vec![Sample {
                input: boundary_input,
                target: CVector::zeros(2),
                label: None,
            }],
        );
        let report = train(
            &mut net,
            &data,
            &OptimizerConfig::default(),
            TrainMode::Unitary,
        );
        assert!(report.abort.is_some());
        assert!(report.loss_curve.is_empty());
        assert!(!report.converged);
        assert!(!convergence_indicator(&report));
    }

    #[test]
    fn training_is_deterministic() {
        let data = phase_xor_dataset();
        let cfg = OptimizerConfig {
            riemannian_rate: 0.1,
            epochs: 50,
            batch_size: 1,
            convergence_threshold: 0.0,
            seed: 42,
            ..OptimizerConfig::default()
        };
        let run = || {
            let mut net = two_layer_unitary_net(11, Activation::phase_lrelu(0.5, 0.1));
            let report = train(&mut net, &data, &cfg, TrainMode::Unitary);
            (report.loss_curve, serde_json::to_string(&net).unwrap())
        };
        let (curve_a, net_a) = run();
        let (curve_b, net_b) = run();
        assert_eq!(curve_a, curve_b);
        assert_eq!(net_a, net_b);
    }

    #[test]
    fn curve_csv_lists_epochs() {
        let report = TrainReport {
            loss_curve: vec![0.5, 0.25],
            converged: false,
            final_defects: vec![],
            wall_time: 0.0,
            abort: None,
        };
        assert_eq!(report.curve_csv(), "epoch,loss\n1,0.5\n2,0.25\n");
    }

    #[test]
    fn indicator_requires_both_convergence_and_a_clean_run() {
        let clean = TrainReport {
            loss_curve: vec![1e-4],
            converged: true,
            final_defects: vec![],
            wall_time: 0.0,
            abort: None,
        };
        assert!(convergence_indicator(&clean));
        let aborted = TrainReport {
            abort: Some("boom".into()),
            converged: false,
            ..clean.clone()
        };
        assert!(!convergence_indicator(&aborted));
    }
}
