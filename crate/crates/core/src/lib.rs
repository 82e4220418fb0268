//! Complex-valued neural networks trained on the unitary group, plus the
//! scalar-diffraction machinery that maps trained weights onto layered
//! optical modulation masks.
//!
//! Module map:
//! - [`linalg`] — row-major complex matrices/vectors, seeded initializers,
//!   unitarity diagnostics, skew-Hermitian matrix exponential.
//! - [`activation`] — complex synapses (sigmoid/tanh and the quasi-phase
//!   ReLU family) with compatible/holomorphic derivative semantics.
//! - [`diffraction`] — angular-spectrum free-space propagation and the
//!   extraction of per-layer modulation masks from trained weights.
//! - [`network`] — layered complex networks: forward traces, squared-error
//!   loss, compatible and holomorphic backward passes.
//! - [`optim`] — Euclidean and Riemannian (unitary-manifold) training.
//! - [`data`] — built-in tasks, generated diffraction datasets, IDX image
//!   loading, and classification metrics.

pub mod activation;
pub mod data;
pub mod diffraction;
pub mod linalg;
pub mod network;
pub mod optim;

pub use num_complex::Complex64;
