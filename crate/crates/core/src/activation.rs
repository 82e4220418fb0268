//! Nonlinear synapses in complex space.
//!
//! Every activation here satisfies the compatibility relation
//! `conj(f(z)) == f(conj(z))` (real Taylor coefficients for sigmoid/tanh,
//! symmetric pass interval for the phase family), which is what lets the
//! backward pass express gradients through `f'(conj(z))` — see
//! [`crate::network`].
//!
//! The phase family passes an entry unchanged when its argument lies inside
//! the open interval `(−π/(2−ε), π/(2−ε))` and otherwise damps it:
//!
//! | kind          | outside the pass interval        |
//! |---------------|----------------------------------|
//! | `phase_relu`  | `0`                              |
//! | `phase_lrelu` | `k·z`                            |
//! | `phase_erelu` | `k·(exp(z) − 1)`                 |
//!
//! The interval is strictly open; ε = 0 recovers the half-plane read as an
//! open set. Derivatives next to an endpoint (within 1e-12 rad) are reported
//! as [`ActivationError::BoundaryPoint`] instead of silently picking a side.

use crate::linalg::CVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Modulus below which a sigmoid/tanh denominator counts as a pole.
pub const POLE_TOL: f64 = 1e-12;
/// Angular distance below which an argument counts as sitting on a
/// pass-interval endpoint.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ActivationError {
    #[error("entry {index} lies within {POLE_TOL:.0e} of an activation pole (|denominator| = {modulus:.3e})")]
    PoleProximity { index: usize, modulus: f64 },
    #[error("entry {index} sits on the pass-interval boundary (arg = {arg:.17})")]
    BoundaryPoint { index: usize, arg: f64 },
    #[error("{kind:?} has no holomorphic derivative")]
    Unsupported { kind: ActivationKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    ComplexSigmoid,
    ComplexTanh,
    PhaseRelu,
    PhaseLrelu,
    PhaseErelu,
    Identity,
}

/// How a phase-family derivative treats arguments sitting on the pass
/// interval's endpoints. The pass test itself is always strictly open; the
/// one-sided limits disagree on the boundary, so the derivative there is not
/// well defined. `Open` (production) refuses with
/// [`ActivationError::BoundaryPoint`] whenever an argument lands within
/// [`BOUNDARY_TOL`] of an endpoint. `Closed` silences that diagnostic and
/// lets the strict cut decide, which assigns boundary entries the
/// outside-branch derivative — the behaviour of a naive implementation whose
/// interval closes exactly onto the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
enum Boundary {
    #[default]
    Open,
    Closed,
}

/// Descriptor of one synapse nonlinearity, applied elementwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub kind: ActivationKind,
    /// Leak slope for `phase_lrelu` / `phase_erelu`; unused otherwise.
    #[serde(default)]
    pub slope_k: f64,
    /// Rotation factor ε ∈ [0, 1) widening the pass interval; phase family only.
    #[serde(default)]
    pub rotation_eps: f64,
    #[serde(skip)]
    boundary: Boundary,
}

impl Activation {
    fn new(kind: ActivationKind, slope_k: f64, rotation_eps: f64) -> Self {
        assert!(slope_k.is_finite(), "slope k must be finite");
        assert!(
            (0.0..1.0).contains(&rotation_eps),
            "rotation ε must lie in [0, 1)"
        );
        Self {
            kind,
            slope_k,
            rotation_eps,
            boundary: Boundary::Open,
        }
    }

    pub fn identity() -> Self {
        Self::new(ActivationKind::Identity, 0.0, 0.0)
    }

    pub fn complex_sigmoid() -> Self {
        Self::new(ActivationKind::ComplexSigmoid, 0.0, 0.0)
    }

    pub fn complex_tanh() -> Self {
        Self::new(ActivationKind::ComplexTanh, 0.0, 0.0)
    }

    pub fn phase_relu(rotation_eps: f64) -> Self {
        Self::new(ActivationKind::PhaseRelu, 0.0, rotation_eps)
    }

    pub fn phase_lrelu(slope_k: f64, rotation_eps: f64) -> Self {
        Self::new(ActivationKind::PhaseLrelu, slope_k, rotation_eps)
    }

    pub fn phase_erelu(slope_k: f64, rotation_eps: f64) -> Self {
        Self::new(ActivationKind::PhaseErelu, slope_k, rotation_eps)
    }

    /// Diagnostic variant that runs the boundary-touching configuration
    /// silently: no [`ActivationError::BoundaryPoint`] is raised, so entries
    /// whose argument sits exactly on an interval endpoint are cut by the
    /// strictly-open pass test and receive the outside-branch derivative.
    /// This reproduces what a naive implementation does when the interval
    /// closes onto the data phase. Not used by any production path.
    pub fn with_closed_boundary(mut self) -> Self {
        self.boundary = Boundary::Closed;
        self
    }

    pub fn is_phase_family(&self) -> bool {
        matches!(
            self.kind,
            ActivationKind::PhaseRelu | ActivationKind::PhaseLrelu | ActivationKind::PhaseErelu
        )
    }

    /// Half-width of the pass interval, `π/(2 − ε)`.
    pub fn pass_half_width(&self) -> f64 {
        PI / (2.0 - self.rotation_eps)
    }

    fn in_pass_interval(&self, arg: f64) -> bool {
        let hw = self.pass_half_width();
        arg > -hw && arg < hw
    }

    fn boundary_check(&self, index: usize, arg: f64) -> Result<(), ActivationError> {
        if self.boundary == Boundary::Closed {
            return Ok(());
        }
        let hw = self.pass_half_width();
        if (arg - hw).abs() < BOUNDARY_TOL || (arg + hw).abs() < BOUNDARY_TOL {
            return Err(ActivationError::BoundaryPoint { index, arg });
        }
        Ok(())
    }

    /// Applies the activation elementwise.
    pub fn apply(&self, z: &CVector) -> Result<CVector, ActivationError> {
        let mut out = Vec::with_capacity(z.dim());
        for (index, &zi) in z.data.iter().enumerate() {
            out.push(match self.kind {
                ActivationKind::Identity => zi,
                ActivationKind::ComplexSigmoid => sigmoid(zi, index)?,
                ActivationKind::ComplexTanh => tanh(zi, index)?,
                ActivationKind::PhaseRelu
                | ActivationKind::PhaseLrelu
                | ActivationKind::PhaseErelu => self.apply_phase(zi),
            });
        }
        Ok(CVector::new(out))
    }

    fn apply_phase(&self, zi: Complex64) -> Complex64 {
        // arg(0) is undefined; exact zeros deterministically map to zero.
        if zi == Complex64::new(0.0, 0.0) {
            return zi;
        }
        if self.in_pass_interval(zi.arg()) {
            return zi;
        }
        let k = Complex64::new(self.slope_k, 0.0);
        match self.kind {
            ActivationKind::PhaseRelu => Complex64::new(0.0, 0.0),
            ActivationKind::PhaseLrelu => k * zi,
            ActivationKind::PhaseErelu => k * (zi.exp() - Complex64::new(1.0, 0.0)),
            _ => unreachable!("apply_phase called for a non-phase kind"),
        }
    }

    /// `f'(conj(z))` elementwise: the real-calculus derivative formula with
    /// its argument replaced by the conjugate. This is the factor the
    /// compatible backward pass multiplies into each delta.
    pub fn derivative_conjugate(&self, z: &CVector) -> Result<CVector, ActivationError> {
        let mut out = Vec::with_capacity(z.dim());
        for (index, &zi) in z.data.iter().enumerate() {
            let zc = zi.conj();
            out.push(match self.kind {
                ActivationKind::Identity => Complex64::new(1.0, 0.0),
                ActivationKind::ComplexSigmoid => {
                    let s = sigmoid(zc, index)?;
                    s * (Complex64::new(1.0, 0.0) - s)
                }
                ActivationKind::ComplexTanh => {
                    let t = tanh(zc, index)?;
                    Complex64::new(1.0, 0.0) - t * t
                }
                ActivationKind::PhaseRelu
                | ActivationKind::PhaseLrelu
                | ActivationKind::PhaseErelu => {
                    // The interval is symmetric, so arg(conj z) lies inside
                    // exactly when arg(z) does; test the un-conjugated entry.
                    self.phase_derivative(index, zi, |k| match self.kind {
                        ActivationKind::PhaseRelu => Complex64::new(0.0, 0.0),
                        ActivationKind::PhaseLrelu => k,
                        _ => k * zc.exp(),
                    })?
                }
            });
        }
        Ok(CVector::new(out))
    }

    /// `conj(f'(z))` for activations holomorphic on their branch domains:
    /// the identity and the phase family. Sigmoid and tanh are rejected.
    pub fn derivative_holomorphic(&self, z: &CVector) -> Result<CVector, ActivationError> {
        match self.kind {
            ActivationKind::ComplexSigmoid | ActivationKind::ComplexTanh => {
                return Err(ActivationError::Unsupported { kind: self.kind })
            }
            _ => {}
        }
        let mut out = Vec::with_capacity(z.dim());
        for (index, &zi) in z.data.iter().enumerate() {
            out.push(match self.kind {
                ActivationKind::Identity => Complex64::new(1.0, 0.0),
                _ => self.phase_derivative(index, zi, |k| match self.kind {
                    ActivationKind::PhaseRelu => Complex64::new(0.0, 0.0),
                    ActivationKind::PhaseLrelu => k.conj(),
                    _ => (k * zi.exp()).conj(),
                })?,
            });
        }
        Ok(CVector::new(out))
    }

    fn phase_derivative<F: FnOnce(Complex64) -> Complex64>(
        &self,
        index: usize,
        zi: Complex64,
        outside: F,
    ) -> Result<Complex64, ActivationError> {
        if zi == Complex64::new(0.0, 0.0) {
            // Outside-the-interval convention for the undefined arg(0).
            return Ok(Complex64::new(0.0, 0.0));
        }
        let arg = zi.arg();
        self.boundary_check(index, arg)?;
        if self.in_pass_interval(arg) {
            Ok(Complex64::new(1.0, 0.0))
        } else {
            Ok(outside(Complex64::new(self.slope_k, 0.0)))
        }
    }

    /// Maximum elementwise `|f(conj z) − conj(f(z))|`: zero for an exactly
    /// compatible activation.
    pub fn check_compatible(&self, z: &CVector) -> Result<f64, ActivationError> {
        let lhs = self.apply(&z.conj())?;
        let rhs = self.apply(z)?.conj();
        Ok((&lhs - &rhs).max_modulus())
    }
}

fn sigmoid(z: Complex64, index: usize) -> Result<Complex64, ActivationError> {
    let exp = (-z).exp();
    // `exp` overflows once Re z < −709 or so; the function itself tends to
    // zero there, so return the limit instead of letting inf reach `inv`.
    if !exp.re.is_finite() || !exp.im.is_finite() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let denom = Complex64::new(1.0, 0.0) + exp;
    let modulus = denom.norm();
    if modulus < POLE_TOL {
        return Err(ActivationError::PoleProximity { index, modulus });
    }
    Ok(denom.inv())
}

fn tanh(z: Complex64, index: usize) -> Result<Complex64, ActivationError> {
    let modulus = z.cosh().norm();
    if modulus < POLE_TOL {
        return Err(ActivationError::PoleProximity { index, modulus });
    }
    let t = z.tanh();
    // The double-angle form inside `Complex64::tanh` overflows once
    // |Re z| ≳ 355 even though the function tends to ±1; substitute the
    // limit whenever the formula degenerates.
    if !t.re.is_finite() || !t.im.is_finite() {
        return Ok(Complex64::new(z.re.signum(), 0.0));
    }
    Ok(t)
}
