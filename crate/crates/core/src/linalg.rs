//! Dense complex linear algebra: row-major matrices and vectors over
//! `Complex64`, seeded random initializers, unitarity diagnostics, and the
//! matrix exponential of skew-Hermitian generators.
//!
//! The exponential goes through the Hermitian eigendecomposition of `i·G`, so
//! its output is unitary up to roundoff by construction. nalgebra supplies the
//! eigen/SVD factorizations as a private backend; every public type stays a
//! plain row-major buffer that is cheap to inspect, serialize and compare.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use thiserror::Error;

/// Relative skewness gate: a generator is accepted when
/// `‖G + G^H‖_F ≤ TOL_SKEW_REL · ‖G‖_F`.
pub const TOL_SKEW_REL: f64 = 1e-8;
/// Absolute Frobenius tolerance below which a matrix counts as unitary.
pub const TOL_UNITARY: f64 = 1e-10;
/// Smallest singular value [`reorthonormalize`] accepts before declaring the
/// input singular.
pub const TOL_SINGULAR: f64 = 1e-14;

const FACTOR_MAX_ITER: usize = 10_000;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not skew-Hermitian: ‖G + G^H‖_F = {defect:.3e} exceeds {tol:.3e}")]
    NotSkewHermitian { defect: f64, tol: f64 },
    #[error("Hermitian eigendecomposition did not converge")]
    EigenFailure,
    #[error("matrix is numerically singular: smallest singular value {sigma_min:.3e}")]
    SingularMatrix { sigma_min: f64 },
}

/// Column vector of complex scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    pub data: Vec<Complex64>,
}

impl CVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            data: values.iter().map(|&re| Complex64::new(re, 0.0)).collect(),
        }
    }

    /// Builds `moduli[i]·exp(i·phases[i])` entrywise.
    pub fn from_polar(moduli: &[f64], phases: &[f64]) -> Self {
        assert_eq!(moduli.len(), phases.len(), "polar parts length mismatch");
        Self {
            data: moduli
                .iter()
                .zip(phases)
                .map(|(&m, &p)| Complex64::from_polar(m, p))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> Self {
        Self {
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "hadamard dimension mismatch");
        Self {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.data[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim(), "vector add dimension mismatch");
        CVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim(), "vector sub dimension mismatch");
        CVector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == ncols),
            "ragged rows in matrix literal"
        );
        Self {
            rows: rows.len(),
            cols: ncols,
            data: rows.concat(),
        }
    }

    /// Outer product `u·v^H`: `result[i][j] = u[i]·conj(v[j])`.
    pub fn outer(u: &CVector, v: &CVector) -> Self {
        Self::from_fn(u.dim(), v.dim(), |i, j| u[i] * v[j].conj())
    }

    /// Uniform random entries: real and imaginary parts independent in
    /// `(-scale, scale)`. Used for unconstrained (non-square) layers, where
    /// the unitary schemes of [`random_unitary`] do not apply.
    pub fn random_uniform(rows: usize, cols: usize, seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(rows, cols, |_, _| {
            Complex64::new(
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
            )
        })
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A^H`: transpose with entrywise conjugation.
    pub fn hermitian_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matvec(&self, x: &CVector) -> CVector {
        assert_eq!(self.cols, x.dim(), "matvec dimension mismatch");
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in self.row(i).iter().zip(&x.data) {
                acc += a * b;
            }
            out.push(acc);
        }
        CVector::new(out)
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut data = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            let out_row = &mut data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                let other_row = other.row(k);
                for (o, b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        CMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, other: &CMatrix) -> CMatrix {
        self.matmul(other)
    }
}

impl Mul<&CVector> for &CMatrix {
    type Output = CVector;
    fn mul(self, x: &CVector) -> CVector {
        self.matvec(x)
    }
}

/// Weight-initialization recipes. The `*_unitary` kinds return exactly
/// unitary matrices (up to roundoff); the remaining kinds return the
/// documented entrywise random fill without a unitarity guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Unitary polar factor of a complex Gaussian matrix.
    SvdGaussianUnitary,
    /// `i·Q` for a real orthogonal `Q`: every entry purely imaginary.
    PureImaginaryUnitary,
    /// Rayleigh moduli with uniform phases, projected onto the unitary group.
    TrabelsiUnitary,
    /// Independent uniform(-1, 1) real and imaginary parts.
    SeparateUniform,
    /// Unit modulus, phase uniform in (-π, π].
    PhaseOnlyUniform,
    /// Zero real part, imaginary part uniform in (-1, 1).
    ImaginaryUniform,
}

/// Seeded recipe for a random weight matrix; the seed fully determines the
/// result (bit-reproducible).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitScheme {
    pub kind: InitKind,
    pub seed: u64,
    /// Modulus variance for [`InitKind::TrabelsiUnitary`]; ignored otherwise.
    #[serde(default = "default_amplitude_variance")]
    pub amplitude_variance: f64,
}

fn default_amplitude_variance() -> f64 {
    1.0
}

impl InitScheme {
    pub fn new(kind: InitKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            amplitude_variance: default_amplitude_variance(),
        }
    }

    pub fn with_amplitude_variance(mut self, amplitude_variance: f64) -> Self {
        self.amplitude_variance = amplitude_variance;
        self
    }
}

/// One draw from N(0, 1) via Box–Muller.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]: keeps ln finite
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Phase uniform in (-π, π].
fn uniform_phase(rng: &mut ChaCha8Rng) -> f64 {
    PI - 2.0 * PI * rng.gen::<f64>()
}

/// Real orthogonal polar factor of a real Gaussian matrix.
fn real_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> nalgebra::DMatrix<f64> {
    let a = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| standard_normal(rng));
    let svd = a.svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Draws an `n×n` matrix according to `scheme`. Same seed, same matrix,
/// bit for bit.
pub fn random_unitary(n: usize, scheme: &InitScheme) -> CMatrix {
    assert!(n >= 1, "random_unitary needs n >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(scheme.seed);
    match scheme.kind {
        InitKind::SvdGaussianUnitary => {
            let a = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng))
            });
            polar_unitary_factor(&a)
                .expect("Gaussian matrices are almost surely well-conditioned")
        }
        InitKind::PureImaginaryUnitary => {
            let q = real_orthogonal(n, &mut rng);
            CMatrix::from_fn(n, n, |i, j| Complex64::new(0.0, q[(i, j)]))
        }
        InitKind::TrabelsiUnitary => {
            let sigma = scheme.amplitude_variance.sqrt();
            let a = CMatrix::from_fn(n, n, |_, _| {
                // Rayleigh(σ) modulus by inverse CDF, uniform phase.
                let u: f64 = 1.0 - rng.gen::<f64>();
                let modulus = sigma * (-2.0 * u.ln()).sqrt();
                Complex64::from_polar(modulus, uniform_phase(&mut rng))
            });
            polar_unitary_factor(&a)
                .expect("Rayleigh-modulus matrices are almost surely well-conditioned")
        }
        InitKind::SeparateUniform => CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }),
        InitKind::PhaseOnlyUniform => {
            CMatrix::from_fn(n, n, |_, _| Complex64::from_polar(1.0, uniform_phase(&mut rng)))
        }
        InitKind::ImaginaryUniform => {
            CMatrix::from_fn(n, n, |_, _| Complex64::new(0.0, rng.gen_range(-1.0..1.0)))
        }
    }
}

/// `‖U·U^H − I‖_F`: zero exactly when `U` is unitary.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    assert!(u.is_square(), "unitarity_defect needs a square matrix");
    let uuh = u.matmul(&u.hermitian_transpose());
    let mut acc = 0.0;
    for i in 0..uuh.rows {
        for j in 0..uuh.cols {
            let expected = if i == j { 1.0 } else { 0.0 };
            let d = uuh[(i, j)] - Complex64::new(expected, 0.0);
            acc += d.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Unitary polar factor of `u`: the closest unitary matrix in Frobenius
/// distance. Cleans up drift accumulated over long runs of multiplicative
/// updates.
pub fn reorthonormalize(u: &CMatrix) -> Result<CMatrix, LinalgError> {
    assert!(u.is_square(), "reorthonormalize needs a square matrix");
    polar_unitary_factor(u)
}

fn polar_unitary_factor(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let na = to_na(a);
    let svd = nalgebra::linalg::SVD::try_new(na, true, true, f64::EPSILON, FACTOR_MAX_ITER)
        .ok_or(LinalgError::EigenFailure)?;
    let sigma_min = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |m, &s| m.min(s));
    if sigma_min < TOL_SINGULAR {
        return Err(LinalgError::SingularMatrix { sigma_min });
    }
    let q = svd.u.unwrap() * svd.v_t.unwrap();
    Ok(from_na(&q))
}

/// `exp(−step·G)` for skew-Hermitian `G`, through the Hermitian
/// eigendecomposition `i·G = V·diag(λ)·V^H`:
///
/// `exp(−step·G) = V·diag(exp(i·step·λ))·V^H`
///
/// The eigenvector basis is unitary and the phases have unit modulus, so the
/// result is unitary up to roundoff regardless of `step`.
pub fn expm_skew_hermitian(g: &CMatrix, step: f64) -> Result<CMatrix, LinalgError> {
    assert!(g.is_square(), "expm_skew_hermitian needs a square matrix");
    let defect = (g + &g.hermitian_transpose()).frobenius_norm();
    let tol = TOL_SKEW_REL * g.frobenius_norm();
    if defect > tol {
        return Err(LinalgError::NotSkewHermitian { defect, tol });
    }
    if step == 0.0 {
        // exp(0) is the identity exactly; skip the factorization so callers
        // observe bit-identical weights for a zero step.
        return Ok(CMatrix::identity(g.rows));
    }
    let n = g.rows;
    let i_unit = Complex64::new(0.0, 1.0);
    let mut h = nalgebra::DMatrix::<Complex64>::from_fn(n, n, |i, j| i_unit * g[(i, j)]);
    // iG is Hermitian up to the accepted skew defect; scrub the residue so the
    // factorization sees an exactly Hermitian input.
    h = (h.adjoint() + &h).scale(0.5);
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h, f64::EPSILON, FACTOR_MAX_ITER)
        .ok_or(LinalgError::EigenFailure)?;
    let v = eig.eigenvectors;
    let phases = nalgebra::DMatrix::from_diagonal(
        &eig.eigenvalues.map(|l| Complex64::from_polar(1.0, step * l)),
    );
    let result = &v * phases * v.adjoint();
    Ok(from_na(&result))
}

fn to_na(m: &CMatrix) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(m.rows, m.cols, |i, j| m[(i, j)])
}

fn from_na(m: &nalgebra::DMatrix<Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}
