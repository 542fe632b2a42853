//! Validated matrix types and the dense symmetric kernels everything else is
//! built on: eigendecomposition, SPD square roots, and the square root of the
//! non-symmetric product `A1 A2`.
//!
//! Every constructor symmetrizes its input before validating it, so the
//! stored entries are exactly symmetric.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_same_dim, Error, Result};

/// Relative positive-definiteness gate: `lambda_min > EPS_PD * lambda_max`.
pub const EPS_PD: f64 = 1e-12;

/// Diagonal shift added by [`random_spd`].
pub const RANDOM_SPD_SHIFT: f64 = 0.1;

const EIG_MAX_ITER: usize = 10_000;

/// Frobenius norm.
pub fn frob(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// `|a - b|_F / max(|a|_F, |b|_F)`, or the absolute difference when both are
/// (numerically) zero.
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = (a - b).norm();
    let scale = a.norm().max(b.norm());
    if scale < f64::MIN_POSITIVE {
        diff
    } else {
        diff / scale
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::Validation("empty matrix".into()));
    }
    Ok(m.nrows())
}

fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    // (a + b) * 0.5 is commutative in IEEE arithmetic, so the result is
    // bitwise symmetric.
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) * 0.5)
}

/// Symmetric part `(M + M^T) / 2` of a square matrix.
pub fn symmetrize(m: &DMatrix<f64>) -> Result<SymMatrix> {
    check_square(m)?;
    Ok(SymMatrix(sym_part(m)))
}

/// A symmetric `n x n` matrix; a tangent vector of SPD(n).
#[derive(Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Symmetrizes `m` and wraps it.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        symmetrize(&m)
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    /// The basis element `S^{p,q}` with ones at `(p, q)` and `(q, p)`
    /// (a single two at `(p, p)` when `p == q`). Indices are zero-based.
    pub fn basis(n: usize, p: usize, q: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(p, q)] += 1.0;
        m[(q, p)] += 1.0;
        SymMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SymMatrix").field(&self.0).finish()
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, k: f64) -> SymMatrix {
        SymMatrix(&self.0 * k)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix(-&self.0)
    }
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors of a
/// symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    /// Column `i` pairs with `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Q f(Lambda) Q^T`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(j).scale_mut(s);
        }
        sym_part(&(scaled * q.transpose()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map(|l| l)
    }
}

/// Symmetric eigendecomposition with ascending eigenvalues. Each eigenvector
/// is oriented so that its largest-magnitude entry is positive (first such
/// entry on ties).
pub fn eig_sym(s: &SymMatrix) -> Result<Spectrum> {
    eig_of(s.as_matrix())
}

fn eig_of(m: &DMatrix<f64>) -> Result<Spectrum> {
    let n = check_square(m)?;
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIG_MAX_ITER)
        .ok_or_else(|| {
            Error::Numeric(format!(
                "symmetric eigensolver did not converge (|M|_F = {:e})",
                m.norm()
            ))
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut lead = 0;
        for i in 1..n {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        eigenvectors.set_column(dst, &(col * sign));
    }

    let spec = Spectrum {
        eigenvalues,
        eigenvectors,
    };
    if !spec.eigenvalues.iter().all(|v| v.is_finite()) {
        let residual = (spec.reconstruct() - m).norm();
        return Err(Error::Numeric(format!(
            "non-finite eigenvalues (residual {residual:e})"
        )));
    }
    Ok(spec)
}

/// A validated symmetric positive-definite matrix, a point of SPD(n).
///
/// The eigendecomposition is computed once at construction and reused by
/// every operation that needs it.
#[derive(Clone, PartialEq)]
pub struct SpdMatrix {
    mat: DMatrix<f64>,
    spectrum: Spectrum,
}

impl SpdMatrix {
    /// Symmetrizes `m` and applies the relative positive-definiteness gate.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        let mat = sym_part(&m);
        let spectrum = eig_of(&mat)?;
        let (min, max) = (spectrum.min(), spectrum.max());
        if !(max > 0.0 && min > EPS_PD * max) {
            return Err(Error::NotPositiveDefinite { min, max });
        }
        Ok(SpdMatrix { mat, spectrum })
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0).expect("identity is SPD")
    }

    pub fn scaled_identity(n: usize, k: f64) -> Result<Self> {
        Self::new(DMatrix::identity(n, n) * k)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectrum.min()
    }

    pub fn lambda_max(&self) -> f64 {
        self.spectrum.max()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.spectrum.eigenvalues().iter().product()
    }

    /// The unique SPD square root.
    pub fn sqrt(&self) -> SpdMatrix {
        self.with_spectrum(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> DMatrix<f64> {
        self.spectrum.map(|l| 1.0 / l.sqrt())
    }

    pub fn inverse(&self) -> SpdMatrix {
        self.with_spectrum(|l| 1.0 / l)
    }

    /// `k A` for `k > 0`, reusing the eigenvectors.
    pub fn scale(&self, k: f64) -> Result<SpdMatrix> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Validation(format!("scale factor {k} must be positive")));
        }
        Ok(SpdMatrix {
            mat: &self.mat * k,
            spectrum: Spectrum {
                eigenvalues: &self.spectrum.eigenvalues * k,
                eigenvectors: self.spectrum.eigenvectors.clone(),
            },
        })
    }

    /// Applies a positive function to the eigenvalues; the eigenvectors are
    /// shared, so no further eigensolve happens.
    fn with_spectrum(&self, f: impl Fn(f64) -> f64) -> SpdMatrix {
        let mut pairs: Vec<(f64, usize)> = self
            .spectrum
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| (f(l), i))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = pairs.len();
        let eigenvalues = DVector::from_iterator(n, pairs.iter().map(|p| p.0));
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (dst, &(_, src)) in pairs.iter().enumerate() {
            eigenvectors.set_column(dst, &self.spectrum.eigenvectors.column(src));
        }
        let spectrum = Spectrum {
            eigenvalues,
            eigenvectors,
        };
        SpdMatrix {
            mat: spectrum.reconstruct(),
            spectrum,
        }
    }
}

impl fmt::Debug for SpdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SpdMatrix").field(&self.mat).finish()
    }
}

/// `sqrt_spd(A)`.
pub fn sqrt_spd(a: &SpdMatrix) -> SpdMatrix {
    a.sqrt()
}

/// Square root of the non-symmetric product `A1 A2`, taken as
/// `A1^{1/2} (A1^{1/2} A2 A1^{1/2})^{1/2} A1^{-1/2}`.
///
/// `A1 A2` is similar to an SPD matrix, so the result has a strictly positive
/// real spectrum. The transpose of the result is `(A2 A1)^{1/2}`.
pub fn sqrt_product(a1: &SpdMatrix, a2: &SpdMatrix) -> Result<DMatrix<f64>> {
    ensure_same_dim(a1.dim(), a2.dim())?;
    let s = a1.sqrt();
    let s = s.as_matrix();
    let inner = sym_part(&(s * a2.as_matrix() * s));
    let root = eig_of(&inner)?.map(|l| l.max(0.0).sqrt());
    Ok(s * root * a1.inv_sqrt())
}

/// An invertible `n x n` matrix in the total space GL(n), projecting to
/// `L^T L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftMatrix(DMatrix<f64>);

impl LiftMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        let det = m.determinant();
        if !(det.abs() > EPS_PD) {
            return Err(Error::Degenerate(format!("|det| = {:e}", det.abs())));
        }
        Ok(LiftMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        LiftMatrix(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

impl From<&SpdMatrix> for LiftMatrix {
    /// The symmetric-root lift `A^{1/2}`.
    fn from(a: &SpdMatrix) -> Self {
        LiftMatrix(a.sqrt().into_matrix())
    }
}

/// Tolerance on `|O^T O - I|_F` accepted by [`Orthogonal::new`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// An orthogonal matrix `O`, `O^T O = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orthogonal(DMatrix<f64>);

impl Orthogonal {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, ORTHOGONALITY_TOL)
    }

    pub fn with_tolerance(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = check_square(&m)?;
        let residual = (m.transpose() * &m - DMatrix::identity(n, n)).norm();
        if !(residual <= tol) {
            return Err(Error::NotOrthogonal { residual });
        }
        Ok(Orthogonal(m))
    }

    pub fn identity(n: usize) -> Self {
        Orthogonal(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn compose(&self, other: &Orthogonal) -> Result<Orthogonal> {
        ensure_same_dim(self.dim(), other.dim())?;
        Ok(Orthogonal(&self.0 * &other.0))
    }
}

/// Deterministic generator used by the random constructors.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

/// `M^T M + 0.1 I` with standard normal `M`.
pub fn random_spd_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SpdMatrix {
    let m = gaussian_matrix(rng, n);
    let a = m.transpose() * &m + DMatrix::identity(n, n) * RANDOM_SPD_SHIFT;
    SpdMatrix::new(a).expect("shifted Gram matrix is SPD")
}

pub fn random_spd(n: usize, seed: u64) -> SpdMatrix {
    random_spd_with(&mut seeded_rng(seed), n)
}

/// Symmetric part of a standard normal matrix.
pub fn random_symmetric_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    SymMatrix(sym_part(&gaussian_matrix(rng, n)))
}

pub fn random_symmetric(n: usize, seed: u64) -> SymMatrix {
    random_symmetric_with(&mut seeded_rng(seed), n)
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// diagonal of R made positive).
pub fn random_orthogonal_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Orthogonal {
    let qr = gaussian_matrix(rng, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Orthogonal(q)
}

pub fn random_orthogonal(n: usize, seed: u64) -> Orthogonal {
    random_orthogonal_with(&mut seeded_rng(seed), n)
}
