//! The operator `Gamma_A[X]`: the unique solution of `A G + G A = X` for
//! SPD `A`, computed in the eigenbasis of `A`.
//!
//! With `A = Q diag(lambda) Q^T` and `C = Q^T X Q`, the solution is
//! `Q E Q^T` where `E_ij = C_ij / (lambda_i + lambda_j)`.

use nalgebra::DMatrix;

use crate::error::{ensure_same_dim, Result};
use crate::matcore::{SpdMatrix, SymMatrix};

/// Solution of the Sylvester equation together with its residual
/// `|A G + G A - X|_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaResult {
    pub value: SymMatrix,
    pub residual: f64,
}

/// Residual bound `1e-10 * (1 + |X|_F)` expected of every [`gamma`] call.
pub fn residual_bound(x: &SymMatrix) -> f64 {
    1e-10 * (1.0 + x.norm_fro())
}

/// Eigenbasis solve for an arbitrary right-hand side. Linear in `rhs`, so
/// symmetric input gives symmetric output and antisymmetric input gives
/// antisymmetric output.
pub(crate) fn solve(a: &SpdMatrix, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let spec = a.spectrum();
    let q = spec.eigenvectors();
    let lam = spec.eigenvalues();
    let mut e = q.transpose() * rhs * q;
    let n = lam.len();
    for j in 0..n {
        for i in 0..n {
            e[(i, j)] /= lam[i] + lam[j];
        }
    }
    q * e * q.transpose()
}

pub(crate) fn solve_sym(a: &SpdMatrix, x: &SymMatrix) -> SymMatrix {
    let g = solve(a, x.as_matrix());
    SymMatrix::new(g).expect("square by construction")
}

/// `Gamma_A[X]` with its defining-equation residual.
pub fn gamma(a: &SpdMatrix, x: &SymMatrix) -> Result<GammaResult> {
    ensure_same_dim(a.dim(), x.dim())?;
    let value = solve_sym(a, x);
    let am = a.as_matrix();
    let g = value.as_matrix();
    let residual = (am * g + g * am - x.as_matrix()).norm();
    Ok(GammaResult { value, residual })
}

/// `Gamma_{A^{-1}}[X]`, evaluated as `A Gamma_A[X] A` without inverting `A`.
pub fn gamma_inverse_point(a: &SpdMatrix, x: &SymMatrix) -> Result<SymMatrix> {
    ensure_same_dim(a.dim(), x.dim())?;
    let g = solve_sym(a, x);
    let am = a.as_matrix();
    Ok(SymMatrix::new(am * g.as_matrix() * am).expect("square"))
}
