//! The Wasserstein metric on SPD(n), the closed-form distance, and the
//! bundle projection `sigma(L) = L^T L` from GL(n) with the Euclidean metric.

use nalgebra::DMatrix;

use crate::error::{ensure_same_dim, Error, Result};
use crate::matcore::{sqrt_product, LiftMatrix, Orthogonal, SpdMatrix, SymMatrix};
use crate::sylvester::solve_sym;

/// Round-off allowance below zero for squared quantities (inner products,
/// the distance trace) before they are treated as errors.
pub const NEGATIVE_ROUNDOFF: f64 = 1e-12;

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `g_A(X, Y) = tr(Gamma_A[Y] X) / 2`.
pub fn inner(a: &SpdMatrix, x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    ensure_same_dim(a.dim(), x.dim())?;
    ensure_same_dim(a.dim(), y.dim())?;
    let gy = solve_sym(a, y);
    // tr(S T) for symmetric S, T is the entrywise dot product.
    Ok(0.5 * dot(gy.as_matrix(), x.as_matrix()))
}

pub fn norm(a: &SpdMatrix, x: &SymMatrix) -> Result<f64> {
    let sq = inner(a, x, x)?;
    if sq < -NEGATIVE_ROUNDOFF {
        return Err(Error::Numeric(format!("negative squared norm {sq:e}")));
    }
    Ok(sq.max(0.0).sqrt())
}

/// Squared distance `tr(A1 + A2 - 2 (A1 A2)^{1/2})` before clamping.
pub fn distance_squared(a1: &SpdMatrix, a2: &SpdMatrix) -> Result<f64> {
    ensure_same_dim(a1.dim(), a2.dim())?;
    if a1.as_matrix() == a2.as_matrix() {
        return Ok(0.0);
    }
    let root = sqrt_product(a1, a2)?;
    Ok(a1.trace() + a2.trace() - 2.0 * root.trace())
}

/// Bures-Wasserstein distance between zero-mean Gaussians with covariances
/// `A1` and `A2`.
pub fn distance(a1: &SpdMatrix, a2: &SpdMatrix) -> Result<f64> {
    let sq = distance_squared(a1, a2)?;
    if sq < -NEGATIVE_ROUNDOFF {
        return Err(Error::Numeric(format!("negative distance trace {sq:e}")));
    }
    Ok(sq.max(0.0).sqrt())
}

/// `sigma(L) = L^T L`.
pub fn project(l: &LiftMatrix) -> Result<SpdMatrix> {
    let m = l.as_matrix();
    SpdMatrix::new(m.transpose() * m).map_err(|e| match e {
        Error::NotPositiveDefinite { min, max } => Error::Degenerate(format!(
            "projection fails the SPD gate (eigenvalues in [{min:e}, {max:e}])"
        )),
        other => other,
    })
}

/// Horizontal lift `L Gamma_A[X]` of `X` at `L`, with `A = sigma(L)`.
pub fn horizontal_lift(l: &LiftMatrix, x: &SymMatrix) -> Result<DMatrix<f64>> {
    ensure_same_dim(l.dim(), x.dim())?;
    let a = project(l)?;
    Ok(horizontal_lift_at(l, &a, x))
}

pub(crate) fn horizontal_lift_at(l: &LiftMatrix, a: &SpdMatrix, x: &SymMatrix) -> DMatrix<f64> {
    l.as_matrix() * solve_sym(a, x).as_matrix()
}

/// Push-forward `d sigma_L(V) = V^T L + L^T V`.
pub fn dsigma(l: &LiftMatrix, v: &DMatrix<f64>) -> Result<SymMatrix> {
    ensure_same_dim(l.dim(), v.nrows())?;
    ensure_same_dim(l.dim(), v.ncols())?;
    let lm = l.as_matrix();
    SymMatrix::new(v.transpose() * lm + lm.transpose() * v)
}

/// Orthogonal action `O A O^T`.
pub fn act(o: &Orthogonal, a: &SpdMatrix) -> Result<SpdMatrix> {
    ensure_same_dim(o.dim(), a.dim())?;
    let om = o.as_matrix();
    SpdMatrix::new(om * a.as_matrix() * om.transpose())
}

/// Differential of the orthogonal action on tangent vectors, `O X O^T`.
pub fn act_tangent(o: &Orthogonal, x: &SymMatrix) -> Result<SymMatrix> {
    ensure_same_dim(o.dim(), x.dim())?;
    let om = o.as_matrix();
    SymMatrix::new(om * x.as_matrix() * om.transpose())
}
