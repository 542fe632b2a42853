//! Riemannian and sectional curvature of the Wasserstein metric, closed-form
//! sectional curvatures on the basis `S^{p,q}` at a diagonal point, bounds,
//! and scalar curvature.
//!
//! Scalar curvature here follows the aggregate
//! `rho = sum_p sum_{r >= p} sum_t K(S^{p,r}, S^{r,t})` over the eigenbasis,
//! which is not the usual `sum_{i != j} K(e_i, e_j)` over an orthonormal
//! basis: at the 2x2 identity it gives 9/4 where the usual convention gives 3.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::connection::tensor_t_at;
use crate::error::{ensure_same_dim, Error, Result};
use crate::geodesy::radius;
use crate::matcore::{SpdMatrix, SymMatrix};
use crate::metric::inner;
use crate::sylvester::{solve, solve_sym};

/// Lower bound on the Gram determinant of a section.
pub const MIN_GRAM: f64 = 1e-12;

/// Index pair of the symmetric basis element `S^{p,q}`, zero-based, with
/// `p <= q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    p: usize,
    q: usize,
}

impl BasisIndex {
    /// Orders the pair, since `S^{a,b} = S^{b,a}`.
    pub fn new(a: usize, b: usize) -> Self {
        BasisIndex {
            p: a.min(b),
            q: a.max(b),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn matrix(&self, n: usize) -> SymMatrix {
        SymMatrix::basis(n, self.p, self.q)
    }

    /// All `n (n + 1) / 2` indices in lexicographic order.
    pub fn all(n: usize) -> Vec<BasisIndex> {
        (0..n).flat_map(|p| (p..n).map(move |q| BasisIndex { p, q })).collect()
    }
}

/// `R(X, Y, X, Y) = 3 tr(Gamma[X] A Gamma[Gamma[X] Gamma[Y] - Gamma[Y] Gamma[X]] A Gamma[Y])`.
pub fn curvature_value(a: &SpdMatrix, x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    ensure_same_dim(a.dim(), x.dim())?;
    ensure_same_dim(a.dim(), y.dim())?;
    let gx = solve_sym(a, x).into_matrix();
    let gy = solve_sym(a, y).into_matrix();
    let comm = &gx * &gy - &gy * &gx;
    let am = a.as_matrix();
    Ok(3.0 * (&gx * am * solve(a, &comm) * am * &gy).trace())
}

/// `3 |T_{A^{1/2}}(X, Y)|_F^2`, the vertical-tensor form of
/// [`curvature_value`].
pub fn curvature_from_tensor(a: &SpdMatrix, x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    ensure_same_dim(a.dim(), x.dim())?;
    ensure_same_dim(a.dim(), y.dim())?;
    let root = a.sqrt().into_matrix();
    Ok(3.0 * tensor_t_at(&root, a, x, y).norm_squared())
}

/// Gram determinant `g(X,X) g(Y,Y) - g(X,Y)^2` of the section spanned by
/// `X` and `Y`.
pub fn gram(a: &SpdMatrix, x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    let xx = inner(a, x, x)?;
    let yy = inner(a, y, y)?;
    let xy = inner(a, x, y)?;
    Ok(xx * yy - xy * xy)
}

/// Sectional curvature of `span{X, Y}` at `A`.
pub fn sectional(a: &SpdMatrix, x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    let g = gram(a, x, y)?;
    if !(g > MIN_GRAM) {
        return Err(Error::Degenerate(format!("section Gram determinant {g:e}")));
    }
    Ok(curvature_value(a, x, y)? / g)
}

fn check_spectrum(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::Validation("empty spectrum".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::Validation(format!("non-positive eigenvalue {l}")));
    }
    Ok(())
}

/// The matched pattern `p != q = r, p != t` (after relabeling) and its
/// curvature, or `None` when the section is flat.
fn basis_pattern(lambdas: &[f64], s1: BasisIndex, s2: BasisIndex) -> Option<(usize, usize, f64)> {
    let flips = |s: BasisIndex| [(s.p, s.q), (s.q, s.p)];
    for (a, b) in [(s1, s2), (s2, s1)] {
        for (p, q) in flips(a) {
            for (r, t) in flips(b) {
                if p != q && q == r && p != t {
                    let delta = if r == t { 1.0 } else { 0.0 };
                    let (lp, lr, lt) = (lambdas[p], lambdas[r], lambdas[t]);
                    let k = 3.0 * (1.0 + delta) * lp * lt / ((lp + lr) * (lr + lt) * (lp + lt));
                    return Some((p, t, k));
                }
            }
        }
    }
    None
}

/// Closed-form sectional curvature `K(S1, S2)` at `diag(lambdas)`.
pub fn sectional_basis(lambdas: &[f64], s1: BasisIndex, s2: BasisIndex) -> Result<f64> {
    check_spectrum(lambdas)?;
    let n = lambdas.len();
    if s1.q >= n || s2.q >= n {
        return Err(Error::Validation(format!(
            "basis index out of range for dimension {n}"
        )));
    }
    if s1 == s2 {
        return Err(Error::Degenerate("section spanned by a single basis element".into()));
    }
    Ok(basis_pattern(lambdas, s1, s2).map_or(0.0, |(_, _, k)| k))
}

/// Scalar curvature from the eigenvalues of `A`:
/// `3 tr(2 L U U^T + L U^T U + L U (U + U^T) L (U + U^T))` with
/// `U_ij = 1 / (lambda_i + lambda_j)` for `i < j`.
///
/// The expression is not symmetric in the eigenvalues; they are taken in
/// ascending order, which makes the result a function of `A` alone.
pub fn scalar_curvature(a: &SpdMatrix) -> f64 {
    scalar_from_eigenvalues(a.spectrum().eigenvalues())
}

fn scalar_from_eigenvalues(lam: &[f64]) -> f64 {
    let n = lam.len();
    let u = DMatrix::from_fn(n, n, |i, j| if i < j { 1.0 / (lam[i] + lam[j]) } else { 0.0 });
    let l = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(lam));
    let w = &u + u.transpose();
    let total = (&l * &u * u.transpose()) * 2.0 + &l * u.transpose() * &u + &l * &u * &w * &l * &w;
    3.0 * total.trace()
}

/// Triple-sum form of the scalar curvature, evaluated term by term with the
/// eigenvalues in the order given.
pub fn scalar_sum_oracle(lambdas: &[f64]) -> Result<f64> {
    check_spectrum(lambdas)?;
    let n = lambdas.len();
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut sum = 0.0;
    for p in 0..n {
        for r in p..n {
            for t in 0..n {
                let (lp, lr, lt) = (lambdas[p], lambdas[r], lambdas[t]);
                sum += lp * (1.0 + d(p, r)) / (lp + lr)
                    * ((1.0 + d(r, t)) / (lr + lt))
                    * (lt * (1.0 - d(t, p)) / (lt + lp));
            }
        }
    }
    Ok(3.0 * sum)
}

/// Pointwise curvature summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub eigenvalues: Vec<f64>,
    pub scalar_curvature: f64,
    pub max_basis_sectional: f64,
    /// Zero when every basis section is flat (in particular for n = 1).
    pub min_nonzero_basis_sectional: f64,
    pub radius: f64,
}

/// Sectional curvature of every unordered pair of distinct basis elements at
/// `diag(lambdas)`.
pub fn basis_sectionals(lambdas: &[f64]) -> Result<Vec<(BasisIndex, BasisIndex, f64)>> {
    check_spectrum(lambdas)?;
    let idx = BasisIndex::all(lambdas.len());
    let mut out = Vec::with_capacity(idx.len() * idx.len().saturating_sub(1) / 2);
    for (i, &s1) in idx.iter().enumerate() {
        for &s2 in &idx[i + 1..] {
            out.push((s1, s2, sectional_basis(lambdas, s1, s2)?));
        }
    }
    Ok(out)
}

/// Enumerates the basis sectional curvatures at the eigenvalues of `A` and
/// checks them against `0 <= K < 3 / lambda_min` and, for the non-flat
/// pattern, `K < 3 / (lambda_p + lambda_t)`.
pub fn curvature_report(a: &SpdMatrix) -> Result<CurvatureReport> {
    let lam = a.spectrum().eigenvalues();
    let cap = 3.0 / a.lambda_min();
    let idx = BasisIndex::all(lam.len());
    let mut max_k: f64 = 0.0;
    let mut min_nonzero = f64::INFINITY;
    for (i, &s1) in idx.iter().enumerate() {
        for &s2 in &idx[i + 1..] {
            let Some((p, t, k)) = basis_pattern(lam, s1, s2) else {
                continue;
            };
            if !(k >= 0.0 && k < cap) {
                return Err(Error::Consistency(format!(
                    "K({s1:?}, {s2:?}) = {k} outside [0, {cap})"
                )));
            }
            let pair_cap = 3.0 / (lam[p] + lam[t]);
            if k > pair_cap {
                return Err(Error::Consistency(format!(
                    "K({s1:?}, {s2:?}) = {k} exceeds 3/(l_p + l_t) = {pair_cap}"
                )));
            }
            max_k = max_k.max(k);
            if k > 0.0 {
                min_nonzero = min_nonzero.min(k);
            }
        }
    }
    Ok(CurvatureReport {
        eigenvalues: lam.to_vec(),
        scalar_curvature: scalar_curvature(a),
        max_basis_sectional: max_k,
        min_nonzero_basis_sectional: if min_nonzero.is_finite() { min_nonzero } else { 0.0 },
        radius: radius(a),
    })
}
