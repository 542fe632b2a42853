//! Independent reference computations used only for verification (tests and
//! the `check` command). Nothing on the main computational path calls into
//! this module.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves `A G + G A = X` through the Kronecker form
/// `(I ⊗ A + A^T ⊗ I) vec(G) = vec(X)` with a dense LU factorization.
///
/// Works for any square `A` with no eigenvalue pair summing to zero, and any
/// (not necessarily symmetric) right-hand side. O(n^6).
pub fn sylvester_kron(a: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || x.nrows() != n || x.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: x.nrows(),
        });
    }
    let id = DMatrix::<f64>::identity(n, n);
    let op = id.kronecker(a) + a.transpose().kronecker(&id);
    let rhs = DVector::from_column_slice(x.as_slice());
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular Kronecker system".into()))?;
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

/// Composite Simpson rule on `[a, b]` with `panels` subintervals (rounded up
/// to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Central difference of a matrix-valued curve.
pub fn central_difference(
    f: impl Fn(f64) -> Result<DMatrix<f64>>,
    t: f64,
    h: f64,
) -> Result<DMatrix<f64>> {
    Ok((f(t + h)? - f(t - h)?) / (2.0 * h))
}
