//! Levi-Civita connection of the Wasserstein metric and the vertical tensor
//! `T(X, Y)` of the submersion `GL(n) -> SPD(n)`.
//!
//! `nabla_X Y = dY(X) - Gamma_A[X] A Gamma_A[Y] - Gamma_A[Y] A Gamma_A[X]`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{ensure_same_dim, Error, Result};
use crate::matcore::{LiftMatrix, SpdMatrix, SymMatrix};
use crate::metric::{horizontal_lift_at, project};
use crate::sylvester::{solve, solve_sym};

type EvalFn = dyn Fn(&SpdMatrix) -> Result<SymMatrix> + Send + Sync;
type DiffFn = dyn Fn(&SpdMatrix, &SymMatrix) -> Result<SymMatrix> + Send + Sync;

/// A smooth vector field on SPD(n), optionally carrying its analytic
/// differential `(A, X) -> dY_A(X)`.
#[derive(Clone)]
pub struct VectorField {
    evaluate: Arc<EvalFn>,
    differential: Option<Arc<DiffFn>>,
    label: String,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("label", &self.label)
            .field("analytic_differential", &self.differential.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn new(
        label: impl Into<String>,
        evaluate: impl Fn(&SpdMatrix) -> Result<SymMatrix> + Send + Sync + 'static,
    ) -> Self {
        VectorField {
            evaluate: Arc::new(evaluate),
            differential: None,
            label: label.into(),
        }
    }

    pub fn with_differential(
        mut self,
        differential: impl Fn(&SpdMatrix, &SymMatrix) -> Result<SymMatrix> + Send + Sync + 'static,
    ) -> Self {
        self.differential = Some(Arc::new(differential));
        self
    }

    /// Drops the analytic differential so derivatives fall back to finite
    /// differences.
    pub fn without_differential(mut self) -> Self {
        self.differential = None;
        self
    }

    pub fn constant(x: SymMatrix) -> Self {
        let n = x.dim();
        let label = format!("constant[{n}x{n}]");
        VectorField::new(label, move |a| {
            ensure_same_dim(x.dim(), a.dim())?;
            Ok(x.clone())
        })
        .with_differential(move |a, _| Ok(SymMatrix::zeros(a.dim())))
    }

    /// `Y(A) = A`.
    pub fn identity() -> Self {
        VectorField::new("identity", |a| SymMatrix::new(a.as_matrix().clone()))
            .with_differential(|_, x| Ok(x.clone()))
    }

    /// `Y(A) = c0 A + c1 A^2 + c2 sym(A K A)` with fixed symmetric `K`.
    pub fn polynomial(c0: f64, c1: f64, c2: f64, k: SymMatrix) -> Self {
        let label = format!("poly({c0}, {c1}, {c2})");
        let kd = k.clone();
        VectorField::new(label, move |a| {
            ensure_same_dim(k.dim(), a.dim())?;
            let am = a.as_matrix();
            SymMatrix::new(am * c0 + am * am * c1 + am * k.as_matrix() * am * c2)
        })
        .with_differential(move |a, x| {
            ensure_same_dim(kd.dim(), a.dim())?;
            let (am, xm, km) = (a.as_matrix(), x.as_matrix(), kd.as_matrix());
            SymMatrix::new(xm * c0 + (xm * am + am * xm) * c1 + (xm * km * am + am * km * xm) * c2)
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_differential(&self) -> bool {
        self.differential.is_some()
    }

    pub fn eval(&self, a: &SpdMatrix) -> Result<SymMatrix> {
        (self.evaluate)(a)
    }
}

/// Maximum number of step halvings when a finite-difference probe leaves the
/// cone.
pub const MAX_STEP_HALVINGS: usize = 8;

/// `dY_A(X)`: the analytic differential when available, otherwise a central
/// difference with step `sqrt(eps) (1 + |A|_F) / (1 + |X|_F)`.
pub fn directional_derivative(y: &VectorField, a: &SpdMatrix, x: &SymMatrix) -> Result<SymMatrix> {
    ensure_same_dim(a.dim(), x.dim())?;
    if let Some(d) = &y.differential {
        return d(a, x);
    }
    let mut h = f64::EPSILON.sqrt() * (1.0 + a.as_matrix().norm()) / (1.0 + x.norm_fro());
    for _ in 0..=MAX_STEP_HALVINGS {
        let plus = SpdMatrix::new(a.as_matrix() + x.as_matrix() * h);
        let minus = SpdMatrix::new(a.as_matrix() - x.as_matrix() * h);
        if let (Ok(p), Ok(m)) = (plus, minus) {
            let diff = y.eval(&p)?.into_matrix() - y.eval(&m)?.into_matrix();
            return SymMatrix::new(diff / (2.0 * h));
        }
        h *= 0.5;
    }
    Err(Error::Numeric(format!(
        "finite-difference probe for field '{}' leaves the SPD cone",
        y.label
    )))
}

fn christoffel(a: &SpdMatrix, x: &SymMatrix, y: &SymMatrix) -> DMatrix<f64> {
    let gx = solve_sym(a, x);
    let gy = solve_sym(a, y);
    let am = a.as_matrix();
    let t = gx.as_matrix() * am * gy.as_matrix();
    &t + t.transpose()
}

/// `nabla_X Y` at `A`.
pub fn covariant_derivative(xf: &VectorField, yf: &VectorField, a: &SpdMatrix) -> Result<SymMatrix> {
    let x = xf.eval(a)?;
    let y = yf.eval(a)?;
    let dy = directional_derivative(yf, a, &x)?;
    SymMatrix::new(dy.into_matrix() - christoffel(a, &x, &y))
}

/// Covariant derivative of a field `V(t)` along a curve through `A` with
/// velocity `velocity`, given `dV/dt` at that point.
pub fn covariant_derivative_along(
    a: &SpdMatrix,
    velocity: &SymMatrix,
    v: &SymMatrix,
    dv: &SymMatrix,
) -> Result<SymMatrix> {
    ensure_same_dim(a.dim(), velocity.dim())?;
    ensure_same_dim(a.dim(), v.dim())?;
    ensure_same_dim(a.dim(), dv.dim())?;
    SymMatrix::new(dv.as_matrix() - christoffel(a, velocity, v))
}

/// Lie bracket `[X, Y] = dY(X) - dX(Y)` at `A`.
pub fn lie_bracket(xf: &VectorField, yf: &VectorField, a: &SpdMatrix) -> Result<SymMatrix> {
    let x = xf.eval(a)?;
    let y = yf.eval(a)?;
    let dy = directional_derivative(yf, a, &x)?;
    let dx = directional_derivative(xf, a, &y)?;
    Ok(&dy - &dx)
}

/// Value at `L` of the horizontal lift of the field `Y`,
/// `L Gamma_{sigma(L)}[Y(sigma(L))]`.
pub fn lifted_field(y: &VectorField, l: &LiftMatrix) -> Result<DMatrix<f64>> {
    let a = project(l)?;
    let v = y.eval(&a)?;
    ensure_same_dim(l.dim(), v.dim())?;
    Ok(horizontal_lift_at(l, &a, &v))
}

/// Vertical tensor
/// `T_L(X, Y) = L Gamma_A[Gamma_A[X] Gamma_A[Y] - Gamma_A[Y] Gamma_A[X]] A`
/// with `A = L^T L`.
pub fn tensor_t(l: &LiftMatrix, x: &SymMatrix, y: &SymMatrix) -> Result<DMatrix<f64>> {
    ensure_same_dim(l.dim(), x.dim())?;
    ensure_same_dim(l.dim(), y.dim())?;
    let a = project(l)?;
    Ok(tensor_t_at(l.as_matrix(), &a, x, y))
}

pub(crate) fn tensor_t_at(l: &DMatrix<f64>, a: &SpdMatrix, x: &SymMatrix, y: &SymMatrix) -> DMatrix<f64> {
    let gx = solve_sym(a, x).into_matrix();
    let gy = solve_sym(a, y).into_matrix();
    let comm = &gx * &gy - &gy * &gx;
    l * solve(a, &comm) * a.as_matrix()
}
