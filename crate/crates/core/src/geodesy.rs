//! Geodesics, exponential and logarithm maps, the maximal extension of a
//! geodesic ray, and the Wasserstein radius.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{ensure_same_dim, Error, Result};
use crate::matcore::{eig_sym, sqrt_product, LiftMatrix, Orthogonal, SpdMatrix, SymMatrix, EPS_PD};
use crate::sylvester::solve_sym;

/// Largest parameter for which `t -> exp_A(t X)` stays in SPD(n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extension {
    Finite(f64),
    Unbounded,
}

impl Extension {
    /// Whether `t` lies strictly inside `[0, eps_max)`.
    pub fn contains(&self, t: f64) -> bool {
        match *self {
            Extension::Finite(e) => t < e,
            Extension::Unbounded => t.is_finite(),
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Extension::Finite(e) => Some(e),
            Extension::Unbounded => None,
        }
    }
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extension::Finite(e) => write!(f, "{e}"),
            Extension::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// How a geodesic is specified.
#[derive(Debug, Clone)]
pub enum GeodesicMode {
    Endpoint(SpdMatrix),
    Velocity(SymMatrix),
}

/// A geodesic with its admissible parameter range `[0, t_max)`.
///
/// Endpoint geodesics are always valid on `[0, 1]`; their `t_max` is the
/// maximal extension of the initial velocity `log_{A1}(A2)`, which is never
/// below one.
#[derive(Debug, Clone)]
pub struct GeodesicSpec {
    start: SpdMatrix,
    mode: GeodesicMode,
    velocity: SymMatrix,
    t_max: Extension,
}

impl GeodesicSpec {
    pub fn between(start: SpdMatrix, end: SpdMatrix) -> Result<Self> {
        let velocity = log_map(&start, &end)?;
        let t_max = max_extension(&start, &velocity)?;
        if let Extension::Finite(e) = t_max {
            if e < 1.0 {
                return Err(Error::Consistency(format!(
                    "endpoint geodesic has maximal extension {e} < 1"
                )));
            }
        }
        Ok(GeodesicSpec {
            start,
            mode: GeodesicMode::Endpoint(end),
            velocity,
            t_max,
        })
    }

    pub fn from_velocity(start: SpdMatrix, velocity: SymMatrix) -> Result<Self> {
        let t_max = max_extension(&start, &velocity)?;
        Ok(GeodesicSpec {
            start,
            mode: GeodesicMode::Velocity(velocity.clone()),
            velocity,
            t_max,
        })
    }

    pub fn start(&self) -> &SpdMatrix {
        &self.start
    }

    pub fn mode(&self) -> &GeodesicMode {
        &self.mode
    }

    pub fn velocity(&self) -> &SymMatrix {
        &self.velocity
    }

    pub fn t_max(&self) -> Extension {
        self.t_max
    }

    pub fn point(&self, t: f64) -> Result<SpdMatrix> {
        match &self.mode {
            GeodesicMode::Endpoint(end) if (0.0..=1.0).contains(&t) => {
                geodesic_point(&self.start, end, t)
            }
            _ => geodesic_ivp(&self.start, &self.velocity, t),
        }
    }
}

fn root_bracket(a1: &SpdMatrix, a2: &SpdMatrix) -> Result<DMatrix<f64>> {
    // (A2 A1)^{1/2} = ((A1 A2)^{1/2})^T
    let r = sqrt_product(a1, a2)?;
    Ok(&r + r.transpose())
}

/// Point `t` in `[0, 1]` of the minimal geodesic from `A1` to `A2`:
/// `(1-t)^2 A1 + t(1-t)[(A1 A2)^{1/2} + (A2 A1)^{1/2}] + t^2 A2`.
pub fn geodesic_point(a1: &SpdMatrix, a2: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    ensure_same_dim(a1.dim(), a2.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Range {
            value: t,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if t == 0.0 {
        return Ok(a1.clone());
    }
    if t == 1.0 {
        return Ok(a2.clone());
    }
    let s = 1.0 - t;
    let m = a1.as_matrix() * (s * s) + root_bracket(a1, a2)? * (t * s) + a2.as_matrix() * (t * t);
    SpdMatrix::new(m)
}

/// Velocity of [`geodesic_point`] at `t`.
pub fn geodesic_velocity(a1: &SpdMatrix, a2: &SpdMatrix, t: f64) -> Result<SymMatrix> {
    ensure_same_dim(a1.dim(), a2.dim())?;
    let m = a1.as_matrix() * (-2.0 * (1.0 - t))
        + root_bracket(a1, a2)? * (1.0 - 2.0 * t)
        + a2.as_matrix() * (2.0 * t);
    SymMatrix::new(m)
}

/// `log_{A1}(A2) = (A1 A2)^{1/2} + (A2 A1)^{1/2} - 2 A1`.
pub fn log_map(a1: &SpdMatrix, a2: &SpdMatrix) -> Result<SymMatrix> {
    ensure_same_dim(a1.dim(), a2.dim())?;
    if a1.as_matrix() == a2.as_matrix() {
        return Ok(SymMatrix::zeros(a1.dim()));
    }
    SymMatrix::new(root_bracket(a1, a2)? - a1.as_matrix() * 2.0)
}

/// `exp_A(X) = A + X + Gamma_A[X] A Gamma_A[X]`, evaluated in the factored
/// form `(I + Gamma_A[X]) A (I + Gamma_A[X])`.
///
/// Fails with [`Error::Boundary`] unless `1 + lambda_min(Gamma_A[X])`
/// exceeds [`EPS_PD`].
pub fn exp_map(a: &SpdMatrix, x: &SymMatrix) -> Result<SpdMatrix> {
    ensure_same_dim(a.dim(), x.dim())?;
    let g = solve_sym(a, x);
    let spec = eig_sym(&g)?;
    let lmin = spec.min();
    let eps_max = extension_from_min(lmin);
    if !(1.0 + lmin > EPS_PD) {
        return Err(Error::Boundary { t: 1.0, eps_max });
    }
    let n = a.dim();
    let f = DMatrix::identity(n, n) + g.as_matrix();
    SpdMatrix::new(&f * a.as_matrix() * &f).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::Boundary { t: 1.0, eps_max },
        other => other,
    })
}

/// Unfactored evaluation `A + X + Gamma_A[X] A Gamma_A[X]`, without domain
/// checks.
pub fn exp_map_expanded(a: &SpdMatrix, x: &SymMatrix) -> Result<DMatrix<f64>> {
    ensure_same_dim(a.dim(), x.dim())?;
    let g = solve_sym(a, x);
    let g = g.as_matrix();
    Ok(a.as_matrix() + x.as_matrix() + g * a.as_matrix() * g)
}

/// `gamma(t) = A + t X + t^2 Gamma_A[X] A Gamma_A[X]` for `0 <= t < eps_max`.
pub fn geodesic_ivp(a: &SpdMatrix, x: &SymMatrix, t: f64) -> Result<SpdMatrix> {
    ensure_same_dim(a.dim(), x.dim())?;
    if !(t >= 0.0) {
        return Err(Error::Range {
            value: t,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let eps_max = max_extension(a, x)?;
    if !eps_max.contains(t) {
        return Err(Error::Boundary { t, eps_max });
    }
    exp_map(a, &(x * t)).map_err(|e| match e {
        Error::Boundary { .. } => Error::Boundary { t, eps_max },
        other => other,
    })
}

fn extension_from_min(lmin: f64) -> Extension {
    if lmin < 0.0 {
        Extension::Finite(-1.0 / lmin)
    } else {
        Extension::Unbounded
    }
}

/// `-1 / lambda_min(Gamma_A[X])` when that eigenvalue is negative, otherwise
/// unbounded.
pub fn max_extension(a: &SpdMatrix, x: &SymMatrix) -> Result<Extension> {
    ensure_same_dim(a.dim(), x.dim())?;
    let g = solve_sym(a, x);
    Ok(extension_from_min(eig_sym(&g)?.min()))
}

/// Wasserstein radius `sqrt(lambda_min(A) / 2)`.
///
/// Note the shortest unit-speed ray that leaves the cone has length
/// `sqrt(lambda_min(A))`, that is `sqrt(2) * radius(A)`; it runs along
/// [`degenerate_direction`].
pub fn radius(a: &SpdMatrix) -> f64 {
    (a.lambda_min() / 2.0).sqrt()
}

/// `-2 lambda_min q q^T`, with `q` the unit eigenvector of the smallest
/// eigenvalue (lowest index on ties). Normalized, it is the direction
/// reaching the boundary fastest.
pub fn degenerate_direction(a: &SpdMatrix) -> SymMatrix {
    let spec = a.spectrum();
    let q = spec.eigenvectors().column(0);
    let v = &q * q.transpose() * (-2.0 * spec.min());
    SymMatrix::new(v).expect("square")
}

/// Number of sample points used when checking a level segment for
/// non-degeneracy.
const LEVEL_SAMPLES: usize = 10;

/// Lift `A1^{-1/2} (A1 A2)^{1/2}` of `A2` joined to the fixed lift
/// `A1^{1/2}` by a level segment.
pub fn level_lift_endpoint(a1: &SpdMatrix, a2: &SpdMatrix) -> Result<LiftMatrix> {
    ensure_same_dim(a1.dim(), a2.dim())?;
    let end = a1.inv_sqrt() * sqrt_product(a1, a2)?;
    let start = a1.sqrt().into_matrix();
    for k in 0..=LEVEL_SAMPLES {
        let t = k as f64 / LEVEL_SAMPLES as f64;
        let det = (&end * t + &start * (1.0 - t)).determinant();
        if !(det > 0.0) {
            return Err(Error::Numeric(format!(
                "level segment degenerates at t = {t} (det = {det:e})"
            )));
        }
    }
    LiftMatrix::new(end)
}

/// Tolerance on `|P^T P - I|_F` for [`connecting_orthogonal`].
pub const CONNECTING_ORTHOGONALITY_TOL: f64 = 1e-9;

/// `P = A1^{-1/2} (A1 A2)^{1/2} A2^{-1/2}`, the orthogonal matrix with
/// `P A2^{1/2}` equal to the level lift of `A2`.
pub fn connecting_orthogonal(a1: &SpdMatrix, a2: &SpdMatrix) -> Result<Orthogonal> {
    ensure_same_dim(a1.dim(), a2.dim())?;
    let p = a1.inv_sqrt() * sqrt_product(a1, a2)? * a2.inv_sqrt();
    Orthogonal::with_tolerance(p, CONNECTING_ORTHOGONALITY_TOL).map_err(|e| match e {
        Error::NotOrthogonal { residual } => Error::Numeric(format!(
            "connecting matrix is not orthogonal (residual {residual:e})"
        )),
        other => other,
    })
}
