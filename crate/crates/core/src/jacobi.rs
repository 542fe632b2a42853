//! Normal Jacobi fields along geodesics in closed form, and the
//! geodesic-variation construction they are checked against.

use crate::error::{ensure_same_dim, Error, Result};
use crate::geodesy::{exp_map, geodesic_ivp, max_extension, Extension};
use crate::matcore::{SpdMatrix, SymMatrix};
use crate::metric::{inner, norm};
use crate::sylvester::solve_sym;

/// Tolerance on `g(X, Y)` accepted as normal.
pub const NORMALITY_TOL: f64 = 1e-9;

/// Default step of [`variation_oracle`].
pub const DEFAULT_VARIATION_STEP: f64 = 1e-4;

/// Data determining a normal Jacobi field: `J(0) = 0`, `J'(0) = Y`, along the
/// geodesic with `gamma(0) = A`, `gamma'(0) = X`, and `g_A(X, Y) = 0`.
#[derive(Debug, Clone)]
pub struct JacobiSpec {
    base: SpdMatrix,
    velocity: SymMatrix,
    seed_derivative: SymMatrix,
    t_max: Extension,
}

impl JacobiSpec {
    /// Projects `seed_derivative` onto the `g_A`-orthogonal complement of
    /// `velocity` before storing it.
    pub fn new(base: SpdMatrix, velocity: SymMatrix, seed_derivative: SymMatrix) -> Result<Self> {
        ensure_same_dim(base.dim(), velocity.dim())?;
        ensure_same_dim(base.dim(), seed_derivative.dim())?;
        let xx = inner(&base, &velocity, &velocity)?;
        let seed_derivative = if xx > 0.0 {
            let c = inner(&base, &velocity, &seed_derivative)? / xx;
            &seed_derivative - &(&velocity * c)
        } else {
            seed_derivative
        };
        let residual = inner(&base, &velocity, &seed_derivative)?;
        let scale = (xx * inner(&base, &seed_derivative, &seed_derivative)?).sqrt();
        if residual.abs() > NORMALITY_TOL * (1.0 + scale) {
            return Err(Error::Numeric(format!(
                "seed derivative not normal after projection: g(X, Y) = {residual:e}"
            )));
        }
        let t_max = max_extension(&base, &velocity)?;
        Ok(JacobiSpec {
            base,
            velocity,
            seed_derivative,
            t_max,
        })
    }

    pub fn base(&self) -> &SpdMatrix {
        &self.base
    }

    pub fn velocity(&self) -> &SymMatrix {
        &self.velocity
    }

    pub fn seed_derivative(&self) -> &SymMatrix {
        &self.seed_derivative
    }

    /// Maximal extension of the underlying geodesic.
    pub fn t_max(&self) -> Extension {
        self.t_max
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(Error::Range {
                value: t,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if !self.t_max.contains(t) {
            return Err(Error::Boundary {
                t,
                eps_max: self.t_max,
            });
        }
        Ok(())
    }
}

/// `J(t) = t Y + t^2 (Gamma_A[X] A Gamma_A[Y] + Gamma_A[Y] A Gamma_A[X])`.
pub fn jacobi_field(spec: &JacobiSpec, t: f64) -> Result<SymMatrix> {
    spec.check_domain(t)?;
    let a = &spec.base;
    let gx = solve_sym(a, &spec.velocity).into_matrix();
    let gy = solve_sym(a, &spec.seed_derivative).into_matrix();
    let cross = &gx * a.as_matrix() * &gy;
    SymMatrix::new(spec.seed_derivative.as_matrix() * t + (&cross + cross.transpose()) * (t * t))
}

/// Central difference in `s` of `exp_A(t (X + s Y))` at `s = 0`.
pub fn variation_oracle(spec: &JacobiSpec, t: f64, h: f64) -> Result<SymMatrix> {
    let a = &spec.base;
    let dir = |s: f64| &(&spec.velocity + &(&spec.seed_derivative * s)) * t;
    let plus = exp_map(a, &dir(h))?;
    let minus = exp_map(a, &dir(-h))?;
    SymMatrix::new((plus.into_matrix() - minus.into_matrix()) / (2.0 * h))
}

/// `min_t |J(t)|_{gamma(t)} / t` over `t_grid`; a positive value witnesses
/// that `J` does not return to zero on the grid.
pub fn min_jacobi_norm(spec: &JacobiSpec, t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::Validation("empty parameter grid".into()));
    }
    let mut best = f64::INFINITY;
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::Range {
                value: t,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let j = jacobi_field(spec, t)?;
        let point = geodesic_ivp(&spec.base, &spec.velocity, t)?;
        best = best.min(norm(&point, &j)? / t);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{random_spd, random_symmetric, rel_diff};
    use approx::assert_relative_eq;

    fn spec(seed: u64, n: usize) -> JacobiSpec {
        JacobiSpec::new(random_spd(n, seed), random_symmetric(n, seed + 1), random_symmetric(n, seed + 2)).unwrap()
    }

    #[test]
    fn construction_enforces_normality() {
        let s = spec(1, 3);
        let g = inner(s.base(), s.velocity(), s.seed_derivative()).unwrap();
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn vanishes_at_zero() {
        let s = spec(4, 3);
        assert_eq!(jacobi_field(&s, 0.0).unwrap(), SymMatrix::zeros(3));
        assert_eq!(variation_oracle(&s, 0.0, 1e-4).unwrap(), SymMatrix::zeros(3));
    }

    #[test]
    fn closed_form_at_identity() {
        let x = random_symmetric(3, 7);
        let y = random_symmetric(3, 8);
        let s = JacobiSpec::new(SpdMatrix::identity(3), x, y).unwrap();
        let (xm, ym) = (s.velocity().as_matrix(), s.seed_derivative().as_matrix());
        let t = 0.3;
        let xy = xm * ym;
        let expected = ym * t + (&xy + xy.transpose()) * (t * t / 4.0);
        assert!(rel_diff(jacobi_field(&s, t).unwrap().as_matrix(), &expected) < 1e-13);
    }

    #[test]
    fn matches_variation() {
        let s = spec(10, 4);
        let tm = s.t_max().finite().unwrap_or(1.0).min(10.0);
        for k in 1..10 {
            let t = tm * k as f64 / 10.0;
            let j = jacobi_field(&s, t).unwrap();
            let v = variation_oracle(&s, t, DEFAULT_VARIATION_STEP).unwrap();
            assert!(rel_diff(j.as_matrix(), v.as_matrix()) < 1e-5);
        }
    }

    #[test]
    fn zero_seed_gives_zero_variation() {
        let s = JacobiSpec::new(random_spd(3, 20), random_symmetric(3, 21), SymMatrix::zeros(3)).unwrap();
        assert!(variation_oracle(&s, 0.4, 1e-4).unwrap().norm_fro() == 0.0);
        assert_eq!(min_jacobi_norm(&s, &[0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn flat_direction() {
        let y = random_symmetric(3, 22);
        let s = JacobiSpec::new(SpdMatrix::identity(3), SymMatrix::zeros(3), y.clone()).unwrap();
        let m = min_jacobi_norm(&s, &[0.5, 1.0, 4.0]).unwrap();
        assert_relative_eq!(m, norm(&SpdMatrix::identity(3), &y).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn nonzero_witness() {
        let s = spec(30, 3);
        let tm = s.t_max().finite().unwrap_or(10.0).min(10.0) * 0.99;
        let grid: Vec<f64> = (1..=50).map(|k| tm * k as f64 / 50.0).collect();
        assert!(min_jacobi_norm(&s, &grid).unwrap() > 1e-8);
    }

    #[test]
    fn domain_is_enforced() {
        let s = JacobiSpec::new(SpdMatrix::identity(2), -&SymMatrix::identity(2), SymMatrix::basis(2, 0, 1)).unwrap();
        assert!(jacobi_field(&s, 1.99).is_ok());
        assert!(matches!(jacobi_field(&s, 2.0), Err(Error::Boundary { .. })));
        assert!(matches!(jacobi_field(&s, -1.0), Err(Error::Range { .. })));
    }
}
