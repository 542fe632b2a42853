//! Seeded property suites over every module, shared by the `check` command
//! and the test targets.
//!
//! Each suite draws random inputs per trial, evaluates its properties, and
//! reports the worst value seen for each property together with the trial
//! seeds that violated it. Trials run in parallel but are merged in trial
//! order, so a report depends only on its configuration.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::connection::{
    covariant_derivative, covariant_derivative_along, lie_bracket, lifted_field, tensor_t, VectorField,
};
use crate::curvature::{
    curvature_from_tensor, curvature_value, scalar_curvature, scalar_sum_oracle, sectional, sectional_basis,
    BasisIndex,
};
use crate::error::{Error, Result};
use crate::geodesy::{
    degenerate_direction, exp_map, geodesic_ivp, geodesic_point, geodesic_velocity, log_map, max_extension,
    radius, Extension,
};
use crate::jacobi::{jacobi_field, min_jacobi_norm, variation_oracle, JacobiSpec, DEFAULT_VARIATION_STEP};
use crate::matcore::{
    random_orthogonal_with, random_spd_with, random_symmetric_with, rel_diff, seeded_rng, LiftMatrix, SpdMatrix,
    SymMatrix,
};
use crate::metric::{act, act_tangent, distance, dsigma, horizontal_lift, inner, norm, project};
use crate::oracle::{central_difference, simpson, sylvester_kron};
use crate::sylvester::{gamma, gamma_inverse_point};

/// Default tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance for properties dominated by finite-difference error.
pub const FD_TOL: f64 = 2e-4;

const RESIDUAL_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-10;
const ROUND_TRIP_TOL: f64 = 1e-8;
const ARC_LENGTH_TOL: f64 = 1e-6;
const SPEED_TOL: f64 = 1e-5;
const SPEED_STEP: f64 = 1e-5;
const GEODESIC_STEP: f64 = 1e-4;
const SIMPSON_PANELS: usize = 1000;
const RADIUS_TANGENTS: usize = 200;
const RADIUS_TOL: f64 = 1e-6;
const JACOBI_TOL: f64 = 1e-5;
const WITNESS_FLOOR: f64 = 1e-8;
const ADDITIVITY_TOL: f64 = 1e-10;
const BASIS_TOL: f64 = 1e-10;
const NEGATIVE_CURVATURE_TOL: f64 = -1e-12;
const MAX_LISTED_SEEDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Sylvester,
    Metric,
    Geodesy,
    Connection,
    Jacobi,
    Curvature,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Sylvester,
        Suite::Metric,
        Suite::Geodesy,
        Suite::Connection,
        Suite::Jacobi,
        Suite::Curvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sylvester => "sylvester",
            Suite::Metric => "metric",
            Suite::Geodesy => "geodesy",
            Suite::Connection => "connection",
            Suite::Jacobi => "jacobi",
            Suite::Curvature => "curvature",
        }
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap() as u64
    }

    fn trial(self) -> fn(&mut Trial) -> Result<()> {
        match self {
            Suite::Sylvester => sylvester_trial,
            Suite::Metric => metric_trial,
            Suite::Geodesy => geodesy_trial,
            Suite::Connection => connection_trial,
            Suite::Jacobi => jacobi_trial,
            Suite::Curvature => curvature_trial,
        }
    }
}

/// Dimensions, trial count, base seed and algebraic tolerance of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl CheckConfig {
    /// A single dimension `n`.
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        CheckConfig {
            dims: vec![n],
            trials,
            seed,
            tol: DEFAULT_TOL,
        }
    }

    /// Dimensions drawn uniformly per trial from `lo..=hi`.
    pub fn with_dims(mut self, lo: usize, hi: usize) -> Self {
        self.dims = (lo..=hi).collect();
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("trial count must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&n| n < 2) {
            return Err(Error::Validation("dimensions must be at least 2".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Validation(format!("invalid tolerance {}", self.tol)));
        }
        Ok(())
    }
}

/// Seed of trial `i` of `suite`; pass it to [`run_trial`] to replay one trial.
pub fn trial_seed(base: u64, suite: Suite, i: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (suite.index() << 56) ^ i as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when the observed value is at most the tolerance.
    AtMost,
    /// Passes when the observed value is at least the tolerance.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub property: &'static str,
    pub bound: Bound,
    pub value: f64,
    pub tolerance: f64,
    pub error: Option<String>,
}

impl Observation {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && match self.bound {
                Bound::AtMost => self.value <= self.tolerance,
                Bound::AtLeast => self.value >= self.tolerance,
            }
    }
}

/// Random source and sink for a single trial.
struct Trial {
    rng: ChaCha8Rng,
    n: usize,
    tol: f64,
    out: Vec<Observation>,
}

impl Trial {
    fn at_most(&mut self, property: &'static str, value: f64, tolerance: f64) {
        self.push(property, Bound::AtMost, value, tolerance);
    }

    fn at_least(&mut self, property: &'static str, value: f64, tolerance: f64) {
        self.push(property, Bound::AtLeast, value, tolerance);
    }

    fn push(&mut self, property: &'static str, bound: Bound, value: f64, tolerance: f64) {
        // NaN compares false either way; store it as a violation.
        let value = if value.is_nan() {
            match bound {
                Bound::AtMost => f64::INFINITY,
                Bound::AtLeast => f64::NEG_INFINITY,
            }
        } else {
            value
        };
        self.out.push(Observation {
            property,
            bound,
            value,
            tolerance,
            error: None,
        });
    }

    fn spd(&mut self) -> SpdMatrix {
        random_spd_with(&mut self.rng, self.n)
    }

    fn sym(&mut self) -> SymMatrix {
        random_symmetric_with(&mut self.rng, self.n)
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Log-uniform on `[0.1, 10]`.
    fn scale(&mut self) -> f64 {
        10f64.powf(self.rng.random_range(-1.0..=1.0))
    }

    fn orthogonal(&mut self) -> DMatrix<f64> {
        random_orthogonal_with(&mut self.rng, self.n).as_matrix().clone()
    }

    fn lift(&mut self) -> Result<LiftMatrix> {
        let o = self.orthogonal();
        let s = self.spd();
        LiftMatrix::new(o * s.as_matrix())
    }

    fn polynomial_field(&mut self) -> VectorField {
        let (c0, c1, c2) = (self.normal(), self.normal(), self.normal());
        let k = self.sym();
        VectorField::polynomial(c0, c1, c2, k)
    }
}

/// Runs one trial and returns its observations in evaluation order.
pub fn run_trial(suite: Suite, dims: &[usize], seed: u64, tol: f64) -> Vec<Observation> {
    let mut rng = seeded_rng(seed);
    let n = dims[rng.random_range(0..dims.len())];
    let mut trial = Trial {
        rng,
        n,
        tol,
        out: Vec::new(),
    };
    if let Err(e) = suite.trial()(&mut trial) {
        trial.out.push(Observation {
            property: "evaluation",
            bound: Bound::AtMost,
            value: f64::INFINITY,
            tolerance: 0.0,
            error: Some(e.to_string()),
        });
    }
    trial.out
}

/// Aggregate of one property over all trials of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub suite: Suite,
    pub property: &'static str,
    pub bound: Bound,
    /// Largest value for [`Bound::AtMost`], smallest for [`Bound::AtLeast`].
    pub worst: f64,
    pub tolerance: f64,
    pub trials: usize,
    pub failing_seeds: Vec<u64>,
    pub first_error: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failing_seeds.is_empty()
    }
}

/// Runs every trial of `suite` and merges the observations in trial order.
pub fn run_suite(suite: Suite, cfg: &CheckConfig) -> Result<Vec<PropertyResult>> {
    cfg.validate()?;
    let per_trial: Vec<(u64, Vec<Observation>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(cfg.seed, suite, i);
            (seed, run_trial(suite, &cfg.dims, seed, cfg.tol))
        })
        .collect();

    let mut results: Vec<PropertyResult> = Vec::new();
    for (seed, observations) in per_trial {
        for obs in observations {
            let idx = match results.iter().position(|r| r.property == obs.property) {
                Some(i) => i,
                None => {
                    results.push(PropertyResult {
                        suite,
                        property: obs.property,
                        bound: obs.bound,
                        worst: match obs.bound {
                            Bound::AtMost => f64::NEG_INFINITY,
                            Bound::AtLeast => f64::INFINITY,
                        },
                        tolerance: obs.tolerance,
                        trials: 0,
                        failing_seeds: Vec::new(),
                        first_error: None,
                    });
                    results.len() - 1
                }
            };
            let r = &mut results[idx];
            r.trials += 1;
            r.worst = match r.bound {
                Bound::AtMost => r.worst.max(obs.value),
                Bound::AtLeast => r.worst.min(obs.value),
            };
            if !obs.passed() && r.failing_seeds.last() != Some(&seed) {
                r.failing_seeds.push(seed);
                if r.first_error.is_none() {
                    r.first_error = obs.error;
                }
            }
        }
    }
    Ok(results)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub config: CheckConfig,
    pub results: Vec<PropertyResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed())
    }

    pub fn find(&self, suite: Suite, property: &str) -> Option<&PropertyResult> {
        self.results
            .iter()
            .find(|r| r.suite == suite && r.property == property)
    }

    /// Plain-text report: one line per property, a summary line per suite,
    /// then the failures with their seeds.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let dims: Vec<String> = self.config.dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(
            s,
            "check n={} trials={} seed={} tol={:e}",
            dims.join(","),
            self.config.trials,
            self.config.seed,
            self.config.tol
        );
        for suite in Suite::ALL {
            let rows: Vec<&PropertyResult> = self.results.iter().filter(|r| r.suite == suite).collect();
            if rows.is_empty() {
                continue;
            }
            for r in &rows {
                let op = match r.bound {
                    Bound::AtMost => "<=",
                    Bound::AtLeast => ">=",
                };
                let _ = writeln!(
                    s,
                    "  {:<11} {:<24} {:>24e} {op} {:<8e} {}",
                    suite.name(),
                    r.property,
                    r.worst,
                    r.tolerance,
                    if r.passed() { "ok" } else { "FAIL" }
                );
            }
            let max_residual = rows
                .iter()
                .filter(|r| r.bound == Bound::AtMost)
                .map(|r| r.worst)
                .fold(0.0, f64::max);
            let passed = rows.iter().filter(|r| r.passed()).count();
            let _ = writeln!(
                s,
                "{}: {passed}/{} properties passed, max residual {:e}",
                suite.name(),
                rows.len(),
                max_residual
            );
        }
        for r in self.failures() {
            let seeds: Vec<String> = r
                .failing_seeds
                .iter()
                .take(MAX_LISTED_SEEDS)
                .map(|x| x.to_string())
                .collect();
            let more = r.failing_seeds.len().saturating_sub(MAX_LISTED_SEEDS);
            let _ = write!(
                s,
                "FAIL {}/{} seeds {}",
                r.suite.name(),
                r.property,
                seeds.join(",")
            );
            if more > 0 {
                let _ = write!(s, " (+{more} more)");
            }
            if let Some(e) = &r.first_error {
                let _ = write!(s, ": {e}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// Runs all suites.
pub fn run_check(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut results = Vec::new();
    for suite in Suite::ALL {
        results.extend(run_suite(suite, cfg)?);
    }
    Ok(CheckReport {
        config: cfg.clone(),
        results,
    })
}

fn rel_scalar(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < f64::MIN_POSITIVE {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

fn sylvester_trial(t: &mut Trial) -> Result<()> {
    let tol = t.tol;
    let a = t.spd();
    let b = t.spd();
    let x = t.sym();
    let y = t.sym();
    let k = t.scale();
    let q = t.orthogonal();
    let am = a.as_matrix();

    let g = gamma(&a, &x)?;
    t.at_most("residual", g.residual / (1.0 + x.norm_fro()), RESIDUAL_TOL);
    let gx = g.value.as_matrix();

    let oracle = sylvester_kron(am, x.as_matrix())?;
    t.at_most("oracle", rel_diff(gx, &oracle), ORACLE_TOL);

    let lhs = gamma(&a, &(&x + &(&y * k)))?.value;
    let rhs = gx + gamma(&a, &y)?.value.as_matrix() * k;
    t.at_most("linearity", rel_diff(lhs.as_matrix(), &rhs), tol);

    let scaled = gamma(&a.scale(k)?, &x)?.value;
    t.at_most("scaling", rel_diff(scaled.as_matrix(), &(gx / k)), tol);

    let ab = SpdMatrix::new(am + b.as_matrix())?;
    let gab = gamma(&ab, &x)?.value.into_matrix();
    let inner_rhs = SymMatrix::new(b.as_matrix() * &gab + &gab * b.as_matrix())?;
    let rhs = gx - gamma(&a, &inner_rhs)?.value.as_matrix();
    t.at_most("perturbation", rel_diff(&gab, &rhs), tol);

    let left = sylvester_kron(am, &(am * x.as_matrix()))?;
    let right = sylvester_kron(am, &(x.as_matrix() * am))?;
    let c = rel_diff(&left, &(am * gx)).max(rel_diff(&right, &(gx * am)));
    t.at_most("commutation", c, tol);

    let inv = gamma(&a.inverse(), &x)?.value;
    let via = gamma_inverse_point(&a, &x)?;
    t.at_most("inversion", rel_diff(inv.as_matrix(), via.as_matrix()), tol);

    let qa = SpdMatrix::new(&q * am * q.transpose())?;
    let qx = SymMatrix::new(&q * x.as_matrix() * q.transpose())?;
    let lhs = gamma(&qa, &qx)?.value;
    let rhs = &q * gx * q.transpose();
    t.at_most("conjugation", rel_diff(lhs.as_matrix(), &rhs), tol);
    Ok(())
}

fn metric_trial(t: &mut Trial) -> Result<()> {
    let tol = t.tol;
    let l = t.lift()?;
    let x = t.sym();
    let y = t.sym();
    let a = project(&l)?;

    let xl = horizontal_lift(&l, &x)?;
    let yl = horizontal_lift(&l, &y)?;
    let euclid = xl.dot(&yl);
    let g = inner(&a, &x, &y)?;
    t.at_most("submersion", (euclid - g).abs() / (xl.norm() * yl.norm()), tol);
    t.at_most("push-forward", rel_diff(dsigma(&l, &xl)?.as_matrix(), x.as_matrix()), tol);

    let b = t.spd();
    let c = t.spd();
    let dab = distance(&a, &b)?;
    let dba = distance(&b, &a)?;
    t.at_most("symmetry", rel_scalar(dab, dba), tol);
    t.at_most("zero-diagonal", distance(&a, &a)?, 0.0);
    let dbc = distance(&b, &c)?;
    let dac = distance(&a, &c)?;
    t.at_most("triangle", ((dac - dab - dbc) / dac).max(0.0), tol);

    let gxx = inner(&a, &x, &x)?;
    t.at_least("positivity", gxx / x.norm_fro().powi(2), f64::EPSILON);

    let o = random_orthogonal_with(&mut t.rng, t.n);
    let dab_o = distance(&act(&o, &a)?, &act(&o, &b)?)?;
    t.at_most("isometry", rel_scalar(dab_o, dab), tol);
    let xo = act_tangent(&o, &x)?;
    let yo = act_tangent(&o, &y)?;
    let go = inner(&act(&o, &a)?, &xo, &yo)?;
    t.at_most("isometry-tensor", (go - g).abs() / gxx.max(inner(&a, &y, &y)?), tol);
    Ok(())
}

fn geodesy_trial(t: &mut Trial) -> Result<()> {
    let tol = t.tol;
    let n = t.n;
    let a = t.spd();
    let b = t.spd();

    let v = log_map(&a, &b)?;
    let back = exp_map(&a, &v)?;
    t.at_most("exp-log", rel_diff(back.as_matrix(), b.as_matrix()), ROUND_TRIP_TOL);

    // Keep t = 1 well inside the domain.
    let mut x = t.sym();
    if let Extension::Finite(e) = max_extension(&a, &x)? {
        if e <= 2.0 {
            x = &x * (e / 2.0);
        }
    }
    let again = log_map(&a, &exp_map(&a, &x)?)?;
    t.at_most("log-exp", rel_diff(again.as_matrix(), x.as_matrix()), ROUND_TRIP_TOL);

    let mut ivp = 0.0f64;
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let p = geodesic_point(&a, &b, s)?;
        let q = geodesic_ivp(&a, &v, s)?;
        ivp = ivp.max(rel_diff(p.as_matrix(), q.as_matrix()));
    }
    t.at_most("ivp-agreement", ivp, tol);

    // The curve is quadratic in t with coefficients fixed by the bracket
    // (A1 A2)^{1/2} + (A2 A1)^{1/2} = log + 2 A1.
    let bracket = v.as_matrix() + a.as_matrix() * 2.0;
    let curve = |s: f64| a.as_matrix() * ((1.0 - s) * (1.0 - s)) + &bracket * (s * (1.0 - s)) + b.as_matrix() * (s * s);
    let mut velocity = 0.0f64;
    for k in 0..=4 {
        let s = k as f64 / 4.0;
        let dv = geodesic_velocity(&a, &b, s)?;
        let fd = (curve(s + 1e-3) - curve(s - 1e-3)) / 2e-3;
        velocity = velocity.max(rel_diff(dv.as_matrix(), &fd));
    }
    t.at_most("velocity", velocity, 1e-9);

    // A point that fails the SPD gate makes the integrand NaN, which is
    // recorded as a violation.
    let d = distance(&a, &b)?;
    let speed = |s: f64| -> f64 {
        let vel = a.as_matrix() * (-2.0 * (1.0 - s)) + &bracket * (1.0 - 2.0 * s) + b.as_matrix() * (2.0 * s);
        SymMatrix::new(vel)
            .and_then(|vel| SpdMatrix::new(curve(s)).and_then(|p| norm(&p, &vel)))
            .unwrap_or(f64::NAN)
    };
    let len = simpson(speed, 0.0, 1.0, SIMPSON_PANELS);
    t.at_most("arc-length", rel_scalar(len, d), ARC_LENGTH_TOL);

    let bad = (0..=20)
        .filter(|k| geodesic_point(&a, &b, *k as f64 / 20.0).is_err())
        .count();
    t.at_most("spd-along-curve", bad as f64, 0.0);

    let point = |s: f64| geodesic_point(&a, &b, s).map(SpdMatrix::into_matrix);
    let mut accel = 0.0f64;
    for k in 1..=10 {
        let s = k as f64 / 11.0;
        let g = geodesic_point(&a, &b, s)?;
        let h = GEODESIC_STEP;
        let dv = SymMatrix::new(central_difference(point, s, h)?)?;
        let ddv = SymMatrix::new((point(s + h)? - g.as_matrix() * 2.0 + point(s - h)?) / (h * h))?;
        let cov = covariant_derivative_along(&g, &dv, &dv, &ddv)?;
        accel = accel.max(cov.norm_fro() / (1.0 + ddv.norm_fro()));
    }
    t.at_most("geodesic-equation", accel, FD_TOL);

    let mut speeds = Vec::with_capacity(9);
    for k in 1..=9 {
        let s = k as f64 / 10.0;
        let dv = SymMatrix::new(central_difference(point, s, SPEED_STEP)?)?;
        speeds.push(norm(&geodesic_point(&a, &b, s)?, &dv)?);
    }
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let spread = speeds.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max) / mean;
    t.at_most("constant-speed", spread, SPEED_TOL);

    let o = random_orthogonal_with(&mut t.rng, n);
    let om = o.as_matrix();
    let mut equi = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        let lhs = geodesic_point(&act(&o, &a)?, &act(&o, &b)?, s)?;
        let rhs = om * geodesic_point(&a, &b, s)?.as_matrix() * om.transpose();
        equi = equi.max(rel_diff(lhs.as_matrix(), &rhs));
    }
    t.at_most("equivariance", equi, tol);

    let r = radius(&a);
    let mut min_ext = f64::INFINITY;
    for _ in 0..RADIUS_TANGENTS {
        let z = t.sym();
        let unit = &z * (1.0 / norm(&a, &z)?);
        if let Extension::Finite(e) = max_extension(&a, &unit)? {
            min_ext = min_ext.min(e);
        }
    }
    t.at_least("radius-lower-bound", min_ext - (r - RADIUS_TOL), 0.0);
    let dd = degenerate_direction(&a);
    let unit = &dd * (1.0 / norm(&a, &dd)?);
    let e = max_extension(&a, &unit)?
        .finite()
        .ok_or_else(|| Error::Consistency("degenerate direction has unbounded extension".into()))?;
    // The shortest exit over unit tangents is attained by the degenerate
    // direction at sqrt(lambda_min).
    t.at_most("degenerate-exit", rel_scalar(e, a.lambda_min().sqrt()), tol);
    t.at_least("degenerate-minimizes", min_ext - e, -RADIUS_TOL);
    Ok(())
}

/// Central difference of `F` along `dir` at `l` in the total space.
fn total_derivative(f: &VectorField, l: &LiftMatrix, dir: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let h = 1e-5 * (1.0 + l.as_matrix().norm()) / (1.0 + dir.norm());
    let lm = l.as_matrix();
    let plus = lifted_field(f, &LiftMatrix::new(lm + dir * h)?)?;
    let minus = lifted_field(f, &LiftMatrix::new(lm - dir * h)?)?;
    Ok((plus - minus) / (2.0 * h))
}

fn connection_trial(t: &mut Trial) -> Result<()> {
    let tol = t.tol;
    let a = t.spd();
    let xf = t.polynomial_field();
    let yf = t.polynomial_field();
    let zf = t.polynomial_field();
    let (x, y, z) = (xf.eval(&a)?, yf.eval(&a)?, zf.eval(&a)?);

    let nxy = covariant_derivative(&xf, &yf, &a)?;
    let nxz = covariant_derivative(&xf, &zf, &a)?;
    let h = 1e-5 * (1.0 + a.as_matrix().norm()) / (1.0 + x.norm_fro());
    let along = |s: f64| -> Result<f64> {
        let p = SpdMatrix::new(a.as_matrix() + x.as_matrix() * s)?;
        inner(&p, &yf.eval(&p)?, &zf.eval(&p)?)
    };
    let lhs = (along(h)? - along(-h)?) / (2.0 * h);
    let t1 = inner(&a, &nxy, &z)?;
    let t2 = inner(&a, &y, &nxz)?;
    t.at_most("metric-compatibility", (lhs - t1 - t2).abs() / (1.0 + t1.abs() + t2.abs()), FD_TOL);

    let nyx = covariant_derivative(&yf, &xf, &a)?;
    let fd_bracket = lie_bracket(&xf.clone().without_differential(), &yf.clone().without_differential(), &a)?;
    t.at_most("torsion-free", rel_diff((&nxy - &nyx).as_matrix(), fd_bracket.as_matrix()), FD_TOL);

    let o = t.orthogonal();
    let l = LiftMatrix::new(o * a.sqrt().as_matrix())?;
    let xl = lifted_field(&xf, &l)?;
    let yl = lifted_field(&yf, &l)?;
    let dxy = total_derivative(&yf, &l, &xl)?;
    let dyx = total_derivative(&xf, &l, &yl)?;
    let pushed_xy = dsigma(&l, &dxy)?;
    t.at_most("lift-identity", rel_diff(pushed_xy.as_matrix(), nxy.as_matrix()), FD_TOL);

    // A second point on the same fiber gives the same push-forward.
    let o2 = t.orthogonal();
    let l2 = LiftMatrix::new(o2 * a.sqrt().as_matrix())?;
    let xl2 = lifted_field(&xf, &l2)?;
    let pushed2 = dsigma(&l2, &total_derivative(&yf, &l2, &xl2)?)?;
    t.at_most("fiber-independence", rel_diff(pushed2.as_matrix(), pushed_xy.as_matrix()), FD_TOL);

    let bracket = lie_bracket(&xf, &yf, &a)?;
    let expected = horizontal_lift(&l, &bracket)? + tensor_t(&l, &x, &y)? * 2.0;
    t.at_most("bracket-relation", rel_diff(&(dxy - dyx), &expected), FD_TOL);

    let tt = tensor_t(&l, &x, &y)?;
    let pushed = dsigma(&l, &tt)?;
    let scale = 1.0 + l.as_matrix().norm() * tt.norm();
    t.at_most("vertical-tensor", pushed.norm_fro() / scale, tol);
    Ok(())
}

fn jacobi_trial(t: &mut Trial) -> Result<()> {
    let a = t.spd();
    let x = t.sym();
    let y = t.sym();
    let raw = JacobiSpec::new(a.clone(), x.clone(), y)?;
    let ny = norm(&a, raw.seed_derivative())?;
    let spec = JacobiSpec::new(a.clone(), x.clone(), raw.seed_derivative() * (1.0 / ny))?;
    let span = spec.t_max().finite().unwrap_or(10.0).min(10.0);

    let mut worst = 0.0f64;
    for k in 1..=9 {
        let s = span * k as f64 / 10.0;
        let j = jacobi_field(&spec, s)?;
        let v = variation_oracle(&spec, s, DEFAULT_VARIATION_STEP)?;
        worst = worst.max(rel_diff(j.as_matrix(), v.as_matrix()));
    }
    t.at_most("variation", worst, JACOBI_TOL);

    let h = 1e-6;
    let dj = &jacobi_field(&spec, h)? * (1.0 / h);
    let j0 = jacobi_field(&spec, 0.0)?;
    t.at_most("initial-value", j0.norm_fro(), 0.0);
    let dj0 = covariant_derivative_along(&a, &x, &j0, &dj)?;
    t.at_most(
        "initial-derivative",
        rel_diff(dj0.as_matrix(), spec.seed_derivative().as_matrix()),
        FD_TOL,
    );

    let grid: Vec<f64> = (1..=50).map(|k| 0.99 * span * k as f64 / 50.0).collect();
    t.at_least("no-conjugate-point", min_jacobi_norm(&spec, &grid)?, WITNESS_FLOOR);

    let y1 = t.sym();
    let y2 = t.sym();
    let s = 0.5 * span;
    let j1 = jacobi_field(&JacobiSpec::new(a.clone(), x.clone(), y1.clone())?, s)?;
    let j2 = jacobi_field(&JacobiSpec::new(a.clone(), x.clone(), y2.clone())?, s)?;
    let j12 = jacobi_field(&JacobiSpec::new(a, x, &y1 + &y2)?, s)?;
    t.at_most("additivity", rel_diff(j12.as_matrix(), (&j1 + &j2).as_matrix()), ADDITIVITY_TOL);
    Ok(())
}

fn curvature_trial(t: &mut Trial) -> Result<()> {
    let tol = t.tol;
    let n = t.n;
    let a = t.spd();
    let x = t.sym();
    let y = t.sym();

    let r = curvature_value(&a, &x, &y)?;
    t.at_least("non-negative", r, NEGATIVE_CURVATURE_TOL);
    let rt = curvature_from_tensor(&a, &x, &y)?;
    t.at_most("tensor-identity", rel_scalar(r, rt), tol);

    let lambdas = a.spectrum().eigenvalues().to_vec();
    let lmin = lambdas[0];
    let diag = SpdMatrix::from_diagonal(&lambdas)?;
    let basis = BasisIndex::all(n);
    let mut agree = 0.0f64;
    let mut lowest = f64::INFINITY;
    let mut upper = 0.0f64;
    let mut pattern = 0.0f64;
    for (i, &s1) in basis.iter().enumerate() {
        for &s2 in &basis[i + 1..] {
            let closed = sectional_basis(&lambdas, s1, s2)?;
            let general = sectional(&diag, &s1.matrix(n), &s2.matrix(n))?;
            agree = agree.max((closed - general).abs() * lmin / 3.0);
            lowest = lowest.min(closed);
            upper = upper.max(closed * lmin / 3.0);
            if closed != 0.0 {
                // Nonzero values come from pairs sharing one index; the
                // other two indices bound the value.
                let (p, t_) = outer_indices(s1, s2);
                pattern = pattern.max(closed * (lambdas[p] + lambdas[t_]) / 3.0);
            }
        }
    }
    t.at_most("basis-closed-form", agree, BASIS_TOL);
    t.at_least("basis-lower-bound", lowest, 0.0);
    // Margins below 3 / lambda_min (strict) and 3 / (lambda_p + lambda_t).
    t.at_least("basis-upper-margin", 1.0 - upper, f64::EPSILON);
    t.at_least("basis-pattern-margin", 1.0 - pattern, -1e-12);

    let s = scalar_curvature(&a);
    t.at_most("scalar-oracle", rel_scalar(s, scalar_sum_oracle(&lambdas)?), tol);
    let o = random_orthogonal_with(&mut t.rng, n);
    t.at_most("scalar-invariance", rel_scalar(scalar_curvature(&act(&o, &a)?), s), tol);
    let k0 = sectional(&a, &x, &y)?;
    let ko = sectional(&act(&o, &a)?, &act_tangent(&o, &x)?, &act_tangent(&o, &y)?)?;
    t.at_most("sectional-invariance", rel_scalar(ko, k0), tol);

    let mut ratio = 0.0f64;
    for k in [0.1, 2.0, 10.0] {
        let kk = sectional(&a.scale(k)?, &x, &y)?;
        ratio = ratio.max(rel_scalar(kk * k, k0));
    }
    t.at_most("inverse-ratio", ratio, tol);
    Ok(())
}

/// For basis pairs `S^{p,q}, S^{r,t}` sharing exactly one index, the two
/// indices that are not shared.
fn outer_indices(s1: BasisIndex, s2: BasisIndex) -> (usize, usize) {
    let a = [s1.p(), s1.q()];
    let b = [s2.p(), s2.q()];
    for i in 0..2 {
        for j in 0..2 {
            if a[i] == b[j] {
                return (a[1 - i], b[1 - j]);
            }
        }
    }
    (a[0], b[0])
}
