//! Acceptance criteria, one line each. Run with
//! `cargo test -p bures-core --test acceptance -- --nocapture`.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use bures_core::curvature::{
    scalar_curvature, scalar_sum_oracle, sectional, sectional_basis, BasisIndex,
};
use bures_core::geodesy::{degenerate_direction, exp_map, max_extension, radius};
use bures_core::invariants::{run_suite, CheckConfig, PropertyResult, Suite};
use bures_core::jacobi::{jacobi_field, variation_oracle, JacobiSpec};
use bures_core::matcore::{
    random_orthogonal_with, random_spd_with, random_symmetric_with, rel_diff, seeded_rng,
};
use bures_core::metric::{act, act_tangent, distance, norm};
use bures_core::{Extension, SpdMatrix, SymMatrix};
use rand::Rng;

const SEED: u64 = 20_240_601;

enum Verdict {
    Pass(String),
    Fail(String),
    /// A clause that cannot hold as stated; the detail records what was
    /// measured instead, and the criterion asserts that measurement.
    Unattainable(String),
}

struct Board {
    failures: Vec<usize>,
    unattainable: Vec<usize>,
}

impl Board {
    fn record(&mut self, id: usize, name: &str, verdict: Verdict) {
        let (tag, detail) = match &verdict {
            Verdict::Pass(d) => ("PASS", d.clone()),
            Verdict::Fail(d) => {
                self.failures.push(id);
                ("FAIL", d.clone())
            }
            Verdict::Unattainable(d) => {
                self.unattainable.push(id);
                ("FAIL", format!("not attainable as stated: {d}"))
            }
        };
        println!("criterion {id:>2} {name:<20} {tag}  {detail}");
    }
}

fn suite_verdict(results: &[PropertyResult], wanted: &[&str], elapsed: Duration, budget: Duration) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = elapsed < budget;
    for r in results {
        if !wanted.is_empty() && !wanted.contains(&r.property) {
            continue;
        }
        ok &= r.passed();
        parts.push(format!("{}={:.1e}", r.property, r.worst));
    }
    for w in wanted {
        if !results.iter().any(|r| r.property == *w) {
            ok = false;
            parts.push(format!("{w}=missing"));
        }
    }
    if results.iter().any(|r| r.property == "evaluation") {
        ok = false;
        parts.push("evaluation errors".into());
    }
    let detail = format!("{} in {:.2}s", parts.join(" "), elapsed.as_secs_f64());
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn criterion_1() -> Verdict {
    let cfg = CheckConfig::new(2, 1000, SEED).with_dims(2, 10);
    let (results, elapsed) = timed(|| run_suite(Suite::Sylvester, &cfg).unwrap());
    suite_verdict(&results, &[], elapsed, Duration::from_secs(10))
}

fn criterion_2() -> Verdict {
    let cfg = CheckConfig::new(2, 500, SEED).with_dims(2, 8);
    let (results, elapsed) = timed(|| run_suite(Suite::Metric, &cfg).unwrap());
    suite_verdict(&results, &["submersion"], elapsed, Duration::from_secs(60))
}

fn criterion_3() -> Verdict {
    let cfg = CheckConfig::new(2, 500, SEED).with_dims(2, 8);
    let (results, elapsed) = timed(|| run_suite(Suite::Geodesy, &cfg).unwrap());
    suite_verdict(
        &results,
        &["exp-log", "log-exp", "arc-length", "geodesic-equation", "spd-along-curve"],
        elapsed,
        Duration::from_secs(60),
    )
}

fn criterion_4() -> Verdict {
    let a = SpdMatrix::identity(2);
    let x = -&SymMatrix::identity(2);
    let e = match max_extension(&a, &x).unwrap() {
        Extension::Finite(e) => e,
        Extension::Unbounded => return Verdict::Fail("extension reported unbounded".into()),
    };
    let inside = (0..200).all(|k| exp_map(&a, &(&x * (2.0 * k as f64 / 200.0))).is_ok());
    let near = exp_map(&a, &(&x * (2.0 - 1e-8))).unwrap().determinant();
    let at = exp_map(&a, &(&x * 2.0)).is_err();
    let detail = format!("eps_max={e} det(2-1e-8)={near:.3e} defined on [0,2)={inside} rejected at 2={at}");
    if (e - 2.0).abs() <= 1e-12 && inside && near < 1e-10 && at {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_5() -> Verdict {
    let mut rng = seeded_rng(SEED);
    let r_id = radius(&SpdMatrix::identity(2));
    let value_ok = (r_id - 2f64.sqrt() / 2.0).abs() <= 1e-12;

    let mut lower_ok = true;
    let mut exit_ratio: f64 = 0.0;
    let mut minimizer_ok = true;
    let points: Vec<SpdMatrix> = std::iter::once(SpdMatrix::identity(2))
        .chain((0..4).map(|k| random_spd_with(&mut rng, 2 + k)))
        .collect();
    for a in &points {
        let r = radius(a);
        let mut min_exit = f64::INFINITY;
        for _ in 0..200 {
            let z = random_symmetric_with(&mut rng, a.dim());
            let unit = &z * (1.0 / norm(a, &z).unwrap());
            if let Extension::Finite(e) = max_extension(a, &unit).unwrap() {
                min_exit = min_exit.min(e);
            }
        }
        lower_ok &= min_exit >= r - 1e-6;
        let v = degenerate_direction(a);
        let unit = &v * (1.0 / norm(a, &v).unwrap());
        let exit = max_extension(a, &unit).unwrap().finite().unwrap();
        minimizer_ok &= exit <= min_exit + 1e-6;
        exit_ratio = exit_ratio.max((exit / r - 2f64.sqrt()).abs());
    }

    let detail = format!(
        "radius(I2)={r_id:.16} (ok={value_ok}); min exit over 200 unit tangents >= radius - 1e-6 (ok={lower_ok}); \
         degenerate direction is the minimizer (ok={minimizer_ok}) but exits at sqrt(2)*radius \
         (|exit/radius - sqrt 2| <= {exit_ratio:.1e}) because its g_W length is sqrt(lambda_min), not sqrt(lambda_min/2)"
    );
    if !(value_ok && lower_ok && minimizer_ok) {
        return Verdict::Fail(detail);
    }
    assert!(exit_ratio < 1e-9, "{detail}");
    Verdict::Unattainable(detail)
}

fn criterion_6() -> Verdict {
    let mut rng = seeded_rng(SEED + 6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let a = random_spd_with(&mut rng, n);
        let b = random_spd_with(&mut rng, n);
        let x = random_symmetric_with(&mut rng, n);
        let y = random_symmetric_with(&mut rng, n);
        let o = random_orthogonal_with(&mut rng, n);
        let (oa, ob) = (act(&o, &a).unwrap(), act(&o, &b).unwrap());
        let (ox, oy) = (act_tangent(&o, &x).unwrap(), act_tangent(&o, &y).unwrap());
        let rel = |p: f64, q: f64| (p - q).abs() / p.abs().max(q.abs());
        worst = worst
            .max(rel(distance(&oa, &ob).unwrap(), distance(&a, &b).unwrap()))
            .max(rel(sectional(&oa, &ox, &oy).unwrap(), sectional(&a, &x, &y).unwrap()))
            .max(rel(scalar_curvature(&oa), scalar_curvature(&a)));
    }
    let detail = format!("max relative change {worst:.1e} over 100 conjugations");
    if worst <= 1e-9 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_7() -> Verdict {
    let cfg = CheckConfig::new(2, 500, SEED).with_dims(2, 6);
    let (results, elapsed) = timed(|| run_suite(Suite::Jacobi, &cfg).unwrap());
    let base = suite_verdict(&results, &["variation", "no-conjugate-point"], elapsed, Duration::from_secs(60));
    let base = match base {
        Verdict::Pass(d) => d,
        other => return other,
    };

    // exp_A(t (X + s Y)) is a quadratic polynomial in s, so the central
    // difference carries no truncation error: its error is roundoff alone
    // and does not shrink with h.
    let mut rng = seeded_rng(SEED + 7);
    let steps = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut errors = [0.0f64; 4];
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let a = random_spd_with(&mut rng, n);
        let spec = JacobiSpec::new(a, random_symmetric_with(&mut rng, n), random_symmetric_with(&mut rng, n)).unwrap();
        let t = 0.5 * spec.t_max().finite().unwrap_or(2.0).min(2.0);
        let j = jacobi_field(&spec, t).unwrap();
        for (k, &h) in steps.iter().enumerate() {
            let v = variation_oracle(&spec, t, h).unwrap();
            errors[k] = errors[k].max(rel_diff(j.as_matrix(), v.as_matrix()));
        }
    }
    let ratios: Vec<String> = errors.iter().map(|e| format!("{e:.1e}")).collect();
    let detail = format!(
        "{base}; error at h = 1e-1..1e-4 is {} (roundoff only, no O(h^2) decay to observe: exp_A(t(X + sY)) is exactly quadratic in s)",
        ratios.join(", ")
    );
    assert!(errors.iter().all(|&e| e < 1e-9), "{detail}");
    Verdict::Unattainable(detail)
}

fn criterion_8() -> Verdict {
    let cfg = CheckConfig::new(2, 1000, SEED).with_dims(2, 8);
    let (results, elapsed) = timed(|| run_suite(Suite::Curvature, &cfg).unwrap());
    let suite = suite_verdict(
        &results,
        &[
            "non-negative",
            "tensor-identity",
            "basis-lower-bound",
            "basis-upper-margin",
            "inverse-ratio",
        ],
        elapsed,
        Duration::from_secs(120),
    );
    let suite = match suite {
        Verdict::Pass(d) => d,
        other => return other,
    };

    let mut rng = seeded_rng(SEED + 8);
    let mut worst: f64 = 0.0;
    let mut in_bounds = true;
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let lambdas = spectrum(&mut rng, n);
        let a = SpdMatrix::from_diagonal(&lambdas).unwrap();
        let cap = 3.0 / lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        let basis = BasisIndex::all(n);
        for (i, &s1) in basis.iter().enumerate() {
            for &s2 in &basis[i + 1..] {
                let closed = sectional_basis(&lambdas, s1, s2).unwrap();
                let general = sectional(&a, &s1.matrix(n), &s2.matrix(n)).unwrap();
                worst = worst.max((closed - general).abs());
                in_bounds &= (0.0..cap).contains(&closed);
            }
        }
    }
    let detail = format!("{suite}; closed form vs trace max |diff| {worst:.1e}, bounds ok={in_bounds}");
    if worst <= 1e-10 && in_bounds {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn spectrum(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-1.0..=1.0))).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn criterion_9() -> Verdict {
    let mut rng = seeded_rng(SEED + 9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let lambdas = spectrum(&mut rng, n);
        let trace = scalar_curvature(&SpdMatrix::from_diagonal(&lambdas).unwrap());
        let sum = scalar_sum_oracle(&lambdas).unwrap();
        worst = worst.max((trace - sum).abs() / trace.abs().max(sum.abs()));
    }
    let s_trace = scalar_curvature(&SpdMatrix::identity(2));
    let s_sum = scalar_sum_oracle(&[1.0, 1.0]).unwrap();
    let exact = (s_trace - 2.25).abs() <= 1e-12 && (s_sum - 2.25).abs() <= 1e-12;
    let detail = format!("trace vs triple sum max rel {worst:.1e}; scalar(I2) = {s_trace} / {s_sum}");
    if worst <= 1e-9 && exact {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn bures(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bures"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run bures")
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("d14.json", r#"{"n": 2, "data": [[1, 0], [0, 4]]}"#),
        ("d41.json", r#"{"n": 2, "data": [[4, 0], [0, 1]]}"#),
        ("i.json", r#"{"n": 2, "data": [[1, 0], [0, 1]]}"#),
        ("i9.json", r#"{"n": 2, "data": [[9, 0], [0, 9]]}"#),
        ("mi.json", r#"{"n": 2, "data": [[-1, 0], [0, -1]]}"#),
    ];
    for (name, body) in files {
        fs::write(dir.path().join(name), body).unwrap();
    }

    let cases: [(&[&str], i32, &str); 6] = [
        (&["dist", "d14.json", "d41.json"], 0, "1.414213562373\n"),
        (
            &["geodesic", "i.json", "i9.json", "--samples", "3"],
            0,
            "{\"t\":0.0,\"matrix\":[[1.0,0.0],[0.0,1.0]],\"eigenvalues\":[1.0,1.0],\"radius\":0.7071067811865476}\n\
             {\"t\":0.5,\"matrix\":[[4.0,0.0],[0.0,4.0]],\"eigenvalues\":[4.0,4.0],\"radius\":1.4142135623730951}\n\
             {\"t\":1.0,\"matrix\":[[9.0,0.0],[0.0,9.0]],\"eigenvalues\":[9.0,9.0],\"radius\":2.1213203435596424}\n",
        ),
        (
            &["geodesic", "d14.json", "d41.json", "--samples", "3"],
            0,
            "{\"t\":0.0,\"matrix\":[[1.0,0.0],[0.0,4.0]],\"eigenvalues\":[1.0,4.0],\"radius\":0.7071067811865476}\n\
             {\"t\":0.5,\"matrix\":[[2.25,0.0],[0.0,2.25]],\"eigenvalues\":[2.25,2.25],\"radius\":1.0606601717798212}\n\
             {\"t\":1.0,\"matrix\":[[4.0,0.0],[0.0,1.0]],\"eigenvalues\":[1.0,4.0],\"radius\":0.7071067811865476}\n",
        ),
        (&["log", "d14.json", "d41.json"], 0, "{\"n\":2,\"data\":[[2.0,0.0],[0.0,-4.0]]}\n"),
        (&["exp", "i.json", "mi.json", "--t", "2"], 4, ""),
        (
            &["curvature", "i.json"],
            0,
            "{\"eigenvalues\":[1.0,1.0],\"scalar_curvature\":2.25,\"max_basis_sectional\":0.75,\
             \"min_nonzero_basis_sectional\":0.75,\"radius\":0.7071067811865476}\n",
        ),
    ];

    let mut problems = Vec::new();
    for (args, code, expected) in cases {
        let first = bures(args, dir.path());
        let second = bures(args, dir.path());
        let stdout = String::from_utf8_lossy(&first.stdout);
        if first.status.code() != Some(code) {
            problems.push(format!("{} exited {:?}", args[0], first.status.code()));
        }
        if stdout != expected {
            problems.push(format!("{} printed {stdout:?}", args[0]));
        }
        if first.stdout != second.stdout || first.stderr != second.stderr {
            problems.push(format!("{} not bit-stable", args[0]));
        }
        if code == 4 && !String::from_utf8_lossy(&first.stderr).contains("eps_max = 2") {
            problems.push(format!("exp stderr lacks eps_max: {}", String::from_utf8_lossy(&first.stderr)));
        }
    }

    let (check, elapsed) = timed(|| bures(&["check"], dir.path()));
    if check.status.code() != Some(0) {
        problems.push(format!("check exited {:?}", check.status.code()));
    }
    if elapsed >= Duration::from_secs(120) {
        problems.push(format!("check took {:.1}s", elapsed.as_secs_f64()));
    }
    let rerun = bures(&["check"], dir.path());
    if rerun.stdout != check.stdout {
        problems.push("check report not byte-identical on rerun".into());
    }

    if problems.is_empty() {
        Verdict::Pass(format!("6 examples bit-stable; check defaults exit 0 in {:.1}s", elapsed.as_secs_f64()))
    } else {
        Verdict::Fail(problems.join("; "))
    }
}

#[test]
fn acceptance_criteria() {
    let mut board = Board {
        failures: Vec::new(),
        unattainable: Vec::new(),
    };
    board.record(1, "sylvester", criterion_1());
    board.record(2, "submersion", criterion_2());
    board.record(3, "geodesics", criterion_3());
    board.record(4, "boundary", criterion_4());
    board.record(5, "radius", criterion_5());
    board.record(6, "isometry", criterion_6());
    board.record(7, "jacobi", criterion_7());
    board.record(8, "curvature", criterion_8());
    board.record(9, "scalar curvature", criterion_9());
    board.record(10, "cli", criterion_10());
    println!(
        "acceptance: {} passed, {} failed, {} not attainable as stated {:?}",
        10 - board.failures.len() - board.unattainable.len(),
        board.failures.len(),
        board.unattainable.len(),
        board.unattainable
    );
    assert!(board.failures.is_empty(), "failing criteria: {:?}", board.failures);
}
