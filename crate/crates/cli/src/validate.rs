//! The `validate` command: invariants of every module checked on seeded
//! random samples.
//!
//! Each check draws from its own generator, seeded from `--seed` and its
//! position in [`CHECKS`], so results do not depend on scheduling. Checks
//! marked informational report a finding without gating the exit status.

use std::fmt::Write as _;

use fisher_dirichlet::curvature::{
    asymptotic_limits, axis_difference, conjecture_report, gaussian_2d, LOWER_BOUND, LOWER_BOUND_SLACK,
};
use fisher_dirichlet::embedding::{isometry_defect, Embedding, GRAPH_TOL};
use fisher_dirichlet::frechet::{frechet_mean, frechet_objective, MeanOptions};
use fisher_dirichlet::geodesics::{diagonal_geodesic, diagonal_q, exp_map, geodesic_ivp, log_map};
use fisher_dirichlet::geometry::{christoffel, energy, metric, metric_inverse};
use fisher_dirichlet::linalg::{cholesky, Matrix};
use fisher_dirichlet::specfun::{log_grid, polygamma, superadditivity_gaps, verify_assumptions};
use fisher_dirichlet::{Family, Point, Tangent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::commands::tabulate_parallel;
use crate::config::RunConfig;
use crate::figures::MEAN_INPUTS;
use crate::report::{Report, Table};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_260_101;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Info => "info",
        }
    }
}

type Outcome = Result<(bool, String), CliError>;

pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub gating: bool,
    run: fn(&Family, &mut ChaCha8Rng) -> Outcome,
}

const fn gate(module: &'static str, name: &'static str, run: fn(&Family, &mut ChaCha8Rng) -> Outcome) -> Check {
    Check {
        module,
        name,
        gating: true,
        run,
    }
}

const fn info(module: &'static str, name: &'static str, run: fn(&Family, &mut ChaCha8Rng) -> Outcome) -> Check {
    Check {
        module,
        name,
        gating: false,
        run,
    }
}

pub const CHECKS: &[Check] = &[
    gate("specfun", "trigamma-recurrence", trigamma_recurrence),
    gate("specfun", "polygamma-special-values", special_values),
    gate("specfun", "metric-function-assumptions", assumptions),
    gate("specfun", "superadditivity", superadditivity),
    gate("geometry", "metric-positive-definite", positive_definite),
    gate("geometry", "metric-inverse", inverse),
    gate("geometry", "christoffel-finite-differences", christoffel_fd),
    gate("embedding", "pushforward-isometry", isometry),
    gate("embedding", "embed-round-trip", embed_round_trip),
    gate("curvature", "negative-2d", negative_2d),
    gate("curvature", "corner-asymptotes", asymptotes),
    gate("geodesics", "exp-log-round-trip", exp_log),
    gate("geodesics", "energy-conservation", energy_conservation),
    gate("geodesics", "diagonal-conservation", diagonal_conservation),
    gate("geodesics", "diagonal-duplication", diagonal_duplication),
    gate("frechet", "beta-mean-beats-euclidean", mean_beats_euclidean),
    gate("frechet", "mean-start-independence", mean_start_independence),
    info("curvature", "lower-bound-scan", lower_bound_scan),
    info("curvature", "axis-difference-sign-small", |mf, _| {
        axis_difference_signs(mf, 0.1)
    }),
    info("curvature", "axis-difference-sign-wide", |mf, _| {
        axis_difference_signs(mf, 1.0)
    }),
];

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let outcomes: Vec<(Status, String)> = CHECKS
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let (ok, detail) = match (c.run)(&mf, &mut rng) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            let status = match (c.gating, ok) {
                (false, _) => Status::Info,
                (true, true) => Status::Pass,
                (true, false) => Status::Fail,
            };
            (status, detail)
        })
        .collect();

    let mut table = Table::new("validate", ["module", "check", "status", "detail"]);
    let mut text = String::new();
    for (c, (status, detail)) in CHECKS.iter().zip(&outcomes) {
        table.push(vec![
            c.module.into(),
            c.name.into(),
            status.label().into(),
            detail.clone().into(),
        ]);
        let _ = writeln!(text, "{:<10} {:<32} {:<5} {}", c.module, c.name, status.label(), detail);
    }
    let count = |s: Status| outcomes.iter().filter(|(st, _)| *st == s).count();
    let failed = count(Status::Fail);
    let _ = writeln!(
        text,
        "{} passed, {} failed, {} informational",
        count(Status::Pass),
        failed,
        count(Status::Info)
    );

    let mut report = Report::new(
        "validate",
        json!({
            "family": mf.to_string(),
            "seed": seed,
            "passed": count(Status::Pass),
            "failed": failed,
            "informational": count(Status::Info),
        }),
    );
    report.tables.push(table);
    report.text = Some(text);
    report.failed_checks = failed;
    Ok(report)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Point {
    Point::new((0..n).map(|_| log_uniform(rng, lo, hi)).collect()).expect("positive coordinates")
}

/// Components `xᵢ·U(−1, 1)`, scaled to metric length `len`.
fn random_tangent(mf: &Family, rng: &mut ChaCha8Rng, p: &Point, len: f64) -> Tangent {
    let c: Vec<f64> = p.coords().iter().map(|x| x * rng.gen_range(-1.0..1.0)).collect();
    let e = energy(mf, p.coords(), &c);
    Tangent::new(p.clone(), c.iter().map(|v| v * len / e.sqrt()).collect()).expect("matching dimension")
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `max` of `f` over `count` draws, or the first error.
fn worst(count: usize, mut f: impl FnMut() -> Result<f64, CliError>) -> Result<f64, CliError> {
    let mut w: f64 = 0.0;
    for _ in 0..count {
        let e = f()?;
        w = if e.is_nan() { f64::NAN } else { w.max(e) };
    }
    Ok(w)
}

fn bounded(w: f64, tol: f64) -> Outcome {
    Ok((w <= tol, format!("max error {w:.3e} (tolerance {tol:.0e})")))
}

fn trigamma_recurrence(_: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let w = worst(200, || {
        let x = log_uniform(rng, 1e-3, 1e3);
        // Relative to ψ′(x): the difference ψ′(x) − 1/x² cancels for small x.
        let p = polygamma(1, x)?;
        Ok((polygamma(1, x + 1.0)? - p + 1.0 / (x * x)).abs() / p)
    })?;
    bounded(w, 1e-14)
}

fn special_values(_: &Family, _: &mut ChaCha8Rng) -> Outcome {
    use core::f64::consts::PI;
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let errs = [
        rel_err(polygamma(0, 1.0)?, -EULER_GAMMA),
        rel_err(polygamma(1, 1.0)?, PI * PI / 6.0),
        rel_err(polygamma(1, 0.5)?, PI * PI / 2.0),
        rel_err(polygamma(2, 1.0)?, -2.0 * 1.202_056_903_159_594_2),
    ];
    bounded(errs.into_iter().fold(0.0, f64::max), 1e-13)
}

fn assumptions(mf: &Family, _: &mut ChaCha8Rng) -> Outcome {
    let violations = verify_assumptions(mf, &log_grid(1e-3, 1e3, 200))?;
    Ok((
        violations.is_empty(),
        format!("{} violations on [1e-3, 1e3]", violations.len()),
    ))
}

fn superadditivity(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let mut bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let xs: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1e-3, 1e3)).collect();
        let (a, b) = superadditivity_gaps(mf, &xs);
        if !(a > 0.0 && b > 0.0) {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} of 200 tuples with a non-positive gap")))
}

fn positive_definite(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let mut bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let p = random_point(rng, n, 1e-2, 1e2);
        if cholesky(metric(mf, &p).matrix()).is_err() {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} of 200 points without a Cholesky factor")))
}

fn inverse(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let w = worst(200, || {
        let n = rng.gen_range(2..=5);
        let p = random_point(rng, n, 0.1, 10.0);
        let prod = metric(mf, &p).matrix().mul(metric_inverse(mf, &p).matrix());
        Ok(prod.max_abs_diff(&Matrix::identity(n)))
    })?;
    bounded(w, 1e-9)
}

/// `Γᵏᵢⱼ = ½ gᵏˡ(∂ᵢgⱼₗ + ∂ⱼgᵢₗ − ∂ₗgᵢⱼ)` with central differences.
fn christoffel_fd(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let w = worst(40, || {
        let n = rng.gen_range(2..=4);
        let p = random_point(rng, n, 0.2, 5.0);
        let dg: Vec<Matrix> = (0..n)
            .map(|l| {
                let h = 1e-5 * p.coords()[l];
                let shifted = |s: f64| {
                    let mut c = p.coords().to_vec();
                    c[l] += s;
                    metric(mf, &Point::new(c).expect("positive")).matrix().clone()
                };
                let (a, b) = (shifted(h), shifted(-h));
                Matrix::from_fn(n, |i, j| (a[(i, j)] - b[(i, j)]) / (2.0 * h))
            })
            .collect();
        let inv = metric_inverse(mf, &p);
        let gamma = christoffel(mf, &p);
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let fd: f64 = (0..n)
                        .map(|l| 0.5 * inv.get(k, l) * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                        .sum();
                    err = err.max((fd - gamma.get(k, i, j)).abs());
                    scale = scale.max(fd.abs());
                }
            }
        }
        Ok(err / scale)
    })?;
    bounded(w, 1e-6)
}

fn isometry(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let w = worst(200, || {
        let n = rng.gen_range(2..=5);
        let p = random_point(rng, n, 1e-2, 1e2);
        Ok(isometry_defect(mf, &random_tangent(mf, rng, &p, 1.0))?)
    })?;
    bounded(w, 1e-8)
}

fn embed_round_trip(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let emb = Embedding::new(*mf);
    let w = worst(200, || {
        let n = rng.gen_range(2..=5);
        let p = random_point(rng, n, 1e-2, 1e2);
        let e = emb.embed(&p);
        if emb.graph_residual(&e)? > GRAPH_TOL {
            return Ok(f64::INFINITY);
        }
        let back = emb.unembed(&e)?;
        Ok(p.coords()
            .iter()
            .zip(back.coords())
            .map(|(a, b)| rel_err(*b, *a))
            .fold(0.0, f64::max))
    })?;
    bounded(w, 1e-8)
}

fn negative_2d(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let mut bad = 0;
    for _ in 0..1000 {
        let (x, y) = (log_uniform(rng, 1e-3, 1e3), log_uniform(rng, 1e-3, 1e3));
        if !(gaussian_2d(mf, x, y)? < 0.0) {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} of 1000 points with K >= 0")))
}

fn asymptotes(mf: &Family, _: &mut ChaCha8Rng) -> Outcome {
    if *mf != Family::Trigamma {
        return Ok((true, "limits are only known for the trigamma family".into()));
    }
    let mut w: f64 = 0.0;
    for x in [0.5, 1.0, 2.0, 5.0] {
        let (zero, inf) = asymptotic_limits(mf, x)?;
        w = w.max((gaussian_2d(mf, x, 1e-7)? - zero).abs());
        w = w.max((gaussian_2d(mf, x, 1e6)? - inf).abs());
    }
    bounded(w, 1e-3)
}

fn exp_log(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let w = worst(20, || {
        let n = rng.gen_range(2..=3);
        let p = random_point(rng, n, 0.5, 5.0);
        let len = rng.gen_range(0.05..3.0);
        let v = random_tangent(mf, rng, &p, len);
        let q = exp_map(mf, &p, &v)?;
        let back = log_map(mf, &p, &q, 1e-10)?.initial_velocity;
        let diff: Vec<f64> = back
            .components()
            .iter()
            .zip(v.components())
            .map(|(a, b)| a - b)
            .collect();
        Ok(energy(mf, p.coords(), &diff).sqrt() / len)
    })?;
    bounded(w, 1e-6)
}

fn energy_conservation(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let w = worst(10, || {
        let n = rng.gen_range(2..=4);
        let p = random_point(rng, n, 0.5, 5.0);
        let v = random_tangent(mf, rng, &p, 1.0);
        Ok(geodesic_ivp(mf, &p, &v, 10.0, 51)?.energy_drift(mf))
    })?;
    bounded(w, 1e-6)
}

fn diagonal_conservation(mf: &Family, rng: &mut ChaCha8Rng) -> Outcome {
    let w = worst(10, || {
        let x0 = log_uniform(rng, 0.1, 10.0);
        let xdot0 = rng.gen_range(-1.0..1.0) * x0;
        let path = diagonal_geodesic(mf, x0, xdot0, 2.0, 41)?;
        let c0 = xdot0 * diagonal_q(mf, x0).sqrt();
        Ok(path
            .velocities
            .iter()
            .map(|v| rel_err(v.components()[0] * diagonal_q(mf, v.base().coords()[0]).sqrt(), c0))
            .fold(0.0, f64::max))
    })?;
    bounded(w, 1e-8)
}

fn diagonal_duplication(mf: &Family, _: &mut ChaCha8Rng) -> Outcome {
    if *mf != Family::Trigamma {
        return Ok((true, "identity holds for the trigamma family only".into()));
    }
    let w = worst_over(&log_grid(1e-3, 1e3, 60), |x| {
        Ok(rel_err(
            diagonal_q(mf, x),
            0.5 * (polygamma(1, x)? - polygamma(1, x + 0.5)?),
        ))
    })?;
    bounded(w, 1e-10)
}

fn worst_over(xs: &[f64], f: impl Fn(f64) -> Result<f64, CliError>) -> Result<f64, CliError> {
    let mut it = xs.iter();
    worst(xs.len(), || f(*it.next().expect("one value per draw")))
}

fn beta_inputs() -> Vec<Point> {
    MEAN_INPUTS
        .iter()
        .map(|c| Point::new(c.to_vec()).expect("positive"))
        .collect()
}

fn mean_beats_euclidean(mf: &Family, _: &mut ChaCha8Rng) -> Outcome {
    let pts = beta_inputs();
    let mean = frechet_mean(mf, &pts, None, &MeanOptions::default())?;
    let euclid = Point::euclidean_mean(&pts, None)?;
    let (a, b) = (
        frechet_objective(mf, &mean.mean, &pts, None)?,
        frechet_objective(mf, &euclid, &pts, None)?,
    );
    Ok((
        a < b,
        format!("objective {a:.10} at the mean, {b:.10} at the Euclidean mean"),
    ))
}

fn mean_start_independence(mf: &Family, _: &mut ChaCha8Rng) -> Outcome {
    let pts = beta_inputs();
    let tol = 1e-9;
    let means = pts
        .iter()
        .map(|start| {
            let opts = MeanOptions {
                tol,
                init: Some(start.clone()),
                ..MeanOptions::default()
            };
            Ok(frechet_mean(mf, &pts, None, &opts)?.mean)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let w = means
        .iter()
        .flat_map(|m| m.coords().iter().zip(means[0].coords()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    bounded(w, 10.0 * tol)
}

fn lower_bound_scan(mf: &Family, _: &mut ChaCha8Rng) -> Outcome {
    let xs = log_grid(1e-3, 1e3, 80);
    let grid = tabulate_parallel(&xs, &xs, |x, y| gaussian_2d(mf, x, y))?;
    let r = conjecture_report(&grid);
    Ok((
        r.min >= LOWER_BOUND - LOWER_BOUND_SLACK,
        format!(
            "min K {:.6} at ({:.3e}, {:.3e}) on [1e-3, 1e3]; {} cells below {}",
            r.min, r.argmin.0, r.argmin.1, r.below_lower_bound, LOWER_BOUND
        ),
    ))
}

fn axis_difference_signs(mf: &Family, hi: f64) -> Outcome {
    let xs: Vec<f64> = (0..40).map(|i| 0.005 + (hi - 0.005) * i as f64 / 39.0).collect();
    let grid = tabulate_parallel(&xs, &xs, |x, y| axis_difference(mf, x, y, 0.01))?;
    let (pos, neg) = (grid.count(|v| v > 0.0), grid.count(|v| v < 0.0));
    Ok((
        pos > 0 && neg > 0,
        format!(
            "K3(x, y, 0.01) - K2 on [0.005, {hi}]: {pos} positive, {neg} negative of {}",
            xs.len() * xs.len()
        ),
    ))
}
