//! Fréchet (Karcher) means by Riemannian gradient descent.
//!
//! The iteration is `p ← exp_p(λ Σ wᵢ log_p(pᵢ) / Σ wᵢ)` with `λ = 1`,
//! halved while the objective increases. `M` is a Hadamard manifold, so the
//! minimizer is unique and the result does not depend on the start point.

use alloc::vec::Vec;

use libm::sqrt;

use crate::geodesics::{exp_map, log_map_with, ShootingOptions};
use crate::geometry::{energy, Point, Tangent};
use crate::specfun::MetricFunction;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MeanOptions {
    /// Bound on the metric norm of the mean tangent vector.
    pub tol: f64,
    pub max_iterations: usize,
    /// Start point; the weighted Euclidean mean when absent.
    pub init: Option<Point>,
}

impl Default for MeanOptions {
    fn default() -> Self {
        MeanOptions {
            tol: 1e-8,
            max_iterations: 200,
            init: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanResult {
    pub mean: Point,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    /// `Σ wᵢ d(mean, pᵢ)² / Σ wᵢ`.
    pub variance: f64,
}

const MAX_HALVINGS: usize = 30;

fn validate(points: &[Point], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let first = points.first().ok_or(Error::Usage("at least one point is required"))?;
    if points.iter().any(|p| p.dim() != first.dim()) {
        return Err(Error::Usage("points have different dimensions"));
    }
    match weights {
        None => Ok(alloc::vec![1.0; points.len()]),
        Some(w) if w.len() != points.len() => Err(Error::Usage("weights and points have different lengths")),
        Some(w) => {
            if let Some(&bad) = w.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::Domain {
                    what: "weights must be positive",
                    value: bad,
                });
            }
            Ok(w.to_vec())
        }
    }
}

struct Evaluation {
    logs: Vec<Vec<f64>>,
    /// `Σ wᵢ d²`.
    objective: f64,
    gradient: Tangent,
    gradient_norm: f64,
}

fn evaluate<F: MetricFunction + ?Sized>(
    mf: &F,
    p: &Point,
    points: &[Point],
    weights: &[f64],
    warm: Option<&[Vec<f64>]>,
    shooting_tol: f64,
) -> Result<Evaluation> {
    let total: f64 = weights.iter().sum();
    let mut logs = Vec::with_capacity(points.len());
    let mut objective = 0.0;
    let mut mean = alloc::vec![0.0; p.dim()];
    for (i, (q, &w)) in points.iter().zip(weights).enumerate() {
        let opts = ShootingOptions {
            tol: shooting_tol,
            initial_velocity: warm.map(|v| v[i].clone()),
            ..ShootingOptions::default()
        };
        let v = log_map_with(mf, p, q, &opts)?.initial_velocity.into_components();
        objective += w * energy(mf, p.coords(), &v);
        for (m, c) in mean.iter_mut().zip(&v) {
            *m += w * c / total;
        }
        logs.push(v);
    }
    let gradient_norm = sqrt(energy(mf, p.coords(), &mean).max(0.0));
    Ok(Evaluation {
        logs,
        objective,
        gradient: Tangent::new(p.clone(), mean)?,
        gradient_norm,
    })
}

fn shooting_tol(tol: f64) -> f64 {
    (1e-2 * tol).clamp(1e-12, 1e-10)
}

/// Weighted Fréchet mean `argmin_p Σ wᵢ d(p, pᵢ)²`.
pub fn frechet_mean<F: MetricFunction + ?Sized>(
    mf: &F,
    points: &[Point],
    weights: Option<&[f64]>,
    opts: &MeanOptions,
) -> Result<MeanResult> {
    let weights = validate(points, weights)?;
    if !(opts.tol > 0.0) {
        return Err(Error::Usage("mean tolerance must be positive"));
    }
    let stol = shooting_tol(opts.tol);
    let total: f64 = weights.iter().sum();
    let mut p = match &opts.init {
        Some(init) if init.dim() != points[0].dim() => return Err(Error::Usage("start point has the wrong dimension")),
        Some(init) => init.clone(),
        None if points.iter().all(|q| q == &points[0]) => points[0].clone(),
        None => Point::euclidean_mean(points, Some(&weights))?,
    };
    let mut eval = evaluate(mf, &p, points, &weights, None, stol)?;
    let mut trace = alloc::vec![eval.gradient_norm];
    let mut iterations = 0;
    while eval.gradient_norm > opts.tol {
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence {
                what: "Frechet mean",
                iterations,
                residual: eval.gradient_norm,
                trace,
            });
        }
        iterations += 1;
        let slack = 1e-9 * (1.0 + eval.objective);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let step = eval.gradient.scaled(lambda);
            if let Ok(next) = exp_map(mf, &p, &step) {
                if let Ok(e) = evaluate(mf, &next, points, &weights, Some(&eval.logs), stol) {
                    if e.objective <= eval.objective + slack {
                        accepted = Some((next, e));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((next, e)) = accepted else {
            return Err(Error::NoConvergence {
                what: "Frechet mean line search",
                iterations,
                residual: eval.gradient_norm,
                trace,
            });
        };
        p = next;
        eval = e;
        trace.push(eval.gradient_norm);
    }
    Ok(MeanResult {
        mean: p,
        iterations,
        final_gradient_norm: eval.gradient_norm,
        variance: eval.objective / total,
    })
}

/// `Σ wᵢ d(p, pᵢ)²`.
pub fn frechet_objective<F: MetricFunction + ?Sized>(
    mf: &F,
    p: &Point,
    points: &[Point],
    weights: Option<&[f64]>,
) -> Result<f64> {
    let weights = validate(points, weights)?;
    if p.dim() != points[0].dim() {
        return Err(Error::Usage("point has the wrong dimension"));
    }
    Ok(evaluate(mf, p, points, &weights, None, 1e-10)?.objective)
}
