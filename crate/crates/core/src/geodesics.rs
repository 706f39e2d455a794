//! Geodesics: exponential map, logarithm map by shooting, distance, and the
//! diagonal geodesics of the two-dimensional case by quadrature.
//!
//! The geodesic ODE is integrated in logarithmic coordinates `sₖ = ln xₖ`,
//! `wₖ = ẋₖ/xₖ`, where `s̈ₖ = ẍₖ/xₖ − wₖ²`. Positivity of the coordinates is
//! then automatic; the quadrant-escape guard still aborts when a coordinate
//! falls below [`ESCAPE_THRESHOLD`].

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use crate::geometry::{energy, relative_acceleration_into, Point, Tangent};
use crate::linalg::{self, Matrix};
use crate::ode::{self, Tolerances, Trajectory};
use crate::quad;
use crate::specfun::MetricFunction;
use crate::{Error, IntegrationFailure, Result};

/// Coordinates below this value abort the integration.
pub const ESCAPE_THRESHOLD: f64 = 1e-12;

/// A sampled geodesic.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub velocities: Vec<Tangent>,
    /// `g(ẋ, ẋ)` at the start.
    pub energy: f64,
}

impl GeodesicPath {
    pub fn start(&self) -> &Point {
        &self.points[0]
    }

    pub fn end(&self) -> &Point {
        self.points.last().expect("paths have at least two samples")
    }

    /// `maxₜ |g(ẋ, ẋ) − E| / E` over the samples; absolute when `E = 0`.
    pub fn energy_drift<F: MetricFunction + ?Sized>(&self, mf: &F) -> f64 {
        let scale = if self.energy > 0.0 { self.energy } else { 1.0 };
        self.velocities
            .iter()
            .map(|v| (energy(mf, v.base().coords(), v.components()) - self.energy).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Smallest coordinate over all samples.
    pub fn min_coordinate(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.coords().iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

fn to_ambient(failure: IntegrationFailure) -> Error {
    let point: Vec<f64> = failure.point.iter().map(|&s| exp(s)).collect();
    let velocity = point.iter().zip(&failure.velocity).map(|(x, w)| x * w).collect();
    Error::Integration(IntegrationFailure {
        point,
        velocity,
        ..failure
    })
}

/// Integrates in log coordinates from `(s0, w0)` over `[0, t_end]`.
fn integrate_log<F: MetricFunction + ?Sized>(mf: &F, s0: &[f64], w0: &[f64], t_end: f64) -> Result<Trajectory> {
    let n = s0.len();
    let mut x = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let accel = |s: &[f64], w: &[f64], out: &mut [f64]| {
        for k in 0..n {
            x[k] = exp(s[k]);
        }
        relative_acceleration_into(mf, &x, w, out, &mut scratch);
        for k in 0..n {
            out[k] -= w[k] * w[k];
        }
    };
    let floor = log(ESCAPE_THRESHOLD);
    let inside = |s: &[f64]| s.iter().all(|&sk| sk > floor);
    ode::integrate(accel, inside, s0, w0, t_end, &Tolerances::default()).map_err(to_ambient)
}

fn log_velocity(p: &Point, v: &[f64]) -> Vec<f64> {
    p.coords().iter().zip(v).map(|(x, vi)| vi / x).collect()
}

fn check_base(p: &Point, v: &Tangent) -> Result<()> {
    if v.base() != p {
        return Err(Error::Usage("tangent vector is not based at the start point"));
    }
    Ok(())
}

/// Solves `ẍₖ + Σ Γᵏᵢⱼ ẋⁱẋʲ = 0` from `(p, v)` over `[0, t_end]` and samples
/// the solution at `samples` equally spaced times.
pub fn geodesic_ivp<F: MetricFunction + ?Sized>(
    mf: &F,
    p: &Point,
    v: &Tangent,
    t_end: f64,
    samples: usize,
) -> Result<GeodesicPath> {
    check_base(p, v)?;
    if samples < 2 {
        return Err(Error::Usage("a geodesic path needs at least two samples"));
    }
    if !t_end.is_finite() {
        return Err(Error::Domain {
            what: "integration time must be finite",
            value: t_end,
        });
    }
    if v.components().iter().all(|&c| c == 0.0) {
        return Ok(GeodesicPath {
            times: (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect(),
            points: vec![p.clone(); samples],
            velocities: vec![v.clone(); samples],
            energy: 0.0,
        });
    }
    let traj = integrate_log(mf, &p.log_coords(), &log_velocity(p, v.components()), t_end)?;
    let mut times = Vec::with_capacity(samples);
    let mut points = Vec::with_capacity(samples);
    let mut velocities = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = if i + 1 == samples {
            t_end
        } else {
            t_end * i as f64 / (samples - 1) as f64
        };
        let (s, w) = if i == 0 {
            (traj.nodes[0].q.clone(), traj.nodes[0].v.clone())
        } else if i + 1 == samples {
            (traj.end().q.clone(), traj.end().v.clone())
        } else {
            traj.sample(t)
        };
        let x = Point::from_log_coords(&s)?;
        let xv = x.coords().iter().zip(&w).map(|(a, b)| a * b).collect();
        times.push(t);
        velocities.push(Tangent::new(x.clone(), xv)?);
        points.push(x);
    }
    // The start sample is exactly (p, v), not a round trip through exp/log.
    points[0] = p.clone();
    velocities[0] = v.clone();
    Ok(GeodesicPath {
        times,
        points,
        velocities,
        energy: energy(mf, p.coords(), v.components()),
    })
}

/// Time-one endpoint of the geodesic with initial velocity `v`.
pub fn exp_map<F: MetricFunction + ?Sized>(mf: &F, p: &Point, v: &Tangent) -> Result<Point> {
    check_base(p, v)?;
    if v.components().iter().all(|&c| c == 0.0) {
        return Ok(p.clone());
    }
    let traj = integrate_log(mf, &p.log_coords(), &log_velocity(p, v.components()), 1.0)?;
    Point::from_log_coords(&traj.end().q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShootingOptions {
    /// Bound on the Euclidean miss `|exp_p(v) − q|` in parameter coordinates.
    pub tol: f64,
    pub max_iterations: usize,
    /// Warm start: an initial velocity at `p`.
    pub initial_velocity: Option<Vec<f64>>,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            tol: 1e-8,
            max_iterations: 50,
            initial_velocity: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShootingResult {
    pub initial_velocity: Tangent,
    pub iterations: usize,
    /// Euclidean miss of the endpoint in parameter coordinates.
    pub residual: f64,
}

struct Shooter<'a, F: ?Sized> {
    mf: &'a F,
    s0: Vec<f64>,
    iterations: usize,
    trace: Vec<f64>,
    best: f64,
}

impl<F: MetricFunction + ?Sized> Shooter<'_, F> {
    fn endpoint(&self, w: &[f64]) -> Option<Vec<f64>> {
        let traj = integrate_log(self.mf, &self.s0, w, 1.0).ok()?;
        let end = traj.end().q.clone();
        end.iter().all(|s| s.is_finite()).then_some(end)
    }

    fn miss(end: &[f64], target: &[f64]) -> (Vec<f64>, f64, f64) {
        let r: Vec<f64> = end.iter().zip(target).map(|(a, b)| a - b).collect();
        let euclid = sqrt(
            end.iter()
                .zip(target)
                .map(|(a, b)| {
                    let d = exp(*a) - exp(*b);
                    d * d
                })
                .sum(),
        );
        let log_norm = linalg::norm2(&r);
        (r, log_norm, euclid)
    }

    /// Damped Newton toward `target` (log coordinates). Returns the
    /// velocity and the final Euclidean miss, or `None` on stagnation.
    fn newton(&mut self, target: &[f64], w: &mut Vec<f64>, tol: f64, budget: usize) -> Option<f64> {
        let n = w.len();
        let end = self.endpoint(w)?;
        let (mut r, mut rn, mut euclid) = Self::miss(&end, target);
        let mut local = 0;
        loop {
            self.best = self.best.min(euclid);
            self.trace.push(euclid);
            if euclid <= tol && rn <= tol {
                return Some(euclid);
            }
            if local >= budget {
                return None;
            }
            local += 1;
            self.iterations += 1;
            let mut jac = Matrix::zeros(n);
            for j in 0..n {
                let h = 1e-6 * (1.0 + w[j].abs());
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += h;
                wm[j] -= h;
                let ep = self.endpoint(&wp)?;
                let em = self.endpoint(&wm)?;
                for i in 0..n {
                    jac[(i, j)] = (ep[i] - em[i]) / (2.0 * h);
                }
            }
            let step = linalg::solve(&jac, &r).ok()?;
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> = w.iter().zip(&step).map(|(a, b)| a - lambda * b).collect();
                if let Some(e) = self.endpoint(&trial) {
                    let (tr, trn, teu) = Self::miss(&e, target);
                    if trn < rn || teu <= tol {
                        *w = trial;
                        r = tr;
                        rn = trn;
                        euclid = teu;
                        break;
                    }
                }
                lambda *= 0.5;
                if lambda < 1.0 / 64.0 {
                    return None;
                }
            }
        }
    }
}

/// Initial velocity of the geodesic from `p` to `q` (the logarithm map),
/// by damped Newton shooting with a finite-difference Jacobian.
///
/// The unknown is the log-velocity `ẋ/x`; the start guess is the chord
/// `ln q − ln p`. If Newton stagnates, the solve is continued through
/// intermediate targets on the log-space chord.
pub fn log_map_with<F: MetricFunction + ?Sized>(
    mf: &F,
    p: &Point,
    q: &Point,
    opts: &ShootingOptions,
) -> Result<ShootingResult> {
    if p.dim() != q.dim() {
        return Err(Error::Usage("points have different dimensions"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Usage("shooting tolerance must be positive"));
    }
    if p == q {
        return Ok(ShootingResult {
            initial_velocity: Tangent::zero(p.clone()),
            iterations: 0,
            residual: 0.0,
        });
    }
    let s0 = p.log_coords();
    let target = q.log_coords();
    let chord: Vec<f64> = target.iter().zip(&s0).map(|(a, b)| a - b).collect();
    let mut shooter = Shooter {
        mf,
        s0: s0.clone(),
        iterations: 0,
        trace: Vec::new(),
        best: f64::INFINITY,
    };
    let finish = |w: &[f64], iterations, residual| {
        let v = p.coords().iter().zip(w).map(|(x, wi)| x * wi).collect();
        Ok(ShootingResult {
            initial_velocity: Tangent::new(p.clone(), v)?,
            iterations,
            residual,
        })
    };

    let mut w = match &opts.initial_velocity {
        Some(v) if v.len() == p.dim() => log_velocity(p, v),
        Some(_) => return Err(Error::Usage("warm-start velocity has the wrong dimension")),
        None => chord.clone(),
    };
    if let Some(res) = shooter.newton(&target, &mut w, opts.tol, opts.max_iterations) {
        let it = shooter.iterations;
        return finish(&w, it, res);
    }

    for pieces in [8usize, 32] {
        let mut w = vec![0.0; p.dim()];
        let mut ok = true;
        for k in 1..=pieces {
            let tau = k as f64 / pieces as f64;
            let sub: Vec<f64> = s0.iter().zip(&chord).map(|(s, c)| s + tau * c).collect();
            if k == 1 {
                w = chord.iter().map(|c| c * tau).collect();
            } else {
                let scale = k as f64 / (k - 1) as f64;
                w.iter_mut().for_each(|x| *x *= scale);
            }
            let remaining = opts.max_iterations.saturating_sub(shooter.iterations);
            let tol = if k == pieces { opts.tol } else { opts.tol.max(1e-6) };
            if shooter.newton(&sub, &mut w, tol, remaining).is_none() {
                ok = false;
                break;
            }
        }
        if ok {
            let res = *shooter.trace.last().expect("newton records its residual");
            let it = shooter.iterations;
            return finish(&w, it, res);
        }
    }
    Err(Error::NoConvergence {
        what: "logarithm map",
        iterations: shooter.iterations,
        residual: shooter.best,
        trace: shooter.trace,
    })
}

/// [`log_map_with`] with default options and tolerance `tol`.
pub fn log_map<F: MetricFunction + ?Sized>(mf: &F, p: &Point, q: &Point, tol: f64) -> Result<ShootingResult> {
    log_map_with(
        mf,
        p,
        q,
        &ShootingOptions {
            tol,
            ..ShootingOptions::default()
        },
    )
}

/// Geodesic distance `‖log_p(q)‖_p`.
pub fn distance<F: MetricFunction + ?Sized>(mf: &F, p: &Point, q: &Point) -> Result<f64> {
    let v = log_map(mf, p, q, ShootingOptions::default().tol)?.initial_velocity;
    Ok(sqrt(energy(mf, p.coords(), v.components()).max(0.0)))
}

/// Coefficients of the two-dimensional geodesic equation
/// `a ẍ + b ẋ² + c ẋẏ + d ẏ² = 0` (and the same with `x ↔ y`), where
/// `a = 2[f(x+y) − f(x) − f(y)]`, `b = f(y)h(x) + f(x)h(x+y) − f(x+y)h(x)`,
/// `c = 2f(x)h(x+y)`, `d = f(x)(h(x+y) − h(y))` and `h = f′/f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients2d {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub fn geodesic_2d_coefficients<F: MetricFunction + ?Sized>(mf: &F, x: f64, y: f64) -> Result<Coefficients2d> {
    for v in [x, y] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain {
                what: "coordinates must be positive",
                value: v,
            });
        }
    }
    let (fx, dfx) = mf.value_deriv(x);
    let (fy, dfy) = mf.value_deriv(y);
    let (ft, dft) = mf.value_deriv(x + y);
    let (hx, hy, ht) = (dfx / fx, dfy / fy, dft / ft);
    Ok(Coefficients2d {
        a: 2.0 * (ft - fx - fy),
        b: fy * hx + fx * ht - ft * hx,
        c: 2.0 * fx * ht,
        d: fx * (ht - hy),
    })
}

/// `(ẍ, ÿ)` assembled from [`geodesic_2d_coefficients`].
pub fn acceleration_2d<F: MetricFunction + ?Sized>(
    mf: &F,
    (x, y): (f64, f64),
    (xd, yd): (f64, f64),
) -> Result<(f64, f64)> {
    let cx = geodesic_2d_coefficients(mf, x, y)?;
    let cy = geodesic_2d_coefficients(mf, y, x)?;
    Ok((
        -(cx.b * xd * xd + cx.c * xd * yd + cx.d * yd * yd) / cx.a,
        -(cy.b * yd * yd + cy.c * xd * yd + cy.d * xd * xd) / cy.a,
    ))
}

/// `q(x) = 1/f(x) − 2/f(2x)`, the metric restricted to the diagonal.
pub fn diagonal_q<F: MetricFunction + ?Sized>(mf: &F, x: f64) -> f64 {
    1.0 / mf.value(x) - 2.0 / mf.value(2.0 * x)
}

/// Geodesic through `(x₀, x₀)` with velocity `(ẋ₀, ẋ₀)` in two dimensions.
///
/// It stays on the diagonal and satisfies `√q(x) ẋ = C`; `x(t)` is found by
/// inverting `∫_{x₀}^{x} √q = C t` with quadrature in `ln x` and bracketed
/// Newton iteration.
pub fn diagonal_geodesic<F: MetricFunction + ?Sized>(
    mf: &F,
    x0: f64,
    xdot0: f64,
    t_end: f64,
    samples: usize,
) -> Result<GeodesicPath> {
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::Domain {
            what: "diagonal start must be positive",
            value: x0,
        });
    }
    if !xdot0.is_finite() || !t_end.is_finite() {
        return Err(Error::Domain {
            what: "velocity and time must be finite",
            value: if xdot0.is_finite() { t_end } else { xdot0 },
        });
    }
    if samples < 2 {
        return Err(Error::Usage("a geodesic path needs at least two samples"));
    }
    let c = xdot0 * sqrt(diagonal_q(mf, x0));
    // dG/du for G(u) = ∫ √q(eʳ) eʳ dr.
    let dg = |u: f64| {
        let x = exp(u);
        sqrt(diagonal_q(mf, x)) * x
    };
    let seg = |a: f64, b: f64| quad::integrate(dg, a, b, 1e-15, 1e-13).0;

    let mut times = Vec::with_capacity(samples);
    let mut points = Vec::with_capacity(samples);
    let mut velocities = Vec::with_capacity(samples);
    let (mut u_prev, mut g_prev) = (log(x0), 0.0);
    for i in 0..samples {
        let t = t_end * i as f64 / (samples - 1) as f64;
        let target = c * t;
        let u = if i == 0 || c == 0.0 {
            log(x0)
        } else {
            let (u, g) = invert_monotone(&seg, &dg, u_prev, g_prev, target);
            u_prev = u;
            g_prev = g;
            u
        };
        let x = exp(u);
        let xd = c / sqrt(diagonal_q(mf, x));
        let p = Point::new(vec![x, x])?;
        times.push(t);
        velocities.push(Tangent::new(p.clone(), vec![xd, xd])?);
        points.push(p);
    }
    Ok(GeodesicPath {
        times,
        points,
        velocities,
        energy: 2.0 * c * c,
    })
}

/// Solves `G(u) = target` for increasing `G`, given `G(u0) = g0`.
/// Returns `(u, G(u))`.
fn invert_monotone(
    seg: &impl Fn(f64, f64) -> f64,
    dg: &impl Fn(f64) -> f64,
    u0: f64,
    g0: f64,
    target: f64,
) -> (f64, f64) {
    if target == g0 {
        return (u0, g0);
    }
    // Bracket [lo, hi] with known values.
    let dir = if target > g0 { 1.0 } else { -1.0 };
    let (mut a, mut ga) = (u0, g0);
    let mut step = 0.5;
    let (mut b, mut gb);
    loop {
        b = a + dir * step;
        gb = ga + seg(a, b);
        if (gb - target) * dir >= 0.0 {
            break;
        }
        a = b;
        ga = gb;
        step *= 2.0;
    }
    let (mut lo, mut glo, mut hi, mut ghi) = if dir > 0.0 { (a, ga, b, gb) } else { (b, gb, a, ga) };
    let mut u = lo + (hi - lo) * (target - glo) / (ghi - glo);
    let mut gu = glo + seg(lo, u);
    for _ in 0..100 {
        let r = gu - target;
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            hi = u;
            ghi = gu;
        } else {
            lo = u;
            glo = gu;
        }
        let mut next = u - r / dg(u);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-15 * u.abs().max(1.0) {
            break;
        }
        // Quadrature from the nearer bracket end.
        let (base, gbase) = if (next - lo).abs() < (hi - next).abs() {
            (lo, glo)
        } else {
            (hi, ghi)
        };
        u = next;
        gu = gbase + seg(base, u);
    }
    (u, gu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{RationalApprox, TrigammaReciprocal};

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn zero_velocity_is_constant() {
        let p = pt(&[1.5, 0.7]);
        let path = geodesic_ivp(&TrigammaReciprocal, &p, &Tangent::zero(p.clone()), 3.0, 5).unwrap();
        assert_eq!(path.energy, 0.0);
        assert!(path.points.iter().all(|q| q == &p));
    }

    #[test]
    fn base_mismatch_is_usage_error() {
        let p = pt(&[1.0, 1.0]);
        let v = Tangent::zero(pt(&[2.0, 1.0]));
        assert!(matches!(exp_map(&RationalApprox, &p, &v), Err(Error::Usage(_))));
    }

    #[test]
    fn coincident_points() {
        let p = pt(&[2.0, 3.0, 0.5]);
        let r = log_map(&TrigammaReciprocal, &p, &p, 1e-8).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.initial_velocity.components().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn log_inverts_exp() {
        let mf = TrigammaReciprocal;
        let p = pt(&[2.0, 5.0]);
        let q = pt(&[2.0, 2.0]);
        let r = log_map(&mf, &p, &q, 1e-9).unwrap();
        assert!(r.residual <= 1e-9);
        let back = exp_map(&mf, &p, &r.initial_velocity).unwrap();
        for (a, b) in back.coords().iter().zip(q.coords()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn coefficients_reject_bad_input() {
        assert!(geodesic_2d_coefficients(&RationalApprox, 0.0, 1.0).is_err());
        let c = geodesic_2d_coefficients(&RationalApprox, 0.3, 4.0).unwrap();
        assert!(c.a > 0.0);
    }

    #[test]
    fn diagonal_path_is_monotone() {
        let path = diagonal_geodesic(&TrigammaReciprocal, 1.0, -0.5, 4.0, 9).unwrap();
        let xs: Vec<f64> = path.points.iter().map(|p| p.coords()[0]).collect();
        assert!(xs.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(xs[0], 1.0);
    }
}
