//! Independent oracles shared by the integration tests. None of these call
//! the closed forms they are compared against.
#![allow(dead_code)]

use fisher_dirichlet::geometry::{christoffel, metric};
use fisher_dirichlet::{MetricFunction, Point, Tangent};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Point {
    Point::new((0..n).map(|_| log_uniform(rng, lo, hi)).collect()).unwrap()
}

pub fn random_tangent(rng: &mut ChaCha8Rng, p: &Point) -> Tangent {
    let c = p.coords().iter().map(|x| x * rng.gen_range(-1.0..1.0)).collect();
    Tangent::new(p.clone(), c).unwrap()
}

/// Points of dimension in `dims` with coordinates log-uniform in `[lo, hi]`.
pub fn points(dims: core::ops::RangeInclusive<usize>, lo: f64, hi: f64) -> impl Strategy<Value = Point> {
    dims.prop_flat_map(move |n| prop::collection::vec(lo.ln()..hi.ln(), n))
        .prop_map(|s| Point::from_log_coords(&s).unwrap())
}

/// A point together with a tangent vector whose components are `xᵢ·U(−1, 1)`.
pub fn points_with_tangent(
    dims: core::ops::RangeInclusive<usize>,
    lo: f64,
    hi: f64,
) -> impl Strategy<Value = (Point, Vec<f64>)> {
    points(dims, lo, hi)
        .prop_flat_map(|p| {
            let n = p.dim();
            (Just(p), prop::collection::vec(-1.0f64..1.0, n))
        })
        .prop_map(|(p, u)| {
            let v = p.coords().iter().zip(&u).map(|(x, u)| x * u).collect();
            (p, v)
        })
}

/// Metric as an nalgebra matrix, through the public `metric`.
pub fn metric_matrix<F: MetricFunction>(mf: &F, x: &[f64]) -> DMatrix<f64> {
    let g = metric(mf, &Point::new(x.to_vec()).unwrap());
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| g.get(i, j))
}

/// Fourth-order central difference of `∂g/∂x_l`.
fn metric_derivative<F: MetricFunction>(mf: &F, x: &[f64], l: usize) -> DMatrix<f64> {
    let h = 1e-3 * x[l];
    let at = |d: f64| {
        let mut y = x.to_vec();
        y[l] += d;
        metric_matrix(mf, &y)
    };
    (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h)
}

/// `Γᵏᵢⱼ = ½ gᵏˡ(∂ᵢgⱼₗ + ∂ⱼgᵢₗ − ∂ₗgᵢⱼ)` with numerical derivatives and an
/// LU inverse; indexed `[k][i][j]`.
pub fn fd_christoffel<F: MetricFunction>(mf: &F, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = x.len();
    let ginv = metric_matrix(mf, x).lu().try_inverse().expect("metric is invertible");
    let dg: Vec<DMatrix<f64>> = (0..n).map(|l| metric_derivative(mf, x, l)).collect();
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }
    gamma
}

/// Sectional curvature from the intrinsic Riemann tensor
/// `Rˡₖᵢⱼ = ∂ᵢΓˡⱼₖ − ∂ⱼΓˡᵢₖ + ΓˡᵢₘΓᵐⱼₖ − ΓˡⱼₘΓᵐᵢₖ`, with Christoffel
/// derivatives by central differences of step `h·xᵢ`.
pub fn intrinsic_sectional<F: MetricFunction>(mf: &F, x: &[f64], u: &[f64], v: &[f64], h: f64) -> f64 {
    let n = x.len();
    let gam = |y: &[f64]| christoffel(mf, &Point::new(y.to_vec()).unwrap());
    let g0 = gam(x);
    let dgam: Vec<_> = (0..n)
        .map(|i| {
            let step = h * x[i];
            let mut yp = x.to_vec();
            let mut ym = x.to_vec();
            yp[i] += step;
            ym[i] -= step;
            let (gp, gm) = (gam(&yp), gam(&ym));
            move |l: usize, a: usize, b: usize| (gp.get(l, a, b) - gm.get(l, a, b)) / (2.0 * step)
        })
        .collect();
    // (R(u,v)v)ˡ = Rˡₖᵢⱼ vᵏ uⁱ vʲ
    let mut r = vec![0.0; n];
    for l in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut rl = dgam[i](l, j, k) - dgam[j](l, i, k);
                    for m in 0..n {
                        rl += g0.get(l, i, m) * g0.get(m, j, k) - g0.get(l, j, m) * g0.get(m, i, k);
                    }
                    s += rl * v[k] * u[i] * v[j];
                }
            }
        }
        r[l] = s;
    }
    let g = metric_matrix(mf, x);
    let (u, v, r) = (
        DVector::from_column_slice(u),
        DVector::from_column_slice(v),
        DVector::from_column_slice(&r),
    );
    let guu = u.dot(&(&g * &u));
    let gvv = v.dot(&(&g * &v));
    let guv = u.dot(&(&g * &v));
    u.dot(&(&g * &r)) / (guu * gvv - guv * guv)
}

/// `ψ′(x)` by direct summation with an Euler-Maclaurin tail.
pub fn trigamma_oracle(x: f64) -> f64 {
    const N: usize = 40;
    let mut s = 0.0;
    for k in 0..N {
        let y = x + k as f64;
        s += 1.0 / (y * y);
    }
    let z = x + N as f64;
    let z2 = z * z;
    s + 1.0 / z + 1.0 / (2.0 * z2) + 1.0 / (6.0 * z2 * z) - 1.0 / (30.0 * z2 * z2 * z) + 1.0 / (42.0 * z2 * z2 * z2 * z)
        - 1.0 / (30.0 * z2 * z2 * z2 * z2 * z)
}

/// Smallest eigenvalue of a symmetric matrix by nalgebra.
pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
