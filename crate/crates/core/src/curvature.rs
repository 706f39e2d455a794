//! Sectional curvature of `M`.
//!
//! The general formula goes through the Gauss equation of the embedding:
//! with `Σ` the second fundamental form in the `eᵢ` basis and `G` the Gram
//! matrix of that basis,
//!
//! ```text
//! K(U, V) = −(Σ(U,U)Σ(V,V) − Σ(U,V)²) / (G(U,U)G(V,V) − G(U,V)²)
//! ```
//!
//! The leading minus sign is `⟨n̂, n̂⟩ = −1` for the timelike unit normal.
//!
//! Principal curvatures are reported as the spectrum of `k(D − cVVᵀ)`, which
//! is `−2Σ` and therefore non-negative. The Gauss equation is quadratic in
//! `Σ`, so curvature values do not depend on this sign convention.

use alloc::vec::Vec;

use crate::embedding::{basis_coordinates, basis_gram, shape_operator};
use crate::geometry::{LocalJets, Point, Tangent};
use crate::linalg;
use crate::specfun::{polygamma_all, Family, MetricFunction};
use crate::{Error, Result};

/// Planes whose relative Gram determinant is at most this are degenerate.
pub const DEGENERATE_PLANE_TOL: f64 = 1e-12;

/// Sectional curvature of the plane spanned by `u` and `v` at `p`.
pub fn sectional<F: MetricFunction + ?Sized>(mf: &F, p: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
    if u.base() != p || v.base() != p {
        return Err(Error::Usage("tangent vectors are not based at the point"));
    }
    let a = basis_coordinates(mf, u);
    let b = basis_coordinates(mf, v);
    let gram = basis_gram(mf, p);
    let (guu, gvv, guv) = (gram.quad_form(&a, &a), gram.quad_form(&b, &b), gram.quad_form(&a, &b));
    let det = guu * gvv - guv * guv;
    if !(det > DEGENERATE_PLANE_TOL * guu * gvv) {
        return Err(Error::Usage("tangent vectors do not span a plane"));
    }
    let sigma = shape_operator(mf, p).matrix;
    let (suu, svv, suv) = (
        sigma.quad_form(&a, &a),
        sigma.quad_form(&b, &b),
        sigma.quad_form(&a, &b),
    );
    Ok(-(suu * svv - suv * suv) / det)
}

/// Curvature of the coordinate plane `(i, j)` (zero-based indices):
///
/// ```text
/// K = (fᵢf′ⱼf′ₜ + f′ᵢfⱼf′ₜ − f′ᵢf′ⱼfₜ) / (4 (fₜ − Σf_ℓ)(fₜ − fᵢ − fⱼ))
/// ```
pub fn sectional_axes<F: MetricFunction + ?Sized>(mf: &F, p: &Point, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::Usage("axis plane needs two distinct indices"));
    }
    if i >= p.dim() || j >= p.dim() {
        return Err(Error::Usage("axis index out of range"));
    }
    let jets = LocalJets::new(mf, p.coords());
    let (fi, fj, di, dj) = (jets.f[i], jets.f[j], jets.df[i], jets.df[j]);
    let num = fi * dj * jets.dft + di * fj * jets.dft - di * dj * jets.ft;
    Ok(num / (4.0 * jets.gap * (jets.ft - fi - fj)))
}

/// Gaussian curvature in two dimensions:
/// `K = −¼ (fₜf′ₓf′ᵧ − fₓf′ₜf′ᵧ − fᵧf′ₜf′ₓ) / (fₜ − fₓ − fᵧ)²`, `t = x + y`.
pub fn gaussian_2d<F: MetricFunction + ?Sized>(mf: &F, x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain {
                what: "coordinates must be positive",
                value: v,
            });
        }
    }
    let (fx, dx) = mf.value_deriv(x);
    let (fy, dy) = mf.value_deriv(y);
    let (ft, dt) = mf.value_deriv(x + y);
    let gap = ft - fx - fy;
    Ok(-0.25 * (ft * dx * dy - fx * dt * dy - fy * dt * dx) / (gap * gap))
}

/// Limits of the two-dimensional curvature of the Fisher-Rao metric at
/// fixed `x` as the other coordinate goes to 0 and to ∞:
///
/// ```text
/// y → 0:  ¾ − ψ′(x)ψ‴(x) / (2ψ″(x)²)
/// y → ∞:  (xψ″(x) + ψ′(x)) / (4(xψ′(x) − 1)²)
/// ```
///
/// Only defined for the trigamma family.
pub fn asymptotic_limits<F: MetricFunction + ?Sized>(mf: &F, x: f64) -> Result<(f64, f64)> {
    if mf.family() != Some(Family::Trigamma) {
        return Err(Error::Usage("asymptotic limits are only known for the trigamma family"));
    }
    let [_, p1, p2, p3] = polygamma_all(x)?;
    let at_zero = 0.75 - p1 * p3 / (2.0 * p2 * p2);
    let m = x * p1 - 1.0;
    let at_infinity = (x * p2 + p1) / (4.0 * m * m);
    Ok((at_zero, at_infinity))
}

/// Eigenvalues of `k(D − cVVᵀ)`, ascending.
pub fn principal_curvatures<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> Vec<f64> {
    let so = shape_operator(mf, p);
    let mut m = so.reduced();
    for i in 0..p.dim() {
        for j in 0..p.dim() {
            m[(i, j)] *= so.k;
        }
    }
    linalg::symmetric_eigenvalues(&m)
}

/// `K₃(x, y, z) − K₂(x, y)`: the curvature of the `(x, y)` coordinate plane
/// in three dimensions minus the two-dimensional curvature.
pub fn axis_difference<F: MetricFunction + ?Sized>(mf: &F, x: f64, y: f64, z: f64) -> Result<f64> {
    let p = Point::new(alloc::vec![x, y, z])?;
    Ok(sectional_axes(mf, &p, 0, 1)? - gaussian_2d(mf, x, y)?)
}

/// Values on a rectangular grid, `values[i][j]` at `(xs[i], ys[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Grid {
    pub fn tabulate(xs: &[f64], ys: &[f64], mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<Grid> {
        let values = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| f(x, y)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Grid {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            values,
        })
    }

    pub fn min(&self) -> (f64, f64, f64) {
        self.extreme(|a, b| a < b)
    }

    pub fn max(&self) -> (f64, f64, f64) {
        self.extreme(|a, b| a > b)
    }

    fn extreme(&self, better: impl Fn(f64, f64) -> bool) -> (f64, f64, f64) {
        let mut best = (f64::NAN, f64::NAN, f64::NAN);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if best.2.is_nan() || better(v, best.2) {
                    best = (self.xs[i], self.ys[j], v);
                }
            }
        }
        best
    }

    pub fn count(&self, pred: impl Fn(f64) -> bool) -> usize {
        self.values.iter().flatten().filter(|&&v| pred(v)).count()
    }
}

/// Findings of a curvature scan. The lower bound and the monotonicity are
/// conjectures, so violations are reported rather than treated as errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureReport {
    /// Grid points where `K ≥ 0`.
    pub non_negative: usize,
    pub min: f64,
    pub argmin: (f64, f64),
    /// Grid points where `K < LOWER_BOUND − LOWER_BOUND_SLACK`.
    pub below_lower_bound: usize,
    /// Grid neighbours where `K` increases with `x` (resp. `y`).
    pub increasing_in_x: usize,
    pub increasing_in_y: usize,
}

pub const LOWER_BOUND: f64 = -0.5;
pub const LOWER_BOUND_SLACK: f64 = 1e-3;

/// Tolerance on increases before a neighbour pair counts against
/// monotone decrease.
const MONOTONE_SLACK: f64 = 1e-12;

pub fn conjecture_report(grid: &Grid) -> ConjectureReport {
    let (x, y, min) = grid.min();
    let mut inc_x = 0;
    let mut inc_y = 0;
    let v = &grid.values;
    for i in 0..v.len() {
        for j in 0..v[i].len() {
            let slack = MONOTONE_SLACK * v[i][j].abs().max(1.0);
            if i + 1 < v.len() && v[i + 1][j] > v[i][j] + slack {
                inc_x += 1;
            }
            if j + 1 < v[i].len() && v[i][j + 1] > v[i][j] + slack {
                inc_y += 1;
            }
        }
    }
    ConjectureReport {
        non_negative: grid.count(|k| !(k < 0.0)),
        min,
        argmin: (x, y),
        below_lower_bound: grid.count(|k| k < LOWER_BOUND - LOWER_BOUND_SLACK),
        increasing_in_x: inc_x,
        increasing_in_y: inc_y,
    }
}
