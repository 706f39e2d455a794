//! Isometric embedding of `M` as a spacelike hypersurface of Minkowski
//! space `L^{n+1}` with signature `(+, …, +, −)`.
//!
//! The embedding is `Φ(x) = (η(x₁), …, η(xₙ), η(x₁ + … + xₙ))` with
//! `η(x) = ∫₁ˣ dr/√f(r)`. `η` maps `(0, ∞)` onto `ℝ` and its inverse is
//! written `ξ`. In the coordinates `yᵢ = η(xᵢ)` the hypersurface is the graph
//! `y_{n+1} = η(ξ(y₁) + … + ξ(yₙ))`.
//!
//! [`Embedding`] owns a table of `η` at checkpoints `s = ln x` spaced by
//! [`CHECKPOINT_STEP`]; evaluations integrate from the nearest checkpoint.
//! The table is built once in [`Embedding::new`] and is read-only afterward.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use crate::geometry::{metric, LocalJets, Point, Tangent};
use crate::linalg::{self, Matrix};
use crate::quad;
use crate::specfun::MetricFunction;
use crate::{Error, Result};

/// Spacing of the `η` checkpoints in `ln x`.
pub const CHECKPOINT_STEP: f64 = 0.5;
/// Checkpoints cover `ln x ∈ [−CHECKPOINT_SPAN, CHECKPOINT_SPAN]`.
pub const CHECKPOINT_SPAN: f64 = 46.0;
/// Largest tolerated violation of the graph relation in [`Embedding::unembed`].
pub const GRAPH_TOL: f64 = 1e-6;

const QUAD_ABS_TOL: f64 = 1e-15;
const QUAD_REL_TOL: f64 = 1e-14;

/// A vector of `L^{n+1}`; the last component is the timelike one.
#[derive(Clone, Debug, PartialEq)]
pub struct MinkowskiVector(pub Vec<f64>);

impl MinkowskiVector {
    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// `⟨u, v⟩ = Σᵢ≤ₙ uᵢvᵢ − u_{n+1}v_{n+1}`.
    pub fn inner(&self, other: &MinkowskiVector) -> f64 {
        minkowski_inner(&self.0, &other.0)
    }
}

pub fn minkowski_inner(u: &[f64], v: &[f64]) -> f64 {
    let last = u.len() - 1;
    linalg::dot(&u[..last], &v[..last]) - u[last] * v[last]
}

/// The image `Φ(x)` of a point, `(y₁, …, y_{n+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedPoint {
    pub y: Vec<f64>,
}

/// `η`/`ξ` for one metric function, with the checkpoint table.
#[derive(Clone, Debug)]
pub struct Embedding<F> {
    mf: F,
    s_min: f64,
    table: Vec<f64>,
}

impl<F: MetricFunction> Embedding<F> {
    pub fn new(mf: F) -> Self {
        let nodes = (2.0 * CHECKPOINT_SPAN / CHECKPOINT_STEP) as usize + 1;
        let mid = nodes / 2;
        let s_min = -(mid as f64) * CHECKPOINT_STEP;
        let mut emb = Embedding {
            mf,
            s_min,
            table: alloc::vec![0.0; nodes],
        };
        for k in mid + 1..nodes {
            let seg = emb.integral(emb.node(k - 1), emb.node(k));
            emb.table[k] = emb.table[k - 1] + seg;
        }
        for k in (0..mid).rev() {
            let seg = emb.integral(emb.node(k + 1), emb.node(k));
            emb.table[k] = emb.table[k + 1] + seg;
        }
        emb
    }

    pub fn metric_function(&self) -> &F {
        &self.mf
    }

    fn node(&self, k: usize) -> f64 {
        self.s_min + k as f64 * CHECKPOINT_STEP
    }

    /// `dη/ds` with `s = ln r`, i.e. `r/√f(r)`.
    fn log_integrand(&self, s: f64) -> f64 {
        let r = exp(s);
        r / sqrt(self.mf.value(r))
    }

    fn integral(&self, from: f64, to: f64) -> f64 {
        quad::integrate(|s| self.log_integrand(s), from, to, QUAD_ABS_TOL, QUAD_REL_TOL).0
    }

    fn eta_log(&self, s: f64) -> f64 {
        let last = self.table.len() - 1;
        let pos = (s - self.s_min) / CHECKPOINT_STEP;
        let k = if pos <= 0.0 {
            0
        } else if pos >= last as f64 {
            last
        } else {
            libm::round(pos) as usize
        };
        let node = self.node(k);
        if node == s {
            return self.table[k];
        }
        self.table[k] + self.integral(node, s)
    }

    /// `η(x) = ∫₁ˣ dr/√f(r)`.
    pub fn eta(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain {
                what: "eta argument must be positive",
                value: x,
            });
        }
        Ok(self.eta_log(log(x)))
    }

    /// `ξ = η⁻¹`, by bracketed Newton iteration in `ln x` using
    /// `ξ′(y) = √f(ξ(y))`.
    pub fn xi(&self, y: f64) -> f64 {
        let last = self.table.len() - 1;
        let (mut lo, mut hi);
        if y < self.table[0] {
            hi = self.node(0);
            let mut step = CHECKPOINT_STEP;
            lo = hi - step;
            while self.eta_log(lo) > y {
                hi = lo;
                step *= 2.0;
                lo -= step;
            }
        } else if y > self.table[last] {
            lo = self.node(last);
            let mut step = CHECKPOINT_STEP;
            hi = lo + step;
            while self.eta_log(hi) < y {
                lo = hi;
                step *= 2.0;
                hi += step;
            }
        } else {
            let k = self.table.partition_point(|&e| e <= y).min(last);
            if self.table[k - 1] == y {
                return exp(self.node(k - 1));
            }
            lo = self.node(k - 1);
            hi = self.node(k);
        }

        let (elo, ehi) = (self.eta_log(lo), self.eta_log(hi));
        let mut s = if ehi > elo {
            lo + (hi - lo) * (y - elo) / (ehi - elo)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..100 {
            let resid = self.eta_log(s) - y;
            if resid == 0.0 {
                break;
            }
            if resid > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let mut next = s - resid / self.log_integrand(s);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - s).abs() <= 1e-15 * s.abs().max(1.0);
            s = next;
            if done || hi - lo <= 1e-15 * s.abs().max(1.0) {
                break;
            }
        }
        exp(s)
    }

    /// `Φ(p)`.
    pub fn embed(&self, p: &Point) -> EmbeddedPoint {
        let mut y: Vec<f64> = p.log_coords().into_iter().map(|s| self.eta_log(s)).collect();
        y.push(self.eta_log(log(p.total())));
        EmbeddedPoint { y }
    }

    /// `y_{n+1} − η(ξ(y₁) + … + ξ(yₙ))`.
    pub fn graph_residual(&self, e: &EmbeddedPoint) -> Result<f64> {
        if e.y.len() < 3 {
            return Err(Error::Usage("embedded point needs at least three coordinates"));
        }
        let n = e.y.len() - 1;
        let t: f64 = e.y[..n].iter().map(|&yi| self.xi(yi)).sum();
        Ok(e.y[n] - self.eta_log(log(t)))
    }

    /// `Φ⁻¹(e)`; fails when the graph relation is violated by more than
    /// [`GRAPH_TOL`].
    pub fn unembed(&self, e: &EmbeddedPoint) -> Result<Point> {
        let residual = self.graph_residual(e)?;
        if !(residual.abs() <= GRAPH_TOL) {
            return Err(Error::Consistency { residual });
        }
        let n = e.y.len() - 1;
        Point::new(e.y[..n].iter().map(|&yi| self.xi(yi)).collect())
    }
}

/// `dΦ(u) = (u₁/√f(x₁), …, uₙ/√f(xₙ), Σuᵢ/√f(t))`.
pub fn pushforward<F: MetricFunction + ?Sized>(mf: &F, u: &Tangent) -> MinkowskiVector {
    let x = u.base().coords();
    let c = u.components();
    let mut out: Vec<f64> = x.iter().zip(c).map(|(&xi, &ui)| ui / sqrt(mf.value(xi))).collect();
    out.push(c.iter().sum::<f64>() / sqrt(mf.value(u.base().total())));
    MinkowskiVector(out)
}

/// `eᵢ = ∂/∂yᵢ + √(f(xᵢ)/f(t)) ∂/∂y_{n+1}`.
pub fn tangent_basis<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> Vec<MinkowskiVector> {
    let n = p.dim();
    let ft = mf.value(p.total());
    p.coords()
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut e = alloc::vec![0.0; n + 1];
            e[i] = 1.0;
            e[n] = sqrt(mf.value(xi) / ft);
            MinkowskiVector(e)
        })
        .collect()
}

/// Gram matrix `⟨eᵢ, eⱼ⟩ = δᵢⱼ − √(f(xᵢ)f(xⱼ))/f(t)`.
pub fn basis_gram<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> Matrix {
    let ft = mf.value(p.total());
    let w: Vec<f64> = p.coords().iter().map(|&x| sqrt(mf.value(x) / ft)).collect();
    Matrix::from_fn(p.dim(), |i, j| if i == j { 1.0 } else { 0.0 } - w[i] * w[j])
}

/// `eᵢ` as an intrinsic tangent vector: `√f(xᵢ) ∂/∂xᵢ`.
pub fn basis_vector<F: MetricFunction + ?Sized>(mf: &F, p: &Point, i: usize) -> Result<Tangent> {
    if i >= p.dim() {
        return Err(Error::Usage("basis index out of range"));
    }
    let mut c = alloc::vec![0.0; p.dim()];
    c[i] = sqrt(mf.value(p.coords()[i]));
    Tangent::new(p.clone(), c)
}

/// Components of an intrinsic tangent vector in the `eᵢ` basis.
pub fn basis_coordinates<F: MetricFunction + ?Sized>(mf: &F, u: &Tangent) -> Vec<f64> {
    u.base()
        .coords()
        .iter()
        .zip(u.components())
        .map(|(&x, &c)| c / sqrt(mf.value(x)))
        .collect()
}

/// Normal field `N = (√(f(x₁)/f(t)), …, √(f(xₙ)/f(t)), 1)`; timelike.
pub fn normal<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> MinkowskiVector {
    let ft = mf.value(p.total());
    let mut n: Vec<f64> = p.coords().iter().map(|&x| sqrt(mf.value(x) / ft)).collect();
    n.push(1.0);
    MinkowskiVector(n)
}

/// `N / √(−⟨N, N⟩)`.
pub fn unit_normal<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> MinkowskiVector {
    let n = normal(mf, p);
    let scale = 1.0 / sqrt(-n.inner(&n));
    MinkowskiVector(n.0.into_iter().map(|c| c * scale).collect())
}

/// Second fundamental form in the `eᵢ` basis,
/// `Σ = −½k(D − cVVᵀ)` with `dᵢ = f′(xᵢ)`, `vᵢ = √f(xᵢ)`,
/// `k = 1/√(f(t) − Σf(x_ℓ))`, `c = f′(t)/f(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeOperator {
    pub matrix: Matrix,
    pub d: Vec<f64>,
    pub v: Vec<f64>,
    pub k: f64,
    pub c: f64,
}

impl ShapeOperator {
    /// `D − cVVᵀ`.
    pub fn reduced(&self) -> Matrix {
        Matrix::from_fn(self.d.len(), |i, j| {
            let diag = if i == j { self.d[i] } else { 0.0 };
            diag - self.c * self.v[i] * self.v[j]
        })
    }

    /// `c·Vᵀ D⁻¹ V`; below one exactly when `−2Σ/k` is positive-definite.
    pub fn definiteness_margin(&self) -> f64 {
        self.c * self.v.iter().zip(&self.d).map(|(v, d)| v * v / d).sum::<f64>()
    }
}

pub fn shape_operator<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> ShapeOperator {
    let jets = LocalJets::new(mf, p.coords());
    let k = 1.0 / sqrt(jets.gap);
    let c = jets.dft / jets.ft;
    let v: Vec<f64> = jets.f.iter().map(|&f| sqrt(f)).collect();
    let d = jets.df.clone();
    let matrix = Matrix::from_fn(p.dim(), |i, j| {
        let diag = if i == j { d[i] } else { 0.0 };
        -0.5 * k * (diag - c * v[i] * v[j])
    });
    ShapeOperator { matrix, d, v, k, c }
}

/// Whether `A − cVVᵀ` is positive-definite, decided by `c·VᵀA⁻¹V < 1`.
///
/// `A` must be symmetric positive-definite and `c > 0`.
pub fn check_rank_one_update_positive(a: &Matrix, v: &[f64], c: f64) -> Result<bool> {
    if v.len() != a.dim() {
        return Err(Error::Usage("vector length does not match the matrix"));
    }
    if !(c > 0.0) {
        return Err(Error::Usage("rank-one coefficient must be positive"));
    }
    let scale = a.as_slice().iter().fold(0.0_f64, |s, x| s.max(x.abs()));
    if !a.is_symmetric(1e-12 * scale.max(1.0)) {
        return Err(Error::Usage("matrix is not symmetric"));
    }
    let l = linalg::cholesky(a)?;
    let w = linalg::cholesky_solve(&l, v);
    Ok(c * linalg::dot(v, &w) < 1.0)
}

/// Isometry defect at `(p, u)`: `|⟨dΦ u, dΦ u⟩ − g(u, u)|`.
pub fn isometry_defect<F: MetricFunction + ?Sized>(mf: &F, u: &Tangent) -> Result<f64> {
    let w = pushforward(mf, u);
    let g = metric(mf, u.base());
    Ok((w.inner(&w) - crate::geometry::inner(&g, u, u)?).abs())
}
