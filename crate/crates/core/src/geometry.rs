//! Intrinsic Riemannian data of the quadrant `M = (0, ∞)ⁿ`.
//!
//! With `t = x₁ + … + xₙ` the metric is `g_ij = δ_ij/f(xᵢ) − 1/f(t)`, a
//! diagonal matrix minus a rank-one term, so the inverse and the Christoffel
//! symbols have closed forms. `t` is always recomputed from the coordinates.
//!
//! Precision degrades when `min(xᵢ) < 1e−8`: the superadditivity gap
//! `f(t) − Σ f(xᵢ)` is then computed by cancellation. No clamping is done.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, lgamma, log, sqrt};

use crate::linalg::{self, Matrix};
use crate::specfun::MetricFunction;
use crate::{Error, Result};

/// A parameter vector `(x₁, …, xₙ)` with `n ≥ 2` and every `xᵢ > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Usage("a point needs at least two coordinates"));
        }
        if let Some(&bad) = coords.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain {
                what: "coordinates must be positive and finite",
                value: bad,
            });
        }
        Ok(Point(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `t = x₁ + … + xₙ`.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Logarithmic coordinates `(ln x₁, …, ln xₙ)`.
    pub fn log_coords(&self) -> Vec<f64> {
        self.0.iter().map(|&x| log(x)).collect()
    }

    pub fn from_log_coords(s: &[f64]) -> Result<Self> {
        Point::new(s.iter().map(|&v| exp(v)).collect())
    }

    /// Componentwise arithmetic mean of `points` (weighted when given).
    pub fn euclidean_mean(points: &[Point], weights: Option<&[f64]>) -> Result<Point> {
        let first = points.first().ok_or(Error::Usage("mean of an empty point set"))?;
        let n = first.dim();
        let mut acc = vec![0.0; n];
        let mut total = 0.0;
        for (i, p) in points.iter().enumerate() {
            if p.dim() != n {
                return Err(Error::Usage("points have different dimensions"));
            }
            let w = weights.map_or(1.0, |w| w[i]);
            total += w;
            for (a, &x) in acc.iter_mut().zip(p.coords()) {
                *a += w * x;
            }
        }
        Point::new(acc.into_iter().map(|a| a / total).collect())
    }
}

/// A tangent vector together with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    base: Point,
    components: Vec<f64>,
}

impl Tangent {
    pub fn new(base: Point, components: Vec<f64>) -> Result<Self> {
        if components.len() != base.dim() {
            return Err(Error::Usage("tangent dimension does not match its base point"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Usage("tangent components must be finite"));
        }
        Ok(Tangent { base, components })
    }

    pub fn zero(base: Point) -> Self {
        let n = base.dim();
        Tangent {
            base,
            components: vec![0.0; n],
        }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn into_components(self) -> Vec<f64> {
        self.components
    }

    pub fn scaled(&self, a: f64) -> Tangent {
        Tangent {
            base: self.base.clone(),
            components: self.components.iter().map(|c| a * c).collect(),
        }
    }

    /// `a·self + b·other`; both must share the base point.
    pub fn combine(&self, a: f64, other: &Tangent, b: f64) -> Result<Tangent> {
        if self.base != other.base {
            return Err(Error::Usage("tangent vectors have different base points"));
        }
        Ok(Tangent {
            base: self.base.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(u, v)| a * u + b * v)
                .collect(),
        })
    }
}

/// The metric tensor (or its inverse) evaluated at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricMatrix {
    base: Point,
    matrix: Matrix,
}

impl MetricMatrix {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }
}

/// Per-point evaluations of `f` shared by the closed-form formulas.
#[derive(Clone, Debug)]
pub(crate) struct LocalJets {
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub ft: f64,
    pub dft: f64,
    /// `f(t) − Σ f(xᵢ)`, positive by superadditivity.
    pub gap: f64,
}

impl LocalJets {
    pub fn new<F: MetricFunction + ?Sized>(mf: &F, x: &[f64]) -> Self {
        let (f, df): (Vec<f64>, Vec<f64>) = x.iter().map(|&xi| mf.value_deriv(xi)).unzip();
        let t: f64 = x.iter().sum();
        let (ft, dft) = mf.value_deriv(t);
        let gap = superadditive_gap(mf, x, &f, &df, t, ft, dft);
        LocalJets { f, df, ft, dft, gap }
    }
}

/// `g_ij = δ_ij/f(xᵢ) − 1/f(t)`.
pub fn metric<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> MetricMatrix {
    let x = p.coords();
    let f: Vec<f64> = x.iter().map(|&xi| mf.value(xi)).collect();
    let inv_ft = 1.0 / mf.value(p.total());
    let matrix = Matrix::from_fn(p.dim(), |i, j| {
        let diag = if i == j { 1.0 / f[i] } else { 0.0 };
        diag - inv_ft
    });
    MetricMatrix {
        base: p.clone(),
        matrix,
    }
}

/// Sherman-Morrison inverse:
/// `g⁻¹ = diag(f(xᵢ)) + [f(xᵢ)f(xⱼ)] / (f(t) − Σ f(x_ℓ))`.
pub fn metric_inverse<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> MetricMatrix {
    let jets = LocalJets::new(mf, p.coords());
    let f = &jets.f;
    let matrix = Matrix::from_fn(p.dim(), |i, j| {
        let diag = if i == j { f[i] } else { 0.0 };
        diag + f[i] * f[j] / jets.gap
    });
    MetricMatrix {
        base: p.clone(),
        matrix,
    }
}

/// Christoffel symbols of the second kind, `Γᵏᵢⱼ`, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γᵏᵢⱼ`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// `Σᵢⱼ Γᵏᵢⱼ uⁱ vʲ` for every k.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.get(k, i, j) * u[i] * v[j];
                    }
                }
                s
            })
            .collect()
    }
}

/// `Γᵏᵢⱼ = ½[ f(x_k)/(f(t)−Σf) · (h(t) − h(xⱼ)δᵢⱼ) − h(x_k)δᵢⱼδⱼₖ ]` with
/// `h = f′/f`.
pub fn christoffel<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> Christoffel {
    let n = p.dim();
    let jets = LocalJets::new(mf, p.coords());
    let h: Vec<f64> = jets.f.iter().zip(&jets.df).map(|(f, d)| d / f).collect();
    let ht = jets.dft / jets.ft;
    let mut data = vec![0.0; n * n * n];
    for k in 0..n {
        let a = jets.f[k] / jets.gap;
        for i in 0..n {
            for j in 0..n {
                let mut v = a * ht;
                if i == j {
                    v -= a * h[j];
                    if j == k {
                        v -= h[k];
                    }
                }
                data[(k * n + i) * n + j] = 0.5 * v;
            }
        }
    }
    Christoffel { n, data }
}

/// `f(t) − Σ f(xᵢ)`, from the direct difference when `f(t)` is small and
/// from `(n−1)/2 + r(t) − Σ r(xᵢ)` otherwise; each form has a rounding error
/// proportional to the size of its terms.
fn superadditive_gap<F: MetricFunction + ?Sized>(
    mf: &F,
    x: &[f64],
    f: &[f64],
    df: &[f64],
    t: f64,
    ft: f64,
    dft: f64,
) -> f64 {
    let n = x.len() as f64;
    if ft <= n {
        return ft - f.iter().sum::<f64>();
    }
    let r: f64 = (0..x.len()).map(|i| mf.remainder(x[i], f[i], df[i]).0).sum();
    0.5 * (n - 1.0) + mf.remainder(t, ft, dft).0 - r
}

/// `x f′(x)/f(x) − 1`, accurate when `x` is large.
fn log_slope_excess<F: MetricFunction + ?Sized>(mf: &F, x: f64, f: f64, d: f64) -> f64 {
    if f <= 1.0 {
        return x * d / f - 1.0;
    }
    let (r, dr) = mf.remainder(x, f, d);
    (0.5 + x * dr - r) / f
}

/// `x/f(x) − 1`, accurate when `x` is large.
fn reciprocal_excess<F: MetricFunction + ?Sized>(mf: &F, x: f64, f: f64, d: f64) -> f64 {
    if f <= 1.0 {
        return x / f - 1.0;
    }
    (0.5 - mf.remainder(x, f, d).0) / f
}

/// `(Σ xⱼwⱼ)²/t − Σ xⱼwⱼ² = −(1/t) Σᵢ<ⱼ xᵢxⱼ(wᵢ − wⱼ)²`, which is free of
/// cancellation.
fn spread(x: &[f64], w: &[f64], t: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = w[i] - w[j];
            s += x[i] * x[j] * d * d;
        }
    }
    -s / t
}

/// Geodesic acceleration `ẍᵏ = −Σᵢⱼ Γᵏᵢⱼ vⁱ vʲ`, using the structure of the
/// symbols.
pub fn geodesic_acceleration<F: MetricFunction + ?Sized>(mf: &F, x: &[f64], v: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| vi / xi).collect();
    let mut out = vec![0.0; x.len()];
    let mut scratch = vec![0.0; x.len()];
    relative_acceleration_into(mf, x, &w, &mut out, &mut scratch);
    for (o, xi) in out.iter_mut().zip(x) {
        *o *= xi;
    }
    out
}

/// `ẍₖ/xₖ` in terms of `wₖ = ẋₖ/xₖ`:
///
/// ```text
/// ẍₖ/xₖ = −½ (fₖ/xₖ) Q/gap + ½ φₖwₖ²,   φ = x f′/f,
/// Q = φₜ V²/t − Σ φⱼxⱼwⱼ²,              V = Σ xⱼwⱼ.
/// ```
///
/// `Q` is assembled from `spread` and the excesses `φ − 1` so that it keeps
/// full relative accuracy at large coordinates. `scratch` must have the same
/// length as `x`.
pub(crate) fn relative_acceleration_into<F: MetricFunction + ?Sized>(
    mf: &F,
    x: &[f64],
    w: &[f64],
    out: &mut [f64],
    scratch: &mut [f64],
) {
    let n = x.len();
    let t: f64 = x.iter().sum();
    let (ft, dft) = mf.value_deriv(t);
    let mut vsum = 0.0;
    let mut f_sum = 0.0;
    let mut r_sum = 0.0;
    let mut q = 0.0;
    for k in 0..n {
        let (f, d) = mf.value_deriv(x[k]);
        let excess = log_slope_excess(mf, x[k], f, d);
        vsum += x[k] * w[k];
        f_sum += f;
        r_sum += mf.remainder(x[k], f, d).0;
        q -= excess * x[k] * w[k] * w[k];
        out[k] = f / x[k];
        scratch[k] = excess + 1.0;
    }
    q += log_slope_excess(mf, t, ft, dft) * vsum * vsum / t + spread(x, w, t);
    let gap = if ft <= n as f64 {
        ft - f_sum
    } else {
        0.5 * (n as f64 - 1.0) + mf.remainder(t, ft, dft).0 - r_sum
    };
    for k in 0..n {
        out[k] = 0.5 * (scratch[k] * w[k] * w[k] - out[k] * q / gap);
    }
}

fn check_pair(g: &MetricMatrix, u: &Tangent, v: &Tangent) -> Result<()> {
    if u.base() != v.base() || u.base() != g.base() {
        return Err(Error::Usage("tangent vectors and metric have different base points"));
    }
    Ok(())
}

/// `g(u, v)`.
pub fn inner(g: &MetricMatrix, u: &Tangent, v: &Tangent) -> Result<f64> {
    check_pair(g, u, v)?;
    Ok(g.matrix.quad_form(u.components(), v.components()))
}

/// `√g(u, u)`.
pub fn norm(g: &MetricMatrix, u: &Tangent) -> Result<f64> {
    Ok(sqrt(inner(g, u, u)?.max(0.0)))
}

/// Quadratic form `g(v, v)` straight from coordinates, without building the
/// matrix. With `w = v/x` and `ρ = x/f − 1` it is evaluated as
/// `−spread + Σ xⱼwⱼ²ρⱼ − ρₜV²/t`, which is exact in the limit of large
/// coordinates where the textbook form cancels.
pub fn energy<F: MetricFunction + ?Sized>(mf: &F, x: &[f64], v: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| vi / xi).collect();
    log_energy(mf, x, &w)
}

/// `energy` in terms of `w = v/x`.
pub(crate) fn log_energy<F: MetricFunction + ?Sized>(mf: &F, x: &[f64], w: &[f64]) -> f64 {
    let t: f64 = x.iter().sum();
    let mut vsum = 0.0;
    let mut diag = 0.0;
    for (&xi, &wi) in x.iter().zip(w) {
        let (f, d) = mf.value_deriv(xi);
        vsum += xi * wi;
        diag += xi * wi * wi * reciprocal_excess(mf, xi, f, d);
    }
    let (ft, dft) = mf.value_deriv(t);
    diag - spread(x, w, t) - reciprocal_excess(mf, t, ft, dft) * vsum * vsum / t
}

/// Tolerance on `Σ qᵢ = 1` for simplex arguments.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Dirichlet density `Γ(Σxᵢ)/Πᵢ Γ(xᵢ) · Πᵢ qᵢ^{xᵢ−1}` at `q ∈ Δₙ`.
///
/// Evaluated in the log domain. A component `qᵢ = 0` with `xᵢ < 1` makes the
/// density unbounded and `f64::INFINITY` is returned.
pub fn dirichlet_pdf(p: &Point, q: &[f64]) -> Result<f64> {
    if q.len() != p.dim() {
        return Err(Error::Usage("simplex point has the wrong dimension"));
    }
    if let Some(&bad) = q.iter().find(|&&qi| !(qi >= 0.0) || !qi.is_finite()) {
        return Err(Error::Domain {
            what: "simplex components must be non-negative",
            value: bad,
        });
    }
    let sum: f64 = q.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Domain {
            what: "simplex components must sum to one",
            value: sum,
        });
    }
    let x = p.coords();
    let mut log_density = lgamma(p.total()) - x.iter().map(|&xi| lgamma(xi)).sum::<f64>();
    for (&xi, &qi) in x.iter().zip(q) {
        if qi == 0.0 {
            if xi < 1.0 {
                return Ok(f64::INFINITY);
            } else if xi > 1.0 {
                return Ok(0.0);
            }
        } else {
            log_density += (xi - 1.0) * log(qi);
        }
    }
    Ok(exp(log_density))
}

/// Beta density at `s ∈ [0, 1]`, i.e. the Dirichlet density at `(s, 1 − s)`.
pub fn beta_pdf(p: &Point, s: f64) -> Result<f64> {
    if p.dim() != 2 {
        return Err(Error::Usage("beta density needs a two-parameter point"));
    }
    dirichlet_pdf(p, &[s, 1.0 - s])
}

/// Smallest eigenvalue of the metric at `p`.
pub fn min_eigenvalue<F: MetricFunction + ?Sized>(mf: &F, p: &Point) -> f64 {
    linalg::symmetric_eigenvalues(metric(mf, p).matrix())[0]
}
