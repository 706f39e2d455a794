//! Polygamma functions and the metric-generating functions `f`.
//!
//! Every geometric quantity in this crate is a function of a single scalar
//! map `f: (0, ∞) → (0, ∞)` and its first two derivatives. A valid `f` is
//! convex with `f(0) = f′(0) = 0`, grows at most quadratically, and has
//! `f/f′` convex as well. [`verify_assumptions`] checks those conditions
//! numerically on a grid.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::log;

use crate::{Error, Result};

/// Arguments below this are shifted upward with the recurrence before the
/// asymptotic expansion is used.
pub const SHIFT_THRESHOLD: f64 = 10.0;

/// Number of Bernoulli terms kept in the asymptotic expansions.
pub const SERIES_TERMS: usize = 12;

/// B₂, B₄, …, B₂₄.
const BERNOULLI: [f64; SERIES_TERMS] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Evaluation scheme for one polygamma order: upward recurrence until the
/// argument reaches `shift_threshold`, then `series_terms` terms of the
/// Bernoulli asymptotic expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygammaTable {
    pub order: u32,
    pub shift_threshold: f64,
    pub series_terms: usize,
}

impl PolygammaTable {
    pub fn new(order: u32) -> Result<Self> {
        if order > 3 {
            return Err(Error::Usage("polygamma order must be 0, 1, 2 or 3"));
        }
        Ok(PolygammaTable {
            order,
            shift_threshold: SHIFT_THRESHOLD,
            series_terms: SERIES_TERMS,
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain {
                what: "polygamma argument must be positive and finite",
                value: x,
            });
        }
        let m = self.order;
        let mut shift = 0.0;
        let mut z = x;
        // (-1)^m m!
        let signed_fact = match m {
            0 => 1.0,
            1 => -1.0,
            2 => 2.0,
            _ => -6.0,
        };
        while z < self.shift_threshold {
            shift += signed_fact * powi_recip(z, m + 1);
            z += 1.0;
        }
        Ok(asymptotic(m, z, self.series_terms.min(SERIES_TERMS)) - shift)
    }
}

fn powi_recip(z: f64, k: u32) -> f64 {
    let r = 1.0 / z;
    let mut out = r;
    for _ in 1..k {
        out *= r;
    }
    out
}

/// Asymptotic expansion of ψ^(m)(z) for large z.
fn asymptotic(m: u32, z: f64, terms: usize) -> f64 {
    let u = 1.0 / z;
    let u2 = u * u;
    if m == 0 {
        // ln z − 1/(2z) − Σ B₂ₖ / (2k z^{2k})
        let mut s = 0.0;
        for k in (1..=terms).rev() {
            s = (s + BERNOULLI[k - 1] / (2 * k) as f64) * u2;
        }
        return log(z) - 0.5 * u - s;
    }
    // (−1)^{m+1} [ (m−1)!/z^m + m!/(2 z^{m+1}) + Σ B₂ₖ (2k+m−1)!/(2k)! / z^{2k+m} ]
    let mut s = 0.0;
    for k in (1..=terms).rev() {
        let mut c = BERNOULLI[k - 1];
        for j in 1..m {
            c *= (2 * k as u32 + j) as f64;
        }
        s = (s + c) * u2;
    }
    let (fact_m1, fact_m) = match m {
        1 => (1.0, 1.0),
        2 => (1.0, 2.0),
        _ => (2.0, 6.0),
    };
    let um = powi_recip(z, m);
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    sign * um * (fact_m1 + 0.5 * fact_m * u + s)
}

/// ψ^(order)(x) for order ∈ {0, 1, 2, 3}.
pub fn polygamma(order: u32, x: f64) -> Result<f64> {
    PolygammaTable::new(order)?.eval(x)
}

/// `[ψ(x), ψ′(x), ψ″(x), ψ‴(x)]` sharing one recurrence pass.
pub fn polygamma_all(x: f64) -> Result<[f64; 4]> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "polygamma argument must be positive and finite",
            value: x,
        });
    }
    let mut shift = [0.0; 4];
    let mut z = x;
    while z < SHIFT_THRESHOLD {
        let r = 1.0 / z;
        let r2 = r * r;
        shift[0] += r;
        shift[1] -= r2;
        shift[2] += 2.0 * r2 * r;
        shift[3] -= 6.0 * r2 * r2;
        z += 1.0;
    }
    let mut out = [0.0; 4];
    for (m, o) in out.iter_mut().enumerate() {
        *o = asymptotic(m as u32, z, SERIES_TERMS) - shift[m];
    }
    Ok(out)
}

/// Value and first two derivatives of a metric function at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// The scalar function `f` that generates the metric.
///
/// Methods are only evaluated at arguments `x > 0`; coordinates are
/// validated when a [`Point`](crate::Point) is built.
pub trait MetricFunction {
    fn value(&self, x: f64) -> f64;
    fn deriv1(&self, x: f64) -> f64;
    fn deriv2(&self, x: f64) -> f64;
    fn label(&self) -> &str;

    /// The shipped family this function evaluates, if any.
    fn family(&self) -> Option<Family> {
        None
    }

    /// `(r(x), r′(x))` for `r(x) = f(x) − x + ½`, given `f = f(x)` and
    /// `d = f′(x)`. The default subtracts directly; implementations override
    /// it where `r` is available without cancellation at large `x`.
    fn remainder(&self, x: f64, f: f64, d: f64) -> (f64, f64) {
        (f - x + 0.5, d - 1.0)
    }

    /// `(f(x), f′(x))`; implementations override this when both share work.
    fn value_deriv(&self, x: f64) -> (f64, f64) {
        (self.value(x), self.deriv1(x))
    }

    fn jet(&self, x: f64) -> Jet {
        let (value, d1) = self.value_deriv(x);
        Jet {
            value,
            d1,
            d2: self.deriv2(x),
        }
    }
}

impl<T: MetricFunction + ?Sized> MetricFunction for &T {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }
    fn deriv1(&self, x: f64) -> f64 {
        (**self).deriv1(x)
    }
    fn deriv2(&self, x: f64) -> f64 {
        (**self).deriv2(x)
    }
    fn label(&self) -> &str {
        (**self).label()
    }
    fn family(&self) -> Option<Family> {
        (**self).family()
    }
    fn remainder(&self, x: f64, f: f64, d: f64) -> (f64, f64) {
        (**self).remainder(x, f, d)
    }
    fn value_deriv(&self, x: f64) -> (f64, f64) {
        (**self).value_deriv(x)
    }
    fn jet(&self, x: f64) -> Jet {
        (**self).jet(x)
    }
}

/// `f = 1/ψ′`: the Fisher-Rao metric of the Dirichlet family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrigammaReciprocal;

/// `f̃(x) = (2x+1)x² / (2x²+2x+1)`, a rational approximation of `1/ψ′`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RationalApprox;

pub fn trigamma_reciprocal() -> TrigammaReciprocal {
    TrigammaReciprocal
}

pub fn rational_approx() -> RationalApprox {
    RationalApprox
}

fn psi_all(x: f64) -> [f64; 4] {
    polygamma_all(x).unwrap_or([f64::NAN; 4])
}

// Power-series coefficients (in u = 1/x) of 2ψ″² − ψ′ψ‴, the numerator of
// (1/ψ′)″. The u⁴ and u⁵ coefficients cancel exactly, which direct
// evaluation cannot reproduce in floating point for large x.
const NUM_LEN: usize = 2 * SERIES_TERMS + 7;

const fn curvature_numerator_series() -> [f64; NUM_LEN] {
    let len = 2 * SERIES_TERMS + 4;
    let mut a = [0.0; 2 * SERIES_TERMS + 4]; // ψ′
    let mut b = [0.0; 2 * SERIES_TERMS + 4]; // −ψ″
    let mut c = [0.0; 2 * SERIES_TERMS + 4]; // ψ‴
    a[1] = 1.0;
    a[2] = 0.5;
    b[2] = 1.0;
    b[3] = 1.0;
    c[3] = 2.0;
    c[4] = 3.0;
    let mut k = 1;
    while k <= SERIES_TERMS {
        let bk = BERNOULLI[k - 1];
        let kk = (2 * k) as f64;
        a[2 * k + 1] = bk;
        b[2 * k + 2] = (kk + 1.0) * bk;
        c[2 * k + 3] = (kk + 1.0) * (kk + 2.0) * bk;
        k += 1;
    }
    let mut out = [0.0; NUM_LEN];
    let mut j = 0;
    while j < NUM_LEN {
        let mut s = 0.0;
        let mut i = 0;
        while i <= j {
            if i < len && j - i < len {
                s += 2.0 * b[i] * b[j - i] - a[i] * c[j - i];
            }
            i += 1;
        }
        out[j] = s;
        j += 1;
    }
    out
}

const CURVATURE_NUMERATOR: [f64; NUM_LEN] = curvature_numerator_series();

// Coefficients Tₖ of 1/S(u), where S(u) = xψ′(x) = 1 + u/2 + Σ B₂ⱼu²ʲ, so
// that 1/ψ′(x) = Σ Tₖ uᵏ⁻¹ with T₀ = 1 and T₁ = −½.
const RECIPROCAL_LEN: usize = 2 * SERIES_TERMS + 1;

const fn reciprocal_series() -> [f64; RECIPROCAL_LEN] {
    let mut s = [0.0; RECIPROCAL_LEN];
    s[0] = 1.0;
    s[1] = 0.5;
    let mut j = 1;
    while j <= SERIES_TERMS {
        s[2 * j] = BERNOULLI[j - 1];
        j += 1;
    }
    let mut t = [0.0; RECIPROCAL_LEN];
    t[0] = 1.0;
    let mut k = 1;
    while k < RECIPROCAL_LEN {
        let mut acc = 0.0;
        let mut i = 1;
        while i <= k {
            acc -= s[i] * t[k - i];
            i += 1;
        }
        t[k] = acc;
        k += 1;
    }
    t
}

const RECIPROCAL_SERIES: [f64; RECIPROCAL_LEN] = reciprocal_series();

fn trigamma_reciprocal_d2(x: f64, psi: &[f64; 4]) -> f64 {
    let p1 = psi[1];
    if x >= SHIFT_THRESHOLD {
        let u = 1.0 / x;
        let mut s = 0.0;
        for &coef in CURVATURE_NUMERATOR[6..].iter().rev() {
            s = s * u + coef;
        }
        let u6 = powi_recip(x, 6);
        s * u6 / (p1 * p1 * p1)
    } else {
        (2.0 * psi[2] * psi[2] - p1 * psi[3]) / (p1 * p1 * p1)
    }
}

impl MetricFunction for TrigammaReciprocal {
    fn value(&self, x: f64) -> f64 {
        polygamma(1, x).map(|p| 1.0 / p).unwrap_or(f64::NAN)
    }

    fn deriv1(&self, x: f64) -> f64 {
        self.value_deriv(x).1
    }

    fn deriv2(&self, x: f64) -> f64 {
        trigamma_reciprocal_d2(x, &psi_all(x))
    }

    fn label(&self) -> &str {
        "trigamma"
    }

    fn family(&self) -> Option<Family> {
        Some(Family::Trigamma)
    }

    fn remainder(&self, x: f64, f: f64, d: f64) -> (f64, f64) {
        if x < SHIFT_THRESHOLD {
            return (f - x + 0.5, d - 1.0);
        }
        let u = 1.0 / x;
        let (mut r, mut dr) = (0.0, 0.0);
        for k in (2..RECIPROCAL_LEN).rev() {
            r = r * u + RECIPROCAL_SERIES[k];
            dr = dr * u - (k - 1) as f64 * RECIPROCAL_SERIES[k];
        }
        // r = Σ Tₖ uᵏ⁻¹, r′ = −Σ (k−1) Tₖ uᵏ
        (r * u, dr * u * u)
    }

    fn value_deriv(&self, x: f64) -> (f64, f64) {
        let psi = psi_all(x);
        let f = 1.0 / psi[1];
        (f, -psi[2] * f * f)
    }

    fn jet(&self, x: f64) -> Jet {
        let psi = psi_all(x);
        let f = 1.0 / psi[1];
        Jet {
            value: f,
            d1: -psi[2] * f * f,
            d2: trigamma_reciprocal_d2(x, &psi),
        }
    }
}

impl MetricFunction for RationalApprox {
    // For x ≥ 1 the forms below avoid the overflow of x³ and D² and lose no
    // accuracy, since f̃ ≥ ½ there.
    fn value(&self, x: f64) -> f64 {
        let d = 2.0 * x * x + 2.0 * x + 1.0;
        if x >= 1.0 {
            return x - 0.5 + 0.5 / d;
        }
        (2.0 * x + 1.0) * x * x / d
    }

    fn deriv1(&self, x: f64) -> f64 {
        // f̃′ = 2x(2x³ + 4x² + 4x + 1) / D² = 1 − (2x + 1)/D²
        let d = 2.0 * x * x + 2.0 * x + 1.0;
        if x >= 1.0 {
            return 1.0 - (2.0 * x + 1.0) / d / d;
        }
        2.0 * x * (((2.0 * x + 4.0) * x + 4.0) * x + 1.0) / (d * d)
    }

    fn deriv2(&self, x: f64) -> f64 {
        // f̃″ = 2(6x² + 6x + 1) / D³, in u = 1/x when x ≥ 1
        if x >= 1.0 {
            let u = 1.0 / x;
            let e = (u + 2.0) * u + 2.0;
            let u2 = u * u;
            return 2.0 * ((u + 6.0) * u + 6.0) / (e * e * e) * u2 * u2;
        }
        let d = 2.0 * x * x + 2.0 * x + 1.0;
        2.0 * ((6.0 * x + 6.0) * x + 1.0) / (d * d * d)
    }

    fn label(&self) -> &str {
        "rational"
    }

    fn family(&self) -> Option<Family> {
        Some(Family::Rational)
    }

    fn remainder(&self, x: f64, _f: f64, _d: f64) -> (f64, f64) {
        let d = 2.0 * x * x + 2.0 * x + 1.0;
        (0.5 / d, -(2.0 * x + 1.0) / d / d)
    }
}

/// The two shipped metric functions, selectable by label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Trigamma,
    Rational,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::Trigamma, Family::Rational];
}

impl MetricFunction for Family {
    fn value(&self, x: f64) -> f64 {
        match self {
            Family::Trigamma => TrigammaReciprocal.value(x),
            Family::Rational => RationalApprox.value(x),
        }
    }
    fn deriv1(&self, x: f64) -> f64 {
        match self {
            Family::Trigamma => TrigammaReciprocal.deriv1(x),
            Family::Rational => RationalApprox.deriv1(x),
        }
    }
    fn deriv2(&self, x: f64) -> f64 {
        match self {
            Family::Trigamma => TrigammaReciprocal.deriv2(x),
            Family::Rational => RationalApprox.deriv2(x),
        }
    }
    fn label(&self) -> &str {
        match self {
            Family::Trigamma => "trigamma",
            Family::Rational => "rational",
        }
    }
    fn family(&self) -> Option<Family> {
        Some(*self)
    }
    fn remainder(&self, x: f64, f: f64, d: f64) -> (f64, f64) {
        match self {
            Family::Trigamma => TrigammaReciprocal.remainder(x, f, d),
            Family::Rational => RationalApprox.remainder(x, f, d),
        }
    }
    fn value_deriv(&self, x: f64) -> (f64, f64) {
        match self {
            Family::Trigamma => TrigammaReciprocal.value_deriv(x),
            Family::Rational => RationalApprox.value_deriv(x),
        }
    }
    fn jet(&self, x: f64) -> Jet {
        match self {
            Family::Trigamma => TrigammaReciprocal.jet(x),
            Family::Rational => RationalApprox.jet(x),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trigamma" => Ok(Family::Trigamma),
            "rational" => Ok(Family::Rational),
            _ => Err(Error::Usage("family must be \"trigamma\" or \"rational\"")),
        }
    }
}

/// A condition on `f` that failed on the tested grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AssumptionViolation {
    /// `f(x) ≤ 0` at the first offending grid point.
    NonPositiveValue { x: f64 },
    /// `f′(x) ≤ 0`.
    NonPositiveDerivative { x: f64 },
    /// `f(x)/x²` blows up toward zero (growth factor over three decades).
    NotQuadraticNearZero { ratio_growth: f64 },
    /// `f′(x)/x` blows up toward zero.
    DerivativeNotLinearNearZero { ratio_growth: f64 },
    /// `f(x)/x²` blows up toward infinity.
    NotQuadraticAtInfinity { ratio_growth: f64 },
    /// Second difference of `f` not significantly positive.
    NotConvex { x: f64 },
    /// Second difference of `f/f′` not significantly positive.
    RatioNotConvex { x: f64 },
}

// Growth allowed for f(x)/x² and f′(x)/x when the argument moves three
// decades past the end of the grid.
const RATIO_GROWTH_BOUND: f64 = 10.0;
const RATIO_EXTENSION: f64 = 1e3;

fn second_difference_positive(g: impl Fn(f64) -> f64, x: f64) -> bool {
    let h = 0.1 * x;
    let (a, b, c) = (g(x - h), g(x), g(x + h));
    let d2 = (a - 2.0 * b + c) / (h * h);
    let noise = 64.0 * f64::EPSILON * (a.abs() + 2.0 * b.abs() + c.abs()) / (h * h);
    d2 > noise
}

/// Checks the conditions on `f` numerically on `grid` and returns the
/// violated ones (empty when everything holds).
///
/// Positivity of `f` and `f′` is checked at every grid point, the quadratic
/// bounds through the ratios `f(x)/x²` and `f′(x)/x` three decades beyond the
/// grid ends, and convexity of `f` and `f/f′` through relative second
/// differences.
pub fn verify_assumptions<F: MetricFunction + ?Sized>(mf: &F, grid: &[f64]) -> Result<Vec<AssumptionViolation>> {
    if grid.is_empty() {
        return Err(Error::Usage("assumption grid must not be empty"));
    }
    if let Some(&bad) = grid.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain {
            what: "assumption grid entries must be positive",
            value: bad,
        });
    }
    let mut report = Vec::new();
    let mut push_first = |v: Option<AssumptionViolation>| {
        if let Some(v) = v {
            report.push(v);
        }
    };

    push_first(
        grid.iter()
            .find(|&&x| !(mf.value(x) > 0.0))
            .map(|&x| AssumptionViolation::NonPositiveValue { x }),
    );
    push_first(
        grid.iter()
            .find(|&&x| !(mf.deriv1(x) > 0.0))
            .map(|&x| AssumptionViolation::NonPositiveDerivative { x }),
    );

    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(0.0, f64::max);
    let lo_far = lo / RATIO_EXTENSION;
    let hi_far = hi * RATIO_EXTENSION;

    let small = (mf.value(lo_far) / (lo_far * lo_far)) / (mf.value(lo) / (lo * lo));
    if !(small <= RATIO_GROWTH_BOUND) {
        report.push(AssumptionViolation::NotQuadraticNearZero { ratio_growth: small });
    }
    let small_d = (mf.deriv1(lo_far) / lo_far) / (mf.deriv1(lo) / lo);
    if !(small_d <= RATIO_GROWTH_BOUND) {
        report.push(AssumptionViolation::DerivativeNotLinearNearZero { ratio_growth: small_d });
    }
    let large = (mf.value(hi_far) / (hi_far * hi_far)) / (mf.value(hi) / (hi * hi));
    if !(large <= RATIO_GROWTH_BOUND) {
        report.push(AssumptionViolation::NotQuadraticAtInfinity { ratio_growth: large });
    }

    let value = |x: f64| mf.value(x);
    let ratio = |x: f64| {
        let (f, d) = mf.value_deriv(x);
        f / d
    };
    let mut push = |v: Option<AssumptionViolation>| {
        if let Some(v) = v {
            report.push(v);
        }
    };
    push(
        grid.iter()
            .find(|&&x| !second_difference_positive(value, x))
            .map(|&x| AssumptionViolation::NotConvex { x }),
    );
    push(
        grid.iter()
            .find(|&&x| !second_difference_positive(ratio, x))
            .map(|&x| AssumptionViolation::RatioNotConvex { x }),
    );
    Ok(report)
}

/// Gaps `(f(t) − Σf(xᵢ), f(t)/f′(t) − Σf(xᵢ)/f′(xᵢ))` with `t = Σxᵢ`;
/// both are positive under the assumptions on `f`.
pub fn superadditivity_gaps<F: MetricFunction + ?Sized>(mf: &F, xs: &[f64]) -> (f64, f64) {
    let t: f64 = xs.iter().sum();
    let (ft, dft) = mf.value_deriv(t);
    let (mut sf, mut sr) = (0.0, 0.0);
    for &x in xs {
        let (f, d) = mf.value_deriv(x);
        sf += f;
        sr += f / d;
    }
    (ft - sf, ft / dft - sr)
}

/// `n` points log-uniformly spaced over `[lo, hi]` (inclusive).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![lo];
    }
    let (a, b) = (log(lo), log(hi));
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => libm::exp(a + (b - a) * i as f64 / (n - 1) as f64),
        })
        .collect()
}
