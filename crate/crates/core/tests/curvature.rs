mod common;

use common::{intrinsic_sectional, points, rng};
use fisher_dirichlet::curvature::{
    asymptotic_limits, conjecture_report, gaussian_2d, principal_curvatures, sectional, sectional_axes, Grid,
    LOWER_BOUND, LOWER_BOUND_SLACK,
};
use fisher_dirichlet::embedding::{basis_vector, shape_operator};
use fisher_dirichlet::specfun::log_grid;
use fisher_dirichlet::{Error, Family, MetricFunction, Point, Tangent};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

/// A point with two tangent vectors of components `xᵢ·U(−1, 1)`.
fn plane(dims: core::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Point, Vec<f64>, Vec<f64>)> {
    points(dims, 1e-2, 1e2)
        .prop_flat_map(|p| {
            let n = p.dim();
            (
                Just(p),
                prop::collection::vec(-1.0f64..1.0, n),
                prop::collection::vec(-1.0f64..1.0, n),
            )
        })
        .prop_map(|(p, a, b)| {
            let u = p.coords().iter().zip(&a).map(|(x, a)| x * a).collect();
            let v = p.coords().iter().zip(&b).map(|(x, b)| x * b).collect();
            (p, u, v)
        })
}

fn tangent(p: &Point, c: &[f64]) -> Tangent {
    Tangent::new(p.clone(), c.to_vec()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn corner_limits() {
    let mf = Family::Trigamma;
    assert!((gaussian_2d(&mf, 100.0, 100.0).unwrap() + 0.5).abs() < 0.01);
    assert!((gaussian_2d(&mf, 1e-3, 1e3).unwrap() + 0.25).abs() < 0.01);
    assert!(gaussian_2d(&mf, 1e-5, 1e-5).unwrap().abs() < 0.01);
}

#[test]
fn boundary_asymptotes() {
    let mf = Family::Trigamma;
    for x in [0.5, 1.0, 2.0, 5.0] {
        let (zero, inf) = asymptotic_limits(&mf, x).unwrap();
        assert!((gaussian_2d(&mf, x, 1e-7).unwrap() - zero).abs() < 1e-3);
        assert!((gaussian_2d(&mf, x, 1e6).unwrap() - inf).abs() < 1e-3);
    }
    assert!(matches!(
        asymptotic_limits(&Family::Rational, 1.0),
        Err(Error::Usage(_))
    ));
}

#[test]
fn degenerate_planes_are_rejected() {
    let p = pt(&[1.0, 2.0, 3.0]);
    let u = tangent(&p, &[1.0, -2.0, 0.5]);
    assert!(matches!(
        sectional(&Family::Trigamma, &p, &u, &u.scaled(2.0)),
        Err(Error::Usage(_))
    ));
    let w = tangent(&pt(&[1.0, 2.0, 4.0]), &[0.0, 1.0, 0.0]);
    assert!(sectional(&Family::Trigamma, &p, &u, &w).is_err());
}

#[test]
fn negativity_sweep_2d() {
    let grid = log_grid(1e-3, 1e3, 80);
    for mf in Family::ALL {
        let g = Grid::tabulate(&grid, &grid, |x, y| gaussian_2d(&mf, x, y)).unwrap();
        assert_eq!(g.count(|k| !(k < 0.0)), 0, "{mf:?}");
    }
}

#[test]
fn conjecture_scan_is_reported() {
    let grid = log_grid(1e-3, 1e3, 120);
    let g = Grid::tabulate(&grid, &grid, |x, y| gaussian_2d(&Family::Trigamma, x, y)).unwrap();
    let report = conjecture_report(&g);
    println!(
        "trigamma K on [1e-3, 1e3]^2: min {:.6} at {:?}, {} cells below {} - {}, \
         {} increases along x, {} along y",
        report.min,
        report.argmin,
        report.below_lower_bound,
        LOWER_BOUND,
        LOWER_BOUND_SLACK,
        report.increasing_in_x,
        report.increasing_in_y,
    );
    assert_eq!(report.non_negative, 0);
    assert!(report.min.is_finite());
}

#[test]
fn principal_curvatures_shrink_like_sqrt_tau() {
    let mf = Family::Trigamma;
    let top = |tau: f64| *principal_curvatures(&mf, &pt(&[tau, tau, 1.0])).last().unwrap();
    let ratio = top(1e-4) / top(1e-6);
    assert!((8.0..12.5).contains(&ratio), "{ratio}");
}

#[test]
fn gauss_equation_matches_intrinsic_curvature() {
    let mut r = rng(5);
    for n in [2usize, 3] {
        for _ in 0..10 {
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.3f64..4.0)).collect();
            let u: Vec<f64> = x.iter().map(|xi| xi * r.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = x.iter().map(|xi| xi * r.gen_range(-1.0..1.0)).collect();
            let p = pt(&x);
            for mf in Family::ALL {
                let gauss = sectional(&mf, &p, &tangent(&p, &u), &tangent(&p, &v)).unwrap();
                let intrinsic = intrinsic_sectional(&mf, &x, &u, &v, 1e-4);
                assert!((gauss - intrinsic).abs() < 1e-3, "{mf:?} {x:?}: {gauss} vs {intrinsic}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sectional_is_negative((p, u, v) in plane(2..=6)) {
        for mf in Family::ALL {
            match sectional(&mf, &p, &tangent(&p, &u), &tangent(&p, &v)) {
                Ok(k) => prop_assert!(k < 0.0, "{mf:?}: {k}"),
                Err(Error::Usage(_)) => {}
                Err(e) => return Err(TestCaseError::fail(format!("{e:?}"))),
            }
        }
    }

    #[test]
    fn sectional_depends_only_on_the_plane(
        (p, u, v) in plane(2..=5),
        m in prop::array::uniform4(-2.0f64..2.0),
    ) {
        prop_assume!((m[0] * m[3] - m[1] * m[2]).abs() > 0.1);
        let (tu, tv) = (tangent(&p, &u), tangent(&p, &v));
        let a = tu.combine(m[0], &tv, m[1]).unwrap();
        let b = tu.combine(m[2], &tv, m[3]).unwrap();
        for mf in Family::ALL {
            let Ok(k) = sectional(&mf, &p, &tu, &tv) else { continue };
            let Ok(k2) = sectional(&mf, &p, &a, &b) else { continue };
            prop_assert!(rel(k2, k) < 1e-8, "{mf:?}: {k} vs {k2}");
        }
    }

    #[test]
    fn two_dimensional_curvature_is_unique((p, u, v) in plane(2..=2)) {
        let (x, y) = (p.coords()[0], p.coords()[1]);
        for mf in Family::ALL {
            let k2 = gaussian_2d(&mf, x, y).unwrap();
            // the gap f(x+y) − f(x) − f(y) is conditioned like max(x, y)/min(x, y)
            prop_assert!(rel(gaussian_2d(&mf, y, x).unwrap(), k2) < 1e-10);
            prop_assert!(rel(sectional_axes(&mf, &p, 0, 1).unwrap(), k2) < 1e-8);
            if let Ok(k) = sectional(&mf, &p, &tangent(&p, &u), &tangent(&p, &v)) {
                prop_assert!(rel(k, k2) < 1e-8, "{mf:?}: {k} vs {k2}");
            }
        }
    }

    #[test]
    fn axis_planes_match_the_gauss_equation(p in points(3..=6, 1e-2, 1e2), i in 0usize..6, j in 0usize..6) {
        let n = p.dim();
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        for mf in Family::ALL {
            let axes = sectional_axes(&mf, &p, i, j).unwrap();
            prop_assert!(rel(sectional_axes(&mf, &p, j, i).unwrap(), axes) < 1e-10);
            let ei = basis_vector(&mf, &p, i).unwrap();
            let ej = basis_vector(&mf, &p, j).unwrap();
            let gauss = sectional(&mf, &p, &ei, &ej).unwrap();
            prop_assert!(rel(axes, gauss) < 1e-8, "{mf:?} ({i},{j}): {axes} vs {gauss}");
        }
    }

    #[test]
    fn principal_curvatures_are_bounded(p in points(2..=6, 1e-3, 1e3)) {
        for mf in Family::ALL {
            let lambda = principal_curvatures(&mf, &p);
            let so = shape_operator(&mf, &p);
            let dmax = so.d.iter().copied().fold(0.0, f64::max);
            prop_assert!(lambda.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(lambda[0] >= -1e-10 * lambda[lambda.len() - 1].max(1.0));
            prop_assert!(*lambda.last().unwrap() <= so.k * dmax * (1.0 + 1e-12));
            let xmax = p.coords().iter().copied().fold(0.0, f64::max);
            prop_assert!((dmax - mf.deriv1(xmax)).abs() <= 1e-15 * dmax);
        }
    }

    #[test]
    fn principal_curvatures_match_eigensolver(p in points(2..=6, 1e-2, 1e2)) {
        for mf in Family::ALL {
            let lambda = principal_curvatures(&mf, &p);
            let so = shape_operator(&mf, &p);
            let n = p.dim();
            let m = DMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j { so.d[i] } else { 0.0 };
                so.k * (diag - so.c * so.v[i] * so.v[j])
            });
            let mut want: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            want.sort_by(f64::total_cmp);
            let scale = want.last().unwrap().abs().max(1e-300);
            for (a, b) in lambda.iter().zip(&want) {
                prop_assert!((a - b).abs() <= 1e-10 * scale, "{mf:?}: {lambda:?} vs {want:?}");
            }
        }
    }
}
