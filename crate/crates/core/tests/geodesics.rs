mod common;

use common::{points_with_tangent, random_point, rel_err, rng, trigamma_oracle};
use fisher_dirichlet::geodesics::{
    acceleration_2d, diagonal_geodesic, diagonal_q, distance, exp_map, geodesic_2d_coefficients, geodesic_ivp, log_map,
};
use fisher_dirichlet::geometry::{christoffel, energy};
use fisher_dirichlet::specfun::log_grid;
use fisher_dirichlet::{Family, MetricFunction, Point, Tangent};
use proptest::prelude::*;
use rand::Rng;

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn tangent(p: &Point, c: &[f64]) -> Tangent {
    Tangent::new(p.clone(), c.to_vec()).unwrap()
}

fn speed(mf: &Family, v: &Tangent) -> f64 {
    energy(mf, v.base().coords(), v.components()).sqrt()
}

/// Largest coordinate difference, relative to `max(1, |q|)`.
fn miss(p: &Point, q: &Point) -> f64 {
    p.coords()
        .iter()
        .zip(q.coords())
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// `v` rescaled to metric norm `len`.
fn with_length(mf: &Family, v: &Tangent, len: f64) -> Tangent {
    v.scaled(len / speed(mf, v))
}

#[test]
fn zero_velocity_gives_a_constant_path() {
    for mf in Family::ALL {
        let p = pt(&[0.4, 2.0, 7.0]);
        let path = geodesic_ivp(&mf, &p, &Tangent::zero(p.clone()), 5.0, 11).unwrap();
        assert_eq!(path.energy, 0.0);
        assert!(path.points.iter().all(|q| q == &p));
        assert_eq!(exp_map(&mf, &p, &Tangent::zero(p.clone())).unwrap(), p);
    }
}

#[test]
fn invalid_requests_are_rejected() {
    let mf = Family::Trigamma;
    let p = pt(&[1.0, 2.0]);
    let v = tangent(&p, &[0.1, 0.2]);
    assert!(geodesic_ivp(&mf, &p, &v, 1.0, 1).is_err());
    assert!(geodesic_ivp(&mf, &p, &v, f64::NAN, 5).is_err());
    assert!(log_map(&mf, &p, &pt(&[1.0, 2.0, 3.0]), 1e-8).is_err());
    assert!(log_map(&mf, &p, &pt(&[2.0, 2.0]), 0.0).is_err());
    assert!(diagonal_geodesic(&mf, 0.0, 1.0, 1.0, 5).is_err());
    assert!(diagonal_geodesic(&mf, 1.0, 1.0, 1.0, 1).is_err());
}

#[test]
fn time_reversal_returns_to_the_start() {
    let mut r = rng(11);
    for mf in Family::ALL {
        for n in [2usize, 3, 4] {
            let p = random_point(&mut r, n, 0.2, 5.0);
            let dir: Vec<f64> = p.coords().iter().map(|x| x * r.gen_range(-1.0..1.0)).collect();
            let v = with_length(&mf, &tangent(&p, &dir), 1.5);
            let fwd = geodesic_ivp(&mf, &p, &v, 2.0, 2).unwrap();
            let end = fwd.end().clone();
            let back_v = fwd.velocities.last().unwrap().scaled(-1.0);
            let back = geodesic_ivp(&mf, &end, &back_v, 2.0, 2).unwrap();
            assert!(miss(back.end(), &p) < 1e-6, "{mf:?}: {:?} vs {:?}", back.end(), p);
        }
    }
}

#[test]
fn diagonal_launches_stay_diagonal() {
    for mf in Family::ALL {
        for &(x0, c) in &[(1.0, 0.7), (0.05, -0.01), (3.0, -2.0), (0.5, 3.0)] {
            let p = pt(&[x0, x0]);
            let path = geodesic_ivp(&mf, &p, &tangent(&p, &[c, c]), 4.0, 81).unwrap();
            for q in &path.points {
                let (x, y) = (q.coords()[0], q.coords()[1]);
                assert!((x - y).abs() < 1e-9 * x.max(1.0), "{mf:?}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn exponential_map_is_homogeneous() {
    let mut r = rng(12);
    for mf in Family::ALL {
        for _ in 0..6 {
            let n = r.gen_range(2..=4);
            let p = random_point(&mut r, n, 0.2, 5.0);
            let dir: Vec<f64> = p.coords().iter().map(|x| x * r.gen_range(-1.0..1.0)).collect();
            let v = with_length(&mf, &tangent(&p, &dir), r.gen_range(0.1..1.5));
            let doubled = exp_map(&mf, &p, &v.scaled(2.0)).unwrap();
            let slow = geodesic_ivp(&mf, &p, &v, 2.0, 2).unwrap();
            assert!(
                miss(&doubled, slow.end()) < 1e-7,
                "{mf:?}: {doubled:?} vs {:?}",
                slow.end()
            );
        }
    }
}

#[test]
fn energy_is_conserved_over_ten_time_units() {
    let mut r = rng(13);
    for mf in Family::ALL {
        for _ in 0..20 {
            let n = r.gen_range(2..=5);
            let p = random_point(&mut r, n, 0.05, 20.0);
            let dir: Vec<f64> = p.coords().iter().map(|x| x * r.gen_range(-1.0..1.0)).collect();
            let v = with_length(&mf, &tangent(&p, &dir), 1.0);
            let path = geodesic_ivp(&mf, &p, &v, 10.0, 201).unwrap();
            let drift = path.energy_drift(&mf);
            assert!(drift <= 1e-6, "{mf:?} from {:?}: drift {drift:e}", p.coords());
        }
    }
}

#[test]
fn boundary_ward_geodesics_survive_fifty_time_units() {
    // Launches that dip toward the boundary and turn back. Geodesics that
    // converge to a face (the diagonal toward the origin, or one coordinate
    // shrinking while the others grow) decay like e^{−t} and meet the escape
    // guard before t = 50.
    let launches: [(&[f64], &[f64]); 7] = [
        (&[1.0, 1.0], &[-1.0, 0.0]),
        (&[1.0, 2.0], &[-1.0, -0.2]),
        (&[0.1, 5.0], &[-0.1, 0.0]),
        (&[0.01, 1.0], &[-1.0, 0.0]),
        (&[2.0, 0.5], &[0.0, -1.0]),
        (&[1.0, 1.0, 1.0], &[-1.0, 0.0, 0.0]),
        (&[1.0, 2.0, 3.0], &[-1.0, -0.5, 0.0]),
    ];
    for mf in Family::ALL {
        for (x, d) in launches {
            let p = pt(x);
            let v = with_length(&mf, &tangent(&p, d), 1.0);
            let path = geodesic_ivp(&mf, &p, &v, 50.0, 501).unwrap_or_else(|e| panic!("{mf:?} from {x:?}: {e:?}"));
            assert!(path.min_coordinate() > 0.0);
            assert!(path.points.iter().all(|q| q.coords().iter().all(|c| c.is_finite())));
        }
    }
}

#[test]
fn coincident_points_need_no_iterations() {
    for mf in Family::ALL {
        let p = pt(&[0.3, 8.0]);
        let r = log_map(&mf, &p, &p, 1e-8).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.initial_velocity.components().iter().all(|&c| c == 0.0));
        assert_eq!(distance(&mf, &p, &p).unwrap(), 0.0);
    }
}

#[test]
fn triangle_inequality() {
    let mut r = rng(14);
    let mf = Family::Trigamma;
    for _ in 0..100 {
        let [p, q, s] = [0; 3].map(|_| random_point(&mut r, 2, 0.3, 6.0));
        let (pq, qs, ps) = (
            distance(&mf, &p, &q).unwrap(),
            distance(&mf, &q, &s).unwrap(),
            distance(&mf, &p, &s).unwrap(),
        );
        assert!(ps <= pq + qs + 1e-6, "{p:?} {q:?} {s:?}: {ps} > {pq} + {qs}");
    }
}

#[test]
fn beta_regression_distance() {
    // shooting at tolerance 1e−8
    let (p, q) = (pt(&[2.0, 5.0]), pt(&[2.0, 2.0]));
    let d = distance(&Family::Trigamma, &p, &q).unwrap();
    assert!((d - 1.124096136691259).abs() < 1e-7, "{d}");
    assert!((distance(&Family::Rational, &p, &q).unwrap() - 1.129159823107678).abs() < 1e-7);
}

#[test]
fn two_dimensional_coefficients() {
    let grid = log_grid(1e-3, 1e3, 40);
    for mf in Family::ALL {
        for &x in &grid {
            for &y in &grid {
                let c = geodesic_2d_coefficients(&mf, x, y).unwrap();
                let swapped = geodesic_2d_coefficients(&mf, y, x).unwrap();
                assert!(c.a > 0.0, "{mf:?} ({x}, {y})");
                assert!((c.a - swapped.a).abs() <= 1e-14 * mf.value(x + y));
            }
        }
    }
}

#[test]
fn diagonal_geodesic_matches_the_integrator() {
    for mf in Family::ALL {
        for &(x0, xd0, t) in &[(1.0, 0.8, 5.0), (0.3, -0.2, 4.0), (4.0, 1.5, 3.0), (2.0, -1.0, 6.0)] {
            let quad = diagonal_geodesic(&mf, x0, xd0, t, 41).unwrap();
            let p = pt(&[x0, x0]);
            let ivp = geodesic_ivp(&mf, &p, &tangent(&p, &[xd0, xd0]), t, 41).unwrap();
            let c0 = xd0 * diagonal_q(&mf, x0).sqrt();
            for (a, b) in quad.points.iter().zip(&ivp.points) {
                assert!(miss(a, b) < 1e-6, "{mf:?}: {a:?} vs {b:?}");
            }
            for w in &quad.velocities {
                let x = w.base().coords()[0];
                let c = w.components()[0] * diagonal_q(&mf, x).sqrt();
                assert!(rel_err(c, c0) < 1e-8);
            }
            assert!(quad.energy_drift(&mf) < 1e-8);
        }
    }
}

#[test]
fn diagonal_q_duplication_identity() {
    let mf = Family::Trigamma;
    for x in log_grid(1e-3, 1e3, 60) {
        let oracle = 0.5 * (trigamma_oracle(x) - trigamma_oracle(x + 0.5));
        assert!(rel_err(diagonal_q(&mf, x), oracle) < 1e-10, "{x}");
    }
}

#[test]
fn diagonal_q_asymptotics() {
    let mf = Family::Trigamma;
    assert!((diagonal_q(&mf, 1e-6) * 2e-12 - 1.0).abs() < 1e-2);
    assert!((diagonal_q(&mf, 1e6) * 4e12 - 1.0).abs() < 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distance_is_realized_by_the_geodesic(
        (p, dir) in points_with_tangent(2..=3, 0.3, 5.0),
        len in 0.05f64..2.5,
    ) {
        let mf = Family::Trigamma;
        prop_assume!(dir.iter().any(|&c| c != 0.0));
        let v = with_length(&mf, &tangent(&p, &dir), len);
        let q = exp_map(&mf, &p, &v).unwrap();
        let d = distance(&mf, &p, &q).unwrap();
        prop_assert!((d - len).abs() < 1e-5, "{d} vs {len}");
    }

    #[test]
    fn distance_is_symmetric((p, dir) in points_with_tangent(2..=3, 0.2, 5.0), len in 0.1f64..3.0) {
        for mf in Family::ALL {
            prop_assume!(dir.iter().any(|&c| c != 0.0));
            let q = exp_map(&mf, &p, &with_length(&mf, &tangent(&p, &dir), len)).unwrap();
            let (pq, qp) = (distance(&mf, &p, &q).unwrap(), distance(&mf, &q, &p).unwrap());
            prop_assert!((pq - qp).abs() < 1e-6, "{mf:?}: {pq} vs {qp}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_dimensional_ode_matches_christoffel((p, v) in points_with_tangent(2..=2, 0.05, 20.0)) {
        for mf in Family::ALL {
            let (x, y) = (p.coords()[0], p.coords()[1]);
            let (ax, ay) = acceleration_2d(&mf, (x, y), (v[0], v[1])).unwrap();
            let want = christoffel(&mf, &p).contract(&v, &v);
            let scale = want.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            prop_assert!((ax + want[0]).abs() <= 1e-9 * scale, "{mf:?}: {ax} vs {}", -want[0]);
            prop_assert!((ay + want[1]).abs() <= 1e-9 * scale, "{mf:?}: {ay} vs {}", -want[1]);
        }
    }
}
