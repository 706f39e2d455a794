mod common;

use core::f64::consts::PI;

use common::{rel_err, trigamma_oracle};
use fisher_dirichlet::specfun::{
    log_grid, polygamma, rational_approx, superadditivity_gaps, trigamma_reciprocal, verify_assumptions,
    AssumptionViolation,
};
use fisher_dirichlet::{Family, MetricFunction};
use proptest::prelude::*;

struct Identity;

impl MetricFunction for Identity {
    fn value(&self, x: f64) -> f64 {
        x
    }
    fn deriv1(&self, _: f64) -> f64 {
        1.0
    }
    fn deriv2(&self, _: f64) -> f64 {
        0.0
    }
    fn label(&self) -> &str {
        "identity"
    }
}

/// Sixth-order central difference with step `0.01x`.
fn central(g: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 0.01 * x;
    let d = |k: f64| g(x + k * h) - g(x - k * h);
    (45.0 * d(1.0) - 9.0 * d(2.0) + d(3.0)) / (60.0 * h)
}

#[test]
fn trigamma_special_values() {
    // Σ 1/k² and Σ 1/(k − ½)² summed directly with a tail correction
    let zeta2: f64 = (1..=2_000_000u64).rev().map(|k| 1.0 / (k * k) as f64).sum::<f64>() + 1.0 / 2_000_000.5;
    assert!(rel_err(polygamma(1, 1.0).unwrap(), zeta2) < 1e-12);
    assert!(rel_err(polygamma(1, 1.0).unwrap(), PI * PI / 6.0) < 1e-14);
    assert!(rel_err(polygamma(1, 0.5).unwrap(), PI * PI / 2.0) < 1e-14);
    assert!(rel_err(polygamma(1, 1e-4).unwrap(), 1e8) < 1e-3);
}

#[test]
fn polygamma_rejects_bad_input() {
    assert!(polygamma(1, 0.0).is_err());
    assert!(polygamma(1, -2.0).is_err());
    assert!(polygamma(4, 1.0).is_err());
}

#[test]
fn trigamma_family_limits() {
    let f = trigamma_reciprocal();
    assert!(rel_err(f.value(1.0), 6.0 / (PI * PI)) < 1e-14);
    assert!((f.deriv1(1e6) - 1.0).abs() < 1e-5);
    assert!((f.value(1e6) - 1e6 + 0.5).abs() < 1e-4);
    for mf in Family::ALL {
        assert!(mf.value(1e-8) < 1e-15, "{mf:?}");
        assert!(mf.deriv1(1e-8) < 1e-7, "{mf:?}");
    }
}

#[test]
fn rational_family_values() {
    let f = rational_approx();
    assert!((f.value(1.0) - 0.6).abs() < 1e-15);
    assert!(rel_err(f.value(1e-6) / 1e-12, 1.0) < 1e-4);
    let g = trigamma_reciprocal();
    for x in log_grid(1e-3, 1e3, 400) {
        assert!((f.value(x) - g.value(x)).abs() < 0.02, "x = {x}");
    }
}

#[test]
fn assumptions_hold_for_shipped_families() {
    let grid = log_grid(1e-3, 1e3, 200);
    for mf in Family::ALL {
        let report = verify_assumptions(&mf, &grid).unwrap();
        assert!(report.is_empty(), "{mf:?}: {report:?}");
    }
    let report = verify_assumptions(&Identity, &grid).unwrap();
    assert!(report
        .iter()
        .any(|v| matches!(v, AssumptionViolation::NotConvex { .. })));
    assert!(verify_assumptions(&Identity, &[]).is_err());
    assert!(verify_assumptions(&Identity, &[1.0, -1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn trigamma_matches_summation_oracle(lx in (1e-6f64).ln()..(1e6f64).ln()) {
        let x = lx.exp();
        prop_assert!(rel_err(polygamma(1, x).unwrap(), trigamma_oracle(x)) < 1e-12);
    }

    #[test]
    fn recurrence_identity(order in 0u32..4, x in 0.1f64..50.0) {
        let fact = [1.0, 1.0, 2.0, 6.0][order as usize];
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        let step = sign * fact / x.powi(order as i32 + 1);
        let (lo, hi) = (polygamma(order, x).unwrap(), polygamma(order, x + 1.0).unwrap());
        // relative to the largest term of the identity
        let scale = lo.abs().max(hi.abs()).max(step.abs());
        prop_assert!((hi - lo - step).abs() < 1e-12 * scale, "order {order}, x {x}");
    }

    #[test]
    fn derivatives_match_central_differences(lx in (1e-3f64).ln()..(1e3f64).ln()) {
        let x = lx.exp();
        for mf in Family::ALL {
            prop_assert!(rel_err(mf.deriv1(x), central(|y| mf.value(y), x)) < 1e-6);
            // f″ is differenced through r′ = f′ − 1: at large x, f″ is far
            // below the rounding of f′ ≈ 1
            let dr = |y: f64| {
                let (f, d) = mf.value_deriv(y);
                mf.remainder(y, f, d).1
            };
            prop_assert!(rel_err(mf.deriv2(x), central(dr, x)) < 1e-6);
        }
    }

    #[test]
    fn superadditivity(
        n in prop::sample::select(vec![2usize, 3, 5]),
        lx in prop::collection::vec((1e-3f64).ln()..(1e3f64).ln(), 5),
    ) {
        let xs: Vec<f64> = lx[..n].iter().map(|l| l.exp()).collect();
        for mf in Family::ALL {
            let (gap, ratio_gap) = superadditivity_gaps(&mf, &xs);
            prop_assert!(gap > 0.0, "{mf:?} {xs:?}");
            prop_assert!(ratio_gap > 0.0, "{mf:?} {xs:?}");
        }
    }

    #[test]
    fn remainder_agrees_with_direct_subtraction(x in 1.0f64..1e3) {
        for mf in Family::ALL {
            let (f, d) = mf.value_deriv(x);
            let (r, dr) = mf.remainder(x, f, d);
            prop_assert!((r - (f - x + 0.5)).abs() < 1e-14 * x);
            prop_assert!((dr - (d - 1.0)).abs() < 1e-13);
        }
    }
}
