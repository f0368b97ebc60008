//! Closed forms against independent one-dimensional formulas and the
//! numerical oracles.

use std::f64::consts::PI;

use libm::tgamma;
use lightcone::cone::{ConePoint, MultiIndex, TubePoint};
use lightcone::identities::{check_ranges, closed_form, IdentityCase, IdentityId, IdentityPoint};
use lightcone::oracle::{mc_lhs, quad_iterated, verify_identity, AuditStatus};
use proptest::prelude::*;

fn beta(a: f64, b: f64) -> f64 {
    tgamma(a) * tgamma(b) / tgamma(a + b)
}

/// `∫ (u² + v²)^{-r/2} du`.
fn line_integral(r: f64, v: f64) -> f64 {
    PI.sqrt() * tgamma((r - 1.0) / 2.0) / tgamma(r / 2.0) * v.powf(1.0 - r)
}

fn cone_case(id: IdentityId, idx: Vec<MultiIndex>, y: f64) -> IdentityCase {
    IdentityCase::new(id, idx, IdentityPoint::Cone { point: ConePoint::new(vec![y]).unwrap() }).unwrap()
}

fn corrected(case: &IdentityCase) -> Option<f64> {
    check_ranges(case).ok()?;
    Some(closed_form(case).ok()?.corrected.re)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-11 * b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplace_power_is_a_gamma_integral(s in -0.9f64..4.0, t in 0.1f64..5.0) {
        let case = cone_case(IdentityId::LaplacePower, vec![MultiIndex::plain([s])], t);
        let exact = tgamma(s + 1.0) * (4.0 * PI * t).powf(-s - 1.0);
        let v = corrected(&case).unwrap();
        prop_assert!(close(v, exact), "{v} vs {exact}");
        prop_assert!(close(closed_form(&case).unwrap().stated.re, exact));
    }

    #[test]
    fn cone_shift_is_a_beta_integral(eta in 0.0f64..3.0, gap in 1.5f64..5.0, b in 0.2f64..5.0) {
        let r = eta + gap;
        let case = cone_case(IdentityId::ConeShift, vec![MultiIndex::shifted([r]), MultiIndex::shifted([eta])], b);
        let Some(v) = corrected(&case) else { return Err(TestCaseError::reject("outside stated range")) };
        let exact = b.powf(eta - r + 1.0) * beta(eta + 1.0, r - eta - 1.0);
        prop_assert!(close(v, exact), "{v} vs {exact}");
    }

    #[test]
    fn horizontal_slice_is_a_line_integral(r in 1.5f64..7.0, v in 0.2f64..5.0) {
        let case = cone_case(IdentityId::HorizontalAbs, vec![MultiIndex::shifted([r])], v);
        let Some(c) = corrected(&case) else { return Err(TestCaseError::reject("outside stated range")) };
        prop_assert!(close(c, line_integral(r, v)));
    }

    #[test]
    fn tube_abs_is_a_half_plane_integral(l in -0.5f64..2.0, gap in 2.5f64..5.0, x in -3.0f64..3.0, y in 0.2f64..4.0) {
        let r = l + gap;
        let z = TubePoint::new(vec![x], ConePoint::new(vec![y]).unwrap()).unwrap();
        let case = IdentityCase::new(
            IdentityId::TubeAbs,
            vec![MultiIndex::shifted([l]), MultiIndex::shifted([r])],
            IdentityPoint::Tube { point: z },
        ).unwrap();
        let Some(c) = corrected(&case) else { return Err(TestCaseError::reject("outside stated range")) };
        // ∫_0^∞ v^l ∫ |u + i(y + v)|^{-r} du dv
        let exact = line_integral(r, 1.0) * y.powf(l + 2.0 - r) * beta(l + 1.0, r - l - 2.0);
        prop_assert!(close(c, exact), "{c} vs {exact}");
    }
}

#[test]
fn quadrature_matches_laplace_at_n2() {
    let y = ConePoint::from_canonical(&[1.3], &[0.4], 0.8).unwrap();
    let case = IdentityCase::new(IdentityId::LaplacePower, vec![MultiIndex::plain([0.7, 0.2])], IdentityPoint::Cone { point: y }).unwrap();
    let q = quad_iterated(&case).unwrap().value.re;
    let c = closed_form(&case).unwrap();
    assert!((q / c.stated.re - 1.0).abs() < 1e-8, "{q} vs {}", c.stated.re);
}

#[test]
fn monte_carlo_matches_half_plane_value() {
    let z = TubePoint::new(vec![0.7], ConePoint::new(vec![1.5]).unwrap()).unwrap();
    let case = IdentityCase::new(
        IdentityId::TubeAbs,
        vec![MultiIndex::shifted([0.5]), MultiIndex::shifted([4.0])],
        IdentityPoint::Tube { point: z },
    )
    .unwrap();
    let est = mc_lhs(&case, 200_000, 3).unwrap();
    let exact = line_integral(4.0, 1.0) * 1.5f64.powf(-1.5) * beta(1.5, 1.5);
    assert!((est.value.re - exact).abs() < 4.0 * est.std_error, "{est:?} vs {exact}");
}

#[test]
fn audit_reports_displayed_constant_mismatch() {
    let case = cone_case(IdentityId::HorizontalAbs, vec![MultiIndex::shifted([2.0])], 1.0);
    let rec = verify_identity(&case, 100_000, 5).unwrap();
    assert_eq!(rec.status, AuditStatus::ExponentConfirmedConstantMismatch);
    assert!(rec.z_corrected < 4.0);
    assert!((rec.rhs_corrected.re - PI).abs() < 1e-12);
}

#[test]
fn out_of_range_indices_are_named() {
    let case = cone_case(IdentityId::ConeShift, vec![MultiIndex::shifted([1.0]), MultiIndex::shifted([1.0])], 1.0);
    let err = check_ranges(&case).unwrap_err().to_string();
    assert!(err.contains("must exceed"), "{err}");
}
