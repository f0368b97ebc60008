use lightcone::cone::{
    abs_complex_power, complex_power_p, delta_power, delta_power_by_minors, is_in_cone, leading_minors_dense, ConePoint, Convention,
    MultiIndex, TubePoint,
};
use proptest::prelude::*;

fn cone_point(n: usize) -> impl Strategy<Value = ConePoint> {
    (prop::collection::vec(0.2f64..4.0, n - 1), prop::collection::vec(-2.0f64..2.0, n - 1), 0.2f64..4.0)
        .prop_map(|(head, border, d)| ConePoint::from_canonical(&head, &border, d).unwrap())
}

fn point_and_index(lo: f64, hi: f64) -> impl Strategy<Value = (ConePoint, Vec<f64>)> {
    (1usize..=3).prop_flat_map(move |n| (cone_point(n), prop::collection::vec(lo..hi, n)))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn minors_match_dense_determinants((y, _) in point_and_index(0.0, 1.0)) {
        let dense = leading_minors_dense(&y.arrowhead());
        for (a, b) in y.minors().iter().zip(&dense) {
            prop_assert!(close(*a, *b, 1e-9), "{a} vs {b}");
        }
        prop_assert!(is_in_cone(y.coords()));
        prop_assert!(dense.iter().all(|m| *m > 0.0));
    }

    #[test]
    fn product_and_minor_forms_agree((y, s) in point_and_index(-3.0, 3.0)) {
        let s = MultiIndex::plain(s);
        let a = delta_power(&y, &s).unwrap();
        let b = delta_power_by_minors(&y, &s).unwrap();
        prop_assert!(close(a, b, 1e-10));
    }

    #[test]
    fn power_is_multiplicative_and_homogeneous((y, s) in point_and_index(-2.0, 2.0), t0 in -2.0f64..2.0, lambda in 0.1f64..10.0) {
        let n = y.n();
        let t: Vec<f64> = (0..n).map(|j| t0 + j as f64 * 0.3).collect();
        let sum: Vec<f64> = s.iter().zip(&t).map(|(a, b)| a + b).collect();
        let (s, t, sum) = (MultiIndex::plain(s), MultiIndex::plain(t), MultiIndex::plain(sum));
        let lhs = delta_power(&y, &sum).unwrap();
        prop_assert!(close(lhs, delta_power(&y, &s).unwrap() * delta_power(&y, &t).unwrap(), 1e-10));
        let scaled = delta_power(&y.scaled(lambda).unwrap(), &s).unwrap();
        prop_assert!(close(scaled, lambda.powf(s.sum()) * delta_power(&y, &s).unwrap(), 1e-10));
    }

    #[test]
    fn complex_power_restricts_to_cone_power((y, s) in point_and_index(-2.0, 2.0)) {
        let s = MultiIndex::plain(s);
        let p = complex_power_p(&TubePoint::imaginary(y.clone()), &s).unwrap();
        let d = delta_power(&y, &s).unwrap();
        prop_assert!(close(p.re, d, 1e-10));
        prop_assert!(p.im.abs() <= 1e-10 * d);
    }

    #[test]
    fn modulus_is_dominated_for_nonnegative_exponents((y, s) in point_and_index(0.0, 3.0), x0 in -3.0f64..3.0) {
        let m = y.coords().len();
        let x: Vec<f64> = (0..m).map(|k| x0 * (1.0 + k as f64) / m as f64).collect();
        let s = MultiIndex::plain(s).neg();
        let z = TubePoint::new(x, y.clone()).unwrap();
        let modulus = abs_complex_power(&z, &s).unwrap();
        let bound = delta_power(&y, &s).unwrap();
        prop_assert!(modulus <= bound * (1.0 + 1e-12), "{modulus} > {bound}");
        prop_assert!((complex_power_p(&z, &s).unwrap().norm() / modulus - 1.0).abs() < 1e-10);
    }

    #[test]
    fn shift_round_trips(entries in prop::collection::vec(-5.0f64..5.0, 1..=3)) {
        let n = entries.len();
        let plain = MultiIndex::plain(entries.clone());
        let shifted = plain.shift().unwrap();
        prop_assert_eq!(shifted.convention(), Convention::Shifted);
        let offset = (n as f64 - 2.0) / 2.0;
        for (j, (got, e)) in shifted.entries().iter().zip(&entries).enumerate() {
            let expected = if j + 1 < n { e + offset } else { *e };
            prop_assert!((got - expected).abs() < 1e-15);
        }
        let back = shifted.unshift().unwrap();
        for (a, b) in back.entries().iter().zip(&entries) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}

#[test]
fn outside_points_are_rejected() {
    // D = 1 - 2²/1 < 0
    assert!(!is_in_cone(&[1.0, 1.0, 2.0]));
    assert!(ConePoint::new(vec![1.0, 1.0, 2.0]).is_err());
    assert!(ConePoint::new(vec![-1.0]).is_err());
}
