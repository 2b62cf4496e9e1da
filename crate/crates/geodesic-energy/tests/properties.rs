//! Randomized invariants: projection laws, interpolation consistency,
//! refinement invariance, Cauchy-Schwarz, and rule coincidence on constant
//! metrics.

use nalgebra::DVector;
use proptest::prelude::*;

use geodesic_energy::curve::PointSequence;
use geodesic_energy::energy::{energy_left, energy_trapezoidal};
use geodesic_energy::metric::MetricField;
use geodesic_energy::quad::REFERENCE_ORDER;
use geodesic_energy::sets::EndpointSet;

fn coord() -> impl Strategy<Value = f64> {
    -8.0f64..8.0
}

fn point2() -> impl Strategy<Value = DVector<f64>> {
    (coord(), coord()).prop_map(|(a, b)| DVector::from_vec(vec![a, b]))
}

fn sequence2(max_segments: usize) -> impl Strategy<Value = PointSequence> {
    prop::collection::vec(point2(), 2..=max_segments + 1)
        .prop_map(|pts| PointSequence::new(pts).unwrap())
}

fn any_set() -> impl Strategy<Value = EndpointSet> {
    prop_oneof![
        point2().prop_map(|p| EndpointSet::point(p).unwrap()),
        (point2(), 0.1f64..4.0).prop_map(|(c, r)| EndpointSet::ball(c, r).unwrap()),
        (point2(), 0.1f64..3.0, 0.1f64..3.0).prop_map(|(lo, w, h)| {
            let hi = DVector::from_vec(vec![lo[0] + w, lo[1] + h]);
            EndpointSet::bounding_box(lo, hi).unwrap()
        }),
        (point2(), -4.0f64..4.0).prop_filter_map("nonzero normal", |(n, o)| {
            (n.norm() > 1e-6).then(|| EndpointSet::half_space(n, o).unwrap())
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn projection_is_idempotent_and_lands_inside(set in any_set(), x in point2()) {
        let p = set.project(&x);
        prop_assert!(set.contains(&p));
        let pp = set.project(&p);
        prop_assert!((pp - &p).amax() <= 1e-12);
    }

    #[test]
    fn projection_fixes_exactly_the_members(set in any_set(), x in point2()) {
        let p = set.project(&x);
        if set.contains(&x) {
            prop_assert!((p - &x).amax() <= 1e-9);
        } else {
            prop_assert!((p - &x).amax() > 0.0);
        }
    }

    #[test]
    fn projection_is_nonexpansive(set in any_set(), x in point2(), y in point2()) {
        let px = set.project(&x);
        let py = set.project(&y);
        prop_assert!((px - py).norm() <= (x - y).norm() + 1e-12);
    }

    #[test]
    fn interpolant_matches_stored_points_on_the_grid(seq in sequence2(12)) {
        let c = seq.interpolant();
        let n = seq.n_segments();
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let p = c.evaluate(t).unwrap();
            prop_assert!((p - seq.point(k)).amax() <= 1e-12 * (1.0 + seq.point(k).amax()));
        }
    }

    #[test]
    fn refinement_preserves_the_interpolant_and_its_energy(seq in sequence2(10), t in 0.0f64..=1.0) {
        let refined = seq.refine();
        let a = seq.interpolant().evaluate(t).unwrap();
        let b = refined.interpolant().evaluate(t).unwrap();
        prop_assert!((a - b).amax() <= 1e-10);

        // Randomly drawn segments can span several metric periods, so use a
        // saturating order instead of the study default.
        let m = MetricField::conformal_cos();
        let e0 = seq.interpolant().continuous_energy(&m, 2 * REFERENCE_ORDER).unwrap();
        let e1 = refined.interpolant().continuous_energy(&m, 2 * REFERENCE_ORDER).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-10 * e0.abs().max(1.0));
    }

    #[test]
    fn length_squared_never_exceeds_energy(seq in sequence2(16)) {
        let m = MetricField::conformal_cos();
        let e = seq.interpolant().continuous_energy(&m, 2 * REFERENCE_ORDER).unwrap();
        let l = seq.interpolant().continuous_length(&m, 2 * REFERENCE_ORDER).unwrap();
        prop_assert!(l * l <= e * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn rules_coincide_on_constant_metrics(seq in sequence2(16)) {
        let m = MetricField::euclidean(2);
        let tra = energy_trapezoidal(&m, &seq).unwrap();
        let left = energy_left(&m, &seq).unwrap();
        prop_assert_eq!(tra, left);
    }

    #[test]
    fn curve_json_round_trip_is_identity(seq in sequence2(10)) {
        let back = PointSequence::from_json(&seq.to_json()).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn quadratic_form_is_positive_off_zero(x in point2(), u in point2()) {
        prop_assume!(u.norm() > 0.0);
        let m = MetricField::conformal_cos();
        let q = m.quadratic_form(&x, &u).unwrap();
        prop_assert!(q > 0.0);
        // declared eigenvalue bounds
        prop_assert!(q >= m.c1() * u.norm_squared() * (1.0 - 1e-12));
        prop_assert!(q <= m.c2() * u.norm_squared() * (1.0 + 1e-12));
    }
}
