use std::f64::consts::PI;

use proptest::prelude::*;
use sl2heat::distance::{distance_between_cyl, distance_squared};
use sl2heat::group::{
    cyl_to_matrix, gamma2_radial, gamma_radial, matrix_to_cyl, CylCoord, GroupElement, RadialDerivs, RadialFunction,
};
use sl2heat::kernel::{ln_p_any_z, Normalization, QuadSpec};

fn poly(c: [f64; 6]) -> RadialFunction<'static> {
    // c0 + c1 r² + c2 z + c3 z² + c4 r² z + c5 cosh r
    RadialFunction::with_derivatives(
        move |r, z| c[0] + c[1] * r * r + c[2] * z + c[3] * z * z + c[4] * r * r * z + c[5] * r.cosh(),
        move |r, z| RadialDerivs {
            f: c[0] + c[1] * r * r + c[2] * z + c[3] * z * z + c[4] * r * r * z + c[5] * r.cosh(),
            f_r: 2.0 * c[1] * r + 2.0 * c[4] * r * z + c[5] * r.sinh(),
            f_z: c[2] + 2.0 * c[3] * z + c[4] * r * r,
            f_rr: 2.0 * c[1] + 2.0 * c[4] * z + c[5] * r.cosh(),
            f_zz: 2.0 * c[3],
            f_rz: 2.0 * c[4] * r,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma2_and_gamma_are_nonnegative(
        c in prop::array::uniform6(-2.0..2.0f64),
        r in 0.01..4.0f64,
        z in -PI..PI,
    ) {
        let f = poly(c);
        prop_assert!(gamma2_radial(&f, r, z).unwrap() >= 0.0);
        prop_assert!(gamma_radial(&f, r, z) >= 0.0);
    }

    #[test]
    fn chart_round_trip(r in 0.0..5.0f64, theta in 0.0..6.2f64, z in -3.1..3.1f64) {
        let c = CylCoord::new(r, theta, z).unwrap();
        let g = cyl_to_matrix(c);
        prop_assert!((g.det() - 1.0).abs() < 1e-9 * g.a11.abs().max(1.0).powi(2));
        let back = matrix_to_cyl(&g).unwrap();
        prop_assert!((back.r - r).abs() < 1e-9 * r.cosh());
        prop_assert!((back.z - z).abs() < 1e-9 * r.cosh());
    }

    #[test]
    fn distance_is_even_in_z_and_above_euclid(r in 0.0..3.0f64, z in 0.0..PI) {
        let a = distance_squared(r, z).unwrap().d2;
        let b = distance_squared(r, -z).unwrap().d2;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(a + 1e-12 >= r * r);
    }

    #[test]
    fn distance_is_left_invariant(
        r1 in 0.0..1.5f64, t1 in 0.0..6.0f64, z1 in -1.0..1.0f64,
        r2 in 0.0..1.5f64, t2 in 0.0..6.0f64, z2 in -1.0..1.0f64,
    ) {
        let a = CylCoord::new(r1, t1, z1).unwrap();
        let b = CylCoord::new(r2, t2, z2).unwrap();
        let (ga, gb) = (cyl_to_matrix(a), cyl_to_matrix(b));
        let h = GroupElement::exp_horizontal(0.3, -0.2);
        let shifted = sl2heat::distance::distance_between(&h.mul(&ga), &h.mul(&gb));
        let plain = distance_between_cyl(a, b);
        if let (Ok(s), Ok(p)) = (shifted, plain) {
            prop_assert!((s.d2 - p.d2).abs() <= 1e-6 * p.d2.max(1e-3));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_even_in_z_and_periodic_for_haar(t in 0.2..1.5f64, r in 0.05..2.0f64, z in 0.0..PI) {
        let q = QuadSpec::default();
        for norm in [Normalization::Published, Normalization::Haar] {
            let a = ln_p_any_z(t, r, z, &q, norm).unwrap().0;
            let b = ln_p_any_z(t, r, -z, &q, norm).unwrap().0;
            prop_assert!((a - b).abs() < 1e-9);
        }
        let a = ln_p_any_z(t, r, z, &q, Normalization::Haar).unwrap().0;
        let b = ln_p_any_z(t, r, z - 2.0 * PI, &q, Normalization::Haar).unwrap().0;
        prop_assert!((a - b).abs() < 1e-9);
    }
}
