use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sl2heat::inequalities::*;
use sl2heat::kernel::{p_axis, Normalization, QuadSpec};

#[test]
fn constant_a_orders_and_monotonicity() {
    let t: f64 = 1e-4;
    assert!((constant_a(t) * t.powi(3) * 512.0 - 1.0).abs() < 1e-3);
    // 512 t² e^{2t} A(t) = 1 + 1/t; e^{2t} would overflow on its own
    let t: f64 = 200.0;
    let l = constant_a(t).ln() + 2.0 * t.ln() + 2.0 * t + 512f64.ln();
    assert!((l - (1.0 + 1.0 / t).ln()).abs() < 1e-10, "{l}");
    let mut prev = f64::INFINITY;
    for k in 0..=1000 {
        let t = 0.01 + (10.0 - 0.01) * k as f64 / 1000.0;
        let a = constant_a(t);
        assert!(a < prev, "A not decreasing at t={t}");
        prev = a;
    }
}

#[test]
fn liyau_constants() {
    let p = LiYauParams::new(3.0).unwrap();
    assert!((constant_b(1.0, p) - 112.0 / 3.0).abs() < 1e-12);
    assert!((constant_a_liyau(1.0, p) - 25.0 / 6.0).abs() < 1e-12);
    let t = 1e-6;
    assert!((constant_b(t, p) * t - 64.0 / 4.0).abs() < 1e-3);
    assert!(LiYauParams::new(1.5).is_err());
}

#[test]
fn liyau_near_the_axis_and_weakened_form() {
    let q = QuadSpec::precise();
    let p = LiYauParams::new(3.0).unwrap();
    for t in [0.25, 1.0] {
        let reps = liyau_check(t, 0.05, &[(0.2, 0.0), (0.2, 1.5)], p, &q, Normalization::default()).unwrap();
        for r in reps {
            assert!(r.pass && r.slack.is_finite(), "{r:?}");
            assert!(r.gamma_only_slack >= r.slack);
            assert_ne!(r.verdict, Verdict::Fail);
        }
    }
    assert!(liyau_check(0.5, 0.05, &[(0.0, 0.0)], p, &q, Normalization::default()).is_err());
}

fn gradient_grid() -> Vec<(f64, f64)> {
    (0..8)
        .flat_map(|i| (0..8).map(move |j| (0.1 + 2.9 * i as f64 / 7.0, -3.0 + 6.0 * j as f64 / 7.0)))
        .collect()
}

#[test]
fn gradient_bound_constant_is_stable() {
    let q = QuadSpec::default();
    let grid = gradient_grid();
    let c: Vec<f64> = [0.25, 0.5, 0.9]
        .iter()
        .map(|&t| gradient_bound_check(t, &grid, &q, Normalization::default()).unwrap().c_hat)
        .collect();
    let (lo, hi) = c.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(lo > 0.0 && hi.is_finite());
    assert!(hi / lo - 1.0 <= 0.2, "{c:?}");

    let large = gradient_bound_check(3.0, &grid, &q, Normalization::default()).unwrap();
    assert_eq!(large.regime, TimeRegime::Large);
    assert!(large.c_hat.is_finite() && large.c_hat > 0.0);
}

#[test]
fn gradient_at_z_zero_is_purely_radial() {
    let q = QuadSpec::default();
    let rep = gradient_bound_check(0.5, &[(1.0, 0.0)], &q, Normalization::default()).unwrap();
    let p = rep.points[0];
    assert!(p.ratio.is_finite() && p.ratio > 0.0);
    let (_, lr, lz) = sl2heat::diff::log_gradient(0.5, 1.0, 0.0, &q, Normalization::default()).unwrap();
    assert!(lz.abs() < 1e-8 * lr.abs());
    assert!((p.sqrt_gamma - lr.abs()).abs() < 1e-8 * lr.abs());
}

#[test]
fn fisher_information_below_liyau_constant_at_large_time() {
    let q = QuadSpec::default();
    for (t, r_max) in [(3.0, 30.0), (5.0, 40.0)] {
        let c = constant_c(t, r_max, &q, Normalization::default()).unwrap();
        let b = constant_b(t, LiYauParams::large_time(t).unwrap());
        assert!(c > 0.0 && c <= b, "t={t}: C={c}, B={b}");
    }
}

/// Stratified sample graded towards the identity, where the fitted sups are attained.
fn harnack_sample(seed: u64) -> Vec<PointPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let re = [0.0, 0.01, 0.03, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0];
    let ze = [-2.0, -1.0, -0.5, -0.2, -0.05, 0.0, 0.05, 0.2, 0.5, 1.0, 2.0];
    let mut pts = Vec::new();
    for r in re.windows(2) {
        for z in ze.windows(2) {
            pts.push((rng.random_range(r[0]..r[1]), rng.random_range(z[0]..z[1])));
        }
    }
    let mut pairs: Vec<PointPair> = pts.iter().map(|&g| (g, g)).collect();
    for (i, &a) in pts.iter().enumerate() {
        for (j, &b) in pts.iter().enumerate() {
            if i != j {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

#[test]
fn harnack_constants_are_stable_across_samples() {
    let q = QuadSpec::default();
    for (t1, t2) in [(0.25, 0.5), (3.0, 4.0)] {
        let a = harnack_spot_check(t1, t2, &harnack_sample(1), &q, Normalization::default()).unwrap();
        let b = harnack_spot_check(t1, t2, &harnack_sample(2), &q, Normalization::default()).unwrap();
        assert!(a.a1 > 0.0 && a.a2 > 0.0);
        assert!((a.a1 / b.a1 - 1.0).abs() <= 0.25, "{} {}", a.a1, b.a1);
        assert!((a.a2 / b.a2 - 1.0).abs() <= 0.25, "{} {}", a.a2, b.a2);
    }
}

#[test]
fn harnack_on_the_axis_uses_closed_forms() {
    let q = QuadSpec::default();
    let (t1, t2) = (0.25, 0.5);
    let pairs: Vec<PointPair> = [0.0, 0.5, 1.5].iter().map(|&z| ((0.0, z), (0.0, z))).collect();
    let rep = harnack_spot_check(t1, t2, &pairs, &q, Normalization::default()).unwrap();
    for s in &rep.samples {
        let exact = (p_axis(t1, s.g1.1).unwrap() / p_axis(t2, s.g1.1).unwrap()).ln();
        assert!((s.ln_ratio - exact).abs() < 1e-12, "{} {exact}", s.ln_ratio);
        // with δ = 0 the bound is (t2/t1)^A1 and A1 is the smallest exponent that works
        assert!(s.ln_ratio <= rep.a1 * (t2 / t1).ln() + 1e-12);
    }
    assert!(harnack_spot_check(0.5, 0.25, &pairs, &q, Normalization::default()).is_err());
}
