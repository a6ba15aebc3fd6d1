//! Elementary special functions used by the kernel and the distance solver.
//!
//! Everything is parametrised by `delta = x - 1` instead of `x`. The kernel
//! evaluates these functions at `x = cosh r cosh y`, and `x - 1` can be
//! formed without cancellation as `2 sinh²(r/2) cosh y + 2 sinh²(y/2)`.
//!
//! Two functions matter:
//!
//! * `v(x) = arccosh(x)²`, analytic on `C \ (-inf, -1]` and equal to
//!   `-arccos(x)²` on `(-1, 1)`;
//! * `R(x) = arccosh(x) / sqrt(x² - 1) = v'(x) / 2`, equal to
//!   `arccos(x) / sqrt(1 - x²)` on `(-1, 1)` and to 1 at `x = 1`.
//!
//! Both have a power series in `delta` with radius 2. Its coefficients follow
//! from the ODE `(x² - 1) v'' + x v' = 2`.

use num_complex::Complex64;

const N_SERIES: usize = 26;

/// Below this |delta| the power series is used.
const SERIES_RADIUS: f64 = 0.25;

const fn acosh_sq_coeffs() -> [f64; N_SERIES] {
    let mut a = [0.0; N_SERIES];
    a[1] = 2.0;
    let mut m = 1;
    while m + 1 < N_SERIES {
        let mf = m as f64;
        a[m + 1] = -mf * mf * a[m] / ((mf + 1.0) * (2.0 * mf + 1.0));
        m += 1;
    }
    a
}

/// Taylor coefficients of `arccosh(1 + delta)²` in `delta`.
const A: [f64; N_SERIES] = acosh_sq_coeffs();

const fn ratio_coeffs() -> [f64; N_SERIES - 1] {
    let mut c = [0.0; N_SERIES - 1];
    let mut k = 0;
    while k + 1 < N_SERIES {
        c[k] = (k as f64 + 1.0) * A[k + 1] / 2.0;
        k += 1;
    }
    c
}

/// Taylor coefficients of `R(1 + delta)`.
const C: [f64; N_SERIES - 1] = ratio_coeffs();

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_c(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// `R(1 + delta)` for real `delta > -2`.
pub fn arch_ratio_delta(delta: f64) -> f64 {
    if delta.abs() < SERIES_RADIUS {
        return horner(&C, delta);
    }
    let x = 1.0 + delta;
    if delta > 0.0 {
        let s = (delta * (delta + 2.0)).sqrt();
        (delta + s).ln_1p() / s
    } else {
        let s = (-delta * (delta + 2.0)).sqrt();
        x.acos() / s
    }
}

/// `arccosh(1 + delta)²` for real `delta > -2` (negative for `delta < 0`).
pub fn acosh_sq_delta(delta: f64) -> f64 {
    if delta.abs() < SERIES_RADIUS {
        return delta * horner(&A[1..], delta);
    }
    if delta > 0.0 {
        let u = (delta + (delta * (delta + 2.0)).sqrt()).ln_1p();
        u * u
    } else {
        let w = (1.0 + delta).acos();
        -w * w
    }
}

/// `dR/dx` at `x = 1 + delta`.
pub fn arch_ratio_deriv_delta(delta: f64) -> f64 {
    if delta.abs() < SERIES_RADIUS {
        let deriv: Vec<f64> = C
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        return horner(&deriv, delta);
    }
    let x = 1.0 + delta;
    (1.0 - x * arch_ratio_delta(delta)) / (delta * (delta + 2.0))
}

/// `(x² - 1) / (x R(x) - 1)` at `x = 1 + delta`; positive for `x > -1`,
/// equal to 3 at `x = 1`.
pub fn saddle_ratio_delta(delta: f64) -> f64 {
    if delta.abs() < SERIES_RADIUS {
        // x R - 1 = sum_{k>=1} (c_k + c_{k-1}) delta^k
        let d: Vec<f64> = (1..C.len()).map(|k| C[k] + C[k - 1]).collect();
        return (2.0 + delta) / horner(&d, delta);
    }
    let x = 1.0 + delta;
    delta * (delta + 2.0) / (x * arch_ratio_delta(delta) - 1.0)
}

/// `(arccosh(x)², R(x))` at complex `x = 1 + delta`, analytic off `(-inf, -1]`.
pub fn acosh_sq_and_ratio(delta: Complex64) -> (Complex64, Complex64) {
    if delta.norm() < SERIES_RADIUS {
        let v = delta * horner_c(&A[1..], delta);
        let r = horner_c(&C, delta);
        return (v, r);
    }
    let x = delta + 1.0;
    let s = delta.sqrt() * (delta + 2.0).sqrt();
    let u = (x + s).ln();
    (u * u, u / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_closed_form_at_the_switch() {
        for &d in &[-0.2499, -0.1, 0.1, 0.2499] {
            let x: f64 = 1.0 + d;
            let closed = if d > 0.0 {
                x.acosh() / (x * x - 1.0).sqrt()
            } else {
                x.acos() / (1.0 - x * x).sqrt()
            };
            assert!((arch_ratio_delta(d) - closed).abs() < 1e-14, "{d}");
            let v = if d > 0.0 { x.acosh().powi(2) } else { -x.acos().powi(2) };
            assert!((acosh_sq_delta(d) - v).abs() < 1e-14, "{d}");
        }
    }

    #[test]
    fn ratio_value_at_one_and_slope() {
        assert_eq!(arch_ratio_delta(0.0), 1.0);
        assert!((arch_ratio_deriv_delta(0.0) + 1.0 / 3.0).abs() < 1e-15);
        assert!((saddle_ratio_delta(0.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &d in &[-1.5f64, -0.7, -0.2, -1e-3, 0.0, 0.1, 0.3, 2.0, 40.0] {
            let h = 1e-5 * (1.0 + d.abs());
            let fd = (arch_ratio_delta(d + h) - arch_ratio_delta(d - h)) / (2.0 * h);
            let an = arch_ratio_deriv_delta(d);
            assert!((fd - an).abs() < 1e-7 * (1.0 + an.abs()), "{d}: {fd} vs {an}");
        }
    }

    #[test]
    fn complex_branch_agrees_with_real_on_both_sides() {
        for &d in &[-1.9, -1.2, -0.6, -0.1, 0.05, 0.7, 3.0] {
            let (v, r) = acosh_sq_and_ratio(Complex64::new(d, 0.0));
            assert!((v.re - acosh_sq_delta(d)).abs() < 1e-13, "{d}");
            assert!(v.im.abs() < 1e-13);
            assert!((r.re - arch_ratio_delta(d)).abs() < 1e-13, "{d}");
            // just above and below the real axis
            for eps in [1e-9, -1e-9] {
                let (v2, _) = acosh_sq_and_ratio(Complex64::new(d, eps));
                assert!((v2.re - v.re).abs() < 1e-7, "{d} {eps}");
            }
        }
    }

    #[test]
    fn complex_series_continuous_at_switch() {
        let z = Complex64::from_polar(SERIES_RADIUS, 1.1);
        let a = acosh_sq_and_ratio(z * (1.0 - 1e-12));
        let b = acosh_sq_and_ratio(z * (1.0 + 1e-12));
        // the two points differ by ~5e-13, so agreement to ~1e-12 is all one can ask
        assert!((a.0 - b.0).norm() < 3e-12);
        assert!((a.1 - b.1).norm() < 3e-12);
    }
}
