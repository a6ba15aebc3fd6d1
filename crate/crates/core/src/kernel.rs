//! The hyperbolic kernel `s_t` and the subelliptic heat kernel `p_t(r, z)`.
//!
//! `p_t(r,z) = ½ (4πt)^{-1/2} ∫ e^{(y−iz)²/4t} s_t(cosh r cosh y) dy`.
//!
//! Integrating along the real line is hopeless for small `t`: the integrand
//! has size `e^{z²/4t}` relative to the result and oscillates. Both the
//! Gaussian and `s_t` extend holomorphically to `|Im y| < arccos(−1/cosh r)`,
//! so the line is shifted to `Im y = θ(r, z)`, the saddle of the exponent
//! (the same θ as in the distance formula). On the shifted line the
//! integrand peaks at `s = 0` with size `e^{−d²/4t}`, and the result is
//! accumulated relative to that scale, so `ln p` stays accurate long after
//! `p` itself has underflowed.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distance::{distance_squared, phi_and_slope, solve_in_bracket, theta_limit};
use crate::error::{Error, Result};
use crate::quad::{integrate, AdaptiveOptions};
use crate::special::{acosh_sq_and_ratio, acosh_sq_delta, arch_ratio_delta};

/// Below this radius `p_integral` uses the closed form on the axis.
pub const AXIS_DELEGATE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Truncation of the `y`-integral; chosen from the integrand envelope when `None`.
    pub max_halfwidth: Option<f64>,
    pub max_levels: u32,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_halfwidth: None,
            max_levels: 20,
        }
    }
}

impl QuadSpec {
    /// Tighter tolerances, for values that get differentiated numerically.
    pub fn precise() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_halfwidth: None,
            max_levels: 30,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(1..=40).contains(&self.max_levels) {
            return Err(Error::InvalidConfig(format!(
                "max_levels = {} outside [1, 40]",
                self.max_levels
            )));
        }
        if let Some(h) = self.max_halfwidth {
            if !(h > 0.0) {
                return Err(Error::InvalidConfig("max_halfwidth must be positive".into()));
            }
        }
        Ok(())
    }

    fn adaptive(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_levels: self.max_levels,
            ..AdaptiveOptions::default()
        }
    }
}

/// Which constant multiplies the kernel.
///
/// `Published` is the integral representation exactly as written. It has total
/// mass ½ on the group and is twice too small on the diagonal identity
/// `∫p_t² dμ = p_{2t}(0)`.
///
/// `Haar` is `2 Σ_k q_t(r, z + 2πk)`, with `q_t` the published formula read on
/// the universal cover (unbounded `z`): a probability density for μ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Published,
    Haar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    /// Density with respect to μ.
    pub value: f64,
    pub err_estimate: f64,
    pub t: f64,
    pub r: f64,
    pub z: f64,
    /// `ln value`, meaningful even when `value` underflows.
    pub ln_value: f64,
}

/// `s_t(cosh ρ) = e^{−t} (4πt)^{−3/2} (ρ / sinh ρ) e^{−ρ²/4t}`.
pub fn s_kernel(t: f64, rho: f64) -> f64 {
    let ratio = if rho < 1e-8 { 1.0 } else { rho / rho.sinh() };
    (-t).exp() * (4.0 * PI * t).powf(-1.5) * ratio * (-rho * rho / (4.0 * t)).exp()
}

/// `s_t(1 + δ)` for `δ ≥ 0`, avoiding the `arccosh` near 1.
pub fn s_kernel_delta(t: f64, delta: f64) -> f64 {
    (-t).exp()
        * (4.0 * PI * t).powf(-1.5)
        * arch_ratio_delta(delta)
        * (-acosh_sq_delta(delta) / (4.0 * t)).exp()
}

/// `arccosh(x)/√(x²−1)`, continued by `arccos(x)/√(1−x²)` on `(−1, 1)`.
pub fn arch_ratio(x: f64) -> Result<f64> {
    if !(x > -1.0) {
        return Err(crate::error::domain(format!("arch_ratio needs x > -1, got {x}")));
    }
    Ok(arch_ratio_delta(x - 1.0))
}

/// Closed form on the axis `r = 0`, for `|z| ≤ π`.
pub fn p_axis(t: f64, z: f64) -> Result<f64> {
    check_t(t)?;
    if !(z.abs() <= PI) {
        return Err(crate::error::domain(format!("p_axis needs |z| <= π, got {z}")));
    }
    Ok(ln_p_axis_cover(t, z).exp())
}

/// `ln` of `e^{−t}/(16t²) e^{−(2π|z|+z²)/4t} / (1 + e^{−π|z|/2t})²`, for any real `z`.
pub fn ln_p_axis_cover(t: f64, z: f64) -> f64 {
    let za = z.abs();
    -t - (16.0 * t * t).ln() - (2.0 * PI * za + za * za) / (4.0 * t)
        - 2.0 * (-PI * za / (2.0 * t)).exp().ln_1p()
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(crate::error::domain(format!("t = {t} must be positive")));
    }
    Ok(())
}

/// `p_t(r, z)` from the integral representation (published normalization).
pub fn p_integral(t: f64, r: f64, z: f64, q: &QuadSpec) -> Result<KernelValue> {
    p_normalized(t, r, z, q, Normalization::Published)
}

/// `p_t(r, z)` under the chosen normalization.
pub fn p_normalized(t: f64, r: f64, z: f64, q: &QuadSpec, norm: Normalization) -> Result<KernelValue> {
    check_t(t)?;
    q.validate()?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(crate::error::domain(format!("r = {r} must be >= 0")));
    }
    if !(z.abs() <= PI) {
        return Err(crate::error::domain(format!("z = {z} outside [-π, π]")));
    }
    let (ln_v, ln_err) = ln_p_any_z(t, r, z, q, norm)?;
    Ok(KernelValue {
        value: ln_v.exp(),
        err_estimate: ln_err.exp(),
        t,
        r,
        z,
        ln_value: ln_v,
    })
}

/// `(ln p, ln err)` without the chart check on `z`.
///
/// The published formula read at `|z| > π` is the kernel on the universal
/// cover; the `Haar` sum is 2π-periodic. Both are smooth in `z`, which is
/// what finite-difference stencils near `|z| = π` need.
pub fn ln_p_any_z(t: f64, r: f64, z: f64, q: &QuadSpec, norm: Normalization) -> Result<(f64, f64)> {
    match norm {
        Normalization::Published => p_cover_ln(t, r, z, q),
        Normalization::Haar => {
            let z = (z + PI).rem_euclid(2.0 * PI) - PI;
            let (ln0, lerr0) = p_cover_ln(t, r, z, q)?;
            // terms relative to the k = 0 one; images decay like e^{−π|z+2πk|/2t}
            let mut sum = 1.0;
            let mut err = (lerr0 - ln0).exp();
            // the line exponent at s = 0 bounds each image up to a modest factor,
            // so images far below the k = 0 term are dropped without integrating
            let e0 = |zk: f64| -> Result<f64> {
                Ok(if r < AXIS_DELEGATE { 0.0 } else { ContourIntegrand::new(t, r, zk.abs())?.e0 })
            };
            let e00 = e0(z)?;
            for dir in [1.0, -1.0] {
                for k in 1.. {
                    let zk = z + dir * 2.0 * PI * k as f64;
                    if r >= AXIS_DELEGATE && e0(zk)? - e00 < -50.0 {
                        break;
                    }
                    let (lk, lek) = p_cover_ln(t, r, zk, q)?;
                    let rel = (lk - ln0).exp();
                    sum += rel;
                    err += (lek - ln0).exp();
                    if rel < 1e-18 * sum {
                        break;
                    }
                }
            }
            let ln2 = std::f64::consts::LN_2;
            Ok((ln2 + ln0 + sum.ln(), ln2 + ln0 + err.ln()))
        }
    }
}

/// `(ln q, ln err)` for the published formula at any real `z` (universal cover).
pub fn p_cover_ln(t: f64, r: f64, z: f64, q: &QuadSpec) -> Result<(f64, f64)> {
    if r < AXIS_DELEGATE {
        let l = ln_p_axis_cover(t, z);
        return Ok((l, l + (4.0 * f64::EPSILON).ln()));
    }
    let c = ContourIntegrand::new(t, r, z.abs())?;
    let s_max = match q.max_halfwidth {
        Some(h) => h,
        None => c.truncation(q.abs_tol),
    };
    let panels = ((s_max * c.za / (2.0 * PI * t)).ceil() as usize + 8).min(4000);
    let breaks: Vec<f64> = (0..=panels).map(|i| s_max * i as f64 / panels as f64).collect();
    let res = integrate(|s| c.eval(s), &breaks, &q.adaptive())?;
    let ln_pref = -t - 2.0 * (4.0 * PI * t).ln() + c.e0;
    let value = res.value.max(f64::MIN_POSITIVE);
    Ok((ln_pref + value.ln(), ln_pref + res.error.max(f64::MIN_POSITIVE).ln()))
}

/// The integrand `Re[exp(E(y) − E0) R(x)]` along `y = s + iσ`, `s ≥ 0`, where
/// `E = ((y − iz)² − arccosh²(x))/4t` and `x = cosh r cosh y`.
struct ContourIntegrand {
    t: f64,
    za: f64,
    sigma: f64,
    /// `2 sinh²(r/2)`
    a: f64,
    /// `ln cosh r`
    lc: f64,
    e0: f64,
}

impl ContourIntegrand {
    fn new(t: f64, r: f64, za: f64) -> Result<Self> {
        let sigma = if za == 0.0 {
            0.0
        } else {
            // keep the line a distance m from the branch point at Im y = −W;
            // 2t/|z| bounds the growth of the integrand on the line by e^1
            let w = theta_limit(r);
            let m = (0.5 * w).min(2.0 * t / za);
            let floor = -(w - m);
            if phi_and_slope(r, floor).0 - floor + za >= 0.0 {
                floor
            } else {
                solve_in_bracket(r, za, floor, 0.0)?.theta
            }
        };
        let a = 2.0 * (0.5 * r).sinh().powi(2);
        let d0 = a * sigma.cos() - 2.0 * (0.5 * sigma).sin().powi(2);
        let e0 = (-(sigma - za).powi(2) - acosh_sq_delta(d0)) / (4.0 * t);
        Ok(Self {
            t,
            za,
            sigma,
            a,
            lc: r.cosh().ln(),
            e0,
        })
    }

    fn terms(&self, s: f64) -> (Complex64, Complex64) {
        let y = Complex64::new(s, self.sigma);
        let sh = (y * 0.5).sinh();
        let delta = y.cosh() * self.a + sh * sh * 2.0;
        let (v, ratio) = acosh_sq_and_ratio(delta);
        let w = Complex64::new(s, self.sigma - self.za);
        ((w * w - v) / (4.0 * self.t) - self.e0, ratio)
    }

    fn eval(&self, s: f64) -> f64 {
        let (e, ratio) = self.terms(s);
        (e.exp() * ratio).re
    }

    fn envelope(&self, s: f64) -> f64 {
        let (e, ratio) = self.terms(s);
        e.re.exp() * ratio.norm()
    }

    /// Half-width beyond which the envelope stays below `tol·1e-3`.
    fn truncation(&self, tol: f64) -> f64 {
        let lt = -tol.ln();
        // linear decay rate ln cosh r / 2t from the exponent, e^{−s} from R
        let from_exponent = if self.lc > 0.0 {
            (4.0 * self.t * lt) / (2.0 * self.lc)
        } else {
            f64::INFINITY
        };
        let mut s = from_exponent.min(lt + 5.0).max(1.0);
        let target = tol * 1e-3;
        for _ in 0..80 {
            if self.envelope(s) < target && self.envelope(1.5 * s) < target {
                return s;
            }
            s *= 1.5;
        }
        s
    }
}

/// `∫ F dμ = 2π ∬ F(r, z) sinh(2r)/2 dr dz` over `0 < r < r_max`, `|z| < π`,
/// for a radial `F` even in `z`.
///
/// Composite Gauss–Legendre on panels graded to the kernel's scales at time `t`:
/// `√t` in `r` and `t` in `z`, refined towards `z = 0` and `|z| = π`. The
/// `r`-range stops where `e^{−r²/4t + r}` drops below `e^{−60}`.
pub fn group_quadrature<F>(t: f64, r_max: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    let r_stop = r_max.min(2.0 * t + (4.0 * t * t + 240.0 * t).sqrt());
    let rho = t.sqrt();
    let mut rb = vec![0.0];
    for m in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0] {
        if m * rho < r_stop {
            rb.push(m * rho);
        }
    }
    let mut x = *rb.last().unwrap_or(&0.0);
    while x + 0.4 < r_stop {
        x += 0.4;
        rb.push(x);
    }
    rb.push(r_stop);
    let mut zb = vec![0.0, PI];
    let mut h = 0.25 * t;
    while h < 0.5 * PI {
        zb.push(h);
        zb.push(PI - h);
        h *= 2.0;
    }
    let mut x = 0.0;
    while x + 0.25 < PI {
        x += 0.25;
        zb.push(x);
    }
    zb.sort_by(f64::total_cmp);
    zb.dedup_by(|a, b| (*a - *b).abs() < 1e-3 * t.min(1.0));
    let rr = crate::quad::composite_rule(&rb, 10);
    let zz = crate::quad::composite_rule(&zb, 10);
    let rows: Vec<f64> = rr
        .par_iter()
        .map(|&(r, wr)| {
            let mut acc = 0.0;
            for &(z, wz) in &zz {
                acc += wz * f(r, z)?;
            }
            Ok(acc * wr * 0.5 * (2.0 * r).sinh())
        })
        .collect::<Result<_>>()?;
    // the factor 2 accounts for z < 0
    Ok(2.0 * 2.0 * PI * rows.iter().sum::<f64>())
}

/// True where `p_t(r, z)` is below `e^{−70}` times its peak, judged from the
/// Gaussian factor `e^{−d²/4t}` alone, which is far cheaper than the kernel.
pub fn negligible_at(t: f64, r: f64, z: f64) -> Result<bool> {
    Ok(distance_squared(r, z)?.d2 > 280.0 * t)
}

/// `∫ p_t dμ` over `r < r_max`.
pub fn total_mass(t: f64, r_max: f64, q: &QuadSpec, norm: Normalization) -> Result<f64> {
    group_quadrature(t, r_max, |r, z| {
        if negligible_at(t, r, z)? {
            return Ok(0.0);
        }
        Ok(ln_p_any_z(t, r, z, q, norm)?.0.exp())
    })
}

/// `∫ p_t² dμ` over `r < r_max`.
pub fn l2_norm_sq(t: f64, r_max: f64, q: &QuadSpec, norm: Normalization) -> Result<f64> {
    group_quadrature(t, r_max, |r, z| {
        if negligible_at(t, r, z)? {
            return Ok(0.0);
        }
        Ok((2.0 * ln_p_any_z(t, r, z, q, norm)?.0).exp())
    })
}

/// `½ ∬_{r,y>0} s_t(cosh r cosh y) f(r, y) sinh 2r dr dy` over the box `(0, r_max) × (0, y_max)`,
/// outside of which `f` must vanish.
pub fn delta2_expectation<F>(t: f64, f: F, r_max: f64, y_max: f64, q: &QuadSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    check_t(t)?;
    q.validate()?;
    if !(r_max > 0.0) || !(y_max > 0.0) {
        return Err(crate::error::domain("support box must have positive sides"));
    }
    // the mass sits within a few √t of the origin: resolve that scale first
    let scale = (8.0 * t).sqrt();
    let breaks = |m: f64| {
        let mut b = vec![0.0];
        let mut x = scale;
        while x < m {
            b.push(x);
            x *= 2.0;
        }
        b.push(m);
        b
    };
    let rb = breaks(r_max);
    let yb = breaks(y_max);
    let opts = q.adaptive();
    let failure = std::cell::RefCell::new(None);
    let outer = integrate(
        |r| {
            let a = 2.0 * (0.5 * r).sinh().powi(2);
            let inner = integrate(
                |y| {
                    let delta = a * y.cosh() + 2.0 * (0.5 * y).sinh().powi(2);
                    s_kernel_delta(t, delta) * f(r, y)
                },
                &yb,
                &opts,
            );
            match inner {
                Ok(v) => 0.5 * (2.0 * r).sinh() * v.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        &rb,
        &opts,
    );
    let outer = outer?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(outer.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::composite_rule;

    #[test]
    fn s_kernel_examples() {
        let v = s_kernel(1.0, 0.0);
        assert!((v - (-1f64).exp() / (4.0 * PI).powf(1.5)).abs() < 1e-18);
        assert!((v - 0.008_258_301).abs() < 1e-9);
        let e = (-0.5f64).exp() / (2.0 * PI).powf(1.5) / 1f64.sinh() * (-0.5f64).exp();
        assert!((s_kernel(0.5, 1.0) - e).abs() < 1e-16);
        let mut prev = s_kernel(1.0, 2f64.sqrt());
        for k in 1..50 {
            let cur = s_kernel(1.0, 2f64.sqrt() + 0.2 * k as f64);
            assert!(cur < prev);
            prev = cur;
        }
        assert!(prev < 1e-10);
        assert!((s_kernel_delta(0.7, 1.3f64.cosh() - 1.0) - s_kernel(0.7, 1.3)).abs() < 1e-16);
    }

    #[test]
    fn arch_ratio_examples() {
        assert_eq!(arch_ratio(1.0).unwrap(), 1.0);
        assert!((arch_ratio(2f64.cosh()).unwrap() - 2.0 / 2f64.sinh()).abs() < 1e-14);
        assert!((arch_ratio(2f64.cosh()).unwrap() - 0.551_441).abs() < 1e-6);
        assert!((arch_ratio(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(arch_ratio(-1.0).is_err());
        // smoothness across x = 1: one-sided second differences agree
        let h = 1e-3;
        let d2 = |x: f64| {
            (arch_ratio(x + h).unwrap() - 2.0 * arch_ratio(x).unwrap() + arch_ratio(x - h).unwrap())
                / (h * h)
        };
        assert!((d2(1.0 - 2.0 * h) - d2(1.0 + 2.0 * h)).abs() < 1e-2);
    }

    #[test]
    fn axis_examples() {
        assert!((p_axis(1.0, 0.0).unwrap() - (-1f64).exp() / 64.0).abs() < 1e-17);
        let e = (-0.5f64).exp() / 4.0 * (-1.5 * PI * PI).exp()
            / (1.0 + (-PI * PI).exp()).powi(2);
        assert!((p_axis(0.5, PI).unwrap() - e).abs() < 1e-15 * e);
        assert_eq!(p_axis(0.3, 1.1).unwrap(), p_axis(0.3, -1.1).unwrap());
        assert!(p_axis(1.0, 3.2).is_err());
    }

    #[test]
    fn integral_on_the_diagonal_and_axis() {
        let q = QuadSpec::default();
        let v = p_integral(1.0, 1e-7, 0.0, &q).unwrap();
        assert!((v.value - (-1f64).exp() / 64.0).abs() < 1e-8);
        let v = p_integral(0.8, 1e-7, 0.5, &q).unwrap();
        assert!((v.value - p_axis(0.8, 0.5).unwrap()).abs() < 1e-8);
    }

    /// The representation on the real line with a fixed Gauss–Legendre rule.
    fn real_line_oracle(t: f64, r: f64, z: f64, nodes: usize) -> f64 {
        let ymax = 40.0;
        let breaks: Vec<f64> = (0..=nodes / 20).map(|i| ymax * i as f64 / (nodes / 20) as f64).collect();
        let sum: f64 = composite_rule(&breaks, 20)
            .into_iter()
            .map(|(y, w)| {
                let rho = (r.cosh() * y.cosh()).acosh();
                let ratio = rho / rho.sinh();
                let gauss = ((y * y - z * z - rho * rho) / (4.0 * t)).exp();
                w * gauss * (y * z / (2.0 * t)).cos() * ratio
            })
            .sum();
        sum * (-t).exp() / (4.0 * PI * t).powi(2)
    }

    #[test]
    fn integral_matches_real_line_oracle() {
        let q = QuadSpec::default();
        let v = p_integral(0.5, 1.0, 0.7, &q).unwrap();
        let o = real_line_oracle(0.5, 1.0, 0.7, 20_000);
        assert!((v.value - o).abs() < 1e-8 * o, "{} {}", v.value, o);
        for &(t, r, z) in &[(1.0, 0.3, -2.0), (0.3, 2.0, 3.0), (2.0, 0.05, 1.0)] {
            let v = p_integral(t, r, z, &q).unwrap();
            let o = real_line_oracle(t, r, z, 20_000);
            assert!((v.value - o).abs() < 1e-7 * o, "{t} {r} {z}: {} {}", v.value, o);
        }
    }

    #[test]
    fn integral_is_even_in_z() {
        let q = QuadSpec::default();
        let a = p_integral(0.4, 0.9, 1.3, &q).unwrap().value;
        let b = p_integral(0.4, 0.9, -1.3, &q).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn log_value_survives_underflow() {
        let q = QuadSpec::default();
        let v = p_integral(0.001, 1.5, 2.0, &q).unwrap();
        let d2 = crate::distance::distance_squared(1.5, 2.0).unwrap().d2;
        assert!(v.ln_value.is_finite());
        // −4t ln p is close to d² at tiny t
        assert!((-4.0 * 0.001 * v.ln_value - d2).abs() < 0.05 * d2);
    }

    #[test]
    fn haar_normalization_on_axis() {
        let q = QuadSpec::default();
        let t = 0.5;
        let h = p_normalized(t, 0.0, 1.0, &q, Normalization::Haar).unwrap().value;
        let mut oracle = 0.0;
        for k in -5..=5 {
            oracle += 2.0 * ln_p_axis_cover(t, 1.0 + 2.0 * PI * k as f64).exp();
        }
        assert!((h - oracle).abs() < 1e-14 * oracle);
    }

    #[test]
    fn delta2_expectation_examples() {
        let q = QuadSpec::default();
        assert_eq!(delta2_expectation(0.1, |_, _| 0.0, 5.0, 5.0, &q).unwrap(), 0.0);
        // g(u) h(v) with g = e^{−(u−1)}, h = e^{−v}: the change of variables
        // u = cosh r cosh y, v = cosh r sinh y gives ∫ s_t(u) g(u) (1 − e^{−√(u²−1)}) du
        let t = 0.3;
        let f = |r: f64, y: f64| {
            let (u, v) = (r.cosh() * y.cosh(), r.cosh() * y.sinh());
            (-(u - 1.0)).exp() * (-v).exp()
        };
        let got = delta2_expectation(t, f, 12.0, 12.0, &q).unwrap();
        let one_d = integrate(
            |rho: f64| {
                let u = rho.cosh();
                s_kernel(t, rho) * (-(u - 1.0)).exp() * (1.0 - (-rho.sinh()).exp()) * rho.sinh()
            },
            &[0.0, 1.0, 3.0, 10.0],
            &AdaptiveOptions::default(),
        )
        .unwrap()
        .value;
        assert!((got - one_d).abs() < 1e-6, "{got} {one_d}");
    }

    #[test]
    fn delta2_expectation_concentrates_with_mass_one_over_four_pi() {
        // s_t is a density for (x² − 1)^{1/2} dx only up to the factor 1/(4π)
        let q = QuadSpec::default();
        let bump = |r: f64, y: f64| (-(r * r + y * y)).exp();
        let limit = 1.0 / (4.0 * PI);
        let gaps: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&t| (delta2_expectation(t, bump, 8.0, 8.0, &q).unwrap() - limit).abs())
            .collect();
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
        assert!(gaps[2] < 0.01 * limit, "{gaps:?}");
        let one = delta2_expectation(0.2, |_, _| 1.0, 30.0, 30.0, &q).unwrap();
        assert!((one - limit).abs() < 1e-7, "{one}");
    }

    #[test]
    fn mass_and_l2_of_both_normalizations() {
        let q = QuadSpec::default();
        let t = 0.5;
        let m = total_mass(t, 8.0, &q, Normalization::Published).unwrap();
        assert!((m - 0.5).abs() < 1e-4, "{m}");
        let m = total_mass(t, 8.0, &q, Normalization::Haar).unwrap();
        assert!((m - 1.0).abs() < 1e-6, "{m}");
        // ∫ p² dμ = p_{2t}(identity) holds for the Haar normalization
        let l2 = l2_norm_sq(t, 8.0, &q, Normalization::Haar).unwrap();
        let diag = p_normalized(2.0 * t, 0.0, 0.0, &q, Normalization::Haar).unwrap().value;
        assert!((l2 - diag).abs() < 1e-6 * diag, "{l2} {diag}");
    }
}
