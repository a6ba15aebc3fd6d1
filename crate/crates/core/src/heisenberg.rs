//! The Heisenberg group as the small-scale limit of SL(2,R): Gaveau's kernel,
//! the dilated vector fields, and the rescaled kernel `t² p_t(√t r, t z)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::{p_normalized, KernelValue, Normalization, QuadSpec};
use crate::quad::{integrate, AdaptiveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergPoint {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
}

/// Constant in front of Gaveau's integral.
///
/// `Gaveau` is `1/16π²`, which makes `h_t` a probability density for
/// `r dr dθ dz`. `Halved` is `1/32π²`, the constant for which the rescaled
/// published SL(2,R) kernel converges to `h_1` with ratio 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaveauConvention {
    #[default]
    Gaveau,
    Halved,
}

impl GaveauConvention {
    pub fn prefactor(&self) -> f64 {
        match self {
            GaveauConvention::Gaveau => 1.0 / (16.0 * PI * PI),
            GaveauConvention::Halved => 1.0 / (32.0 * PI * PI),
        }
    }
}

/// `λ / sinh(λt)` and `λ coth(λt)`, with their series at small `λt`.
fn weights(lambda: f64, t: f64) -> (f64, f64) {
    let x = lambda * t;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        ((1.0 - x2 / 6.0) / t, (1.0 + x2 / 3.0) / t)
    } else {
        (lambda / x.sinh(), lambda / x.tanh())
    }
}

/// `h_t(r, z) = c ∫ e^{iλz/2} (λ / sinh λt) e^{−(r²/4) λ coth λt} dλ`.
pub fn gaveau_kernel(t: f64, r: f64, z: f64, q: &QuadSpec, conv: GaveauConvention) -> Result<KernelValue> {
    if !(t > 0.0) || !(r >= 0.0) || !z.is_finite() {
        return Err(crate::error::domain(format!("gaveau_kernel at ({t}, {r}, {z})")));
    }
    q.validate()?;
    let a = 0.25 * r * r;
    let integrand = |l: f64| {
        let (w, c) = weights(l, t);
        (0.5 * l * z).cos() * w * (-a * c).exp()
    };
    // the integrand is bounded by 2λ e^{−λ(t + r²/4)}
    let rate = t + a;
    let target = q.abs_tol * 1e-3;
    let mut lmax = 10.0 / rate;
    while 2.0 * lmax * (-lmax * rate).exp() > target {
        lmax *= 1.5;
    }
    let panels = ((lmax * z.abs() / (4.0 * PI)).ceil() as usize + 8).min(4000);
    let breaks: Vec<f64> = (0..=panels).map(|i| lmax * i as f64 / panels as f64).collect();
    let opts = AdaptiveOptions {
        abs_tol: q.abs_tol,
        rel_tol: q.rel_tol,
        max_levels: q.max_levels,
        ..AdaptiveOptions::default()
    };
    let res = integrate(integrand, &breaks, &opts)?;
    let c = 2.0 * conv.prefactor();
    let value = c * res.value;
    Ok(KernelValue {
        value,
        err_estimate: c * res.error,
        t,
        r,
        z,
        ln_value: value.ln(),
    })
}

/// Coefficients of `L^c = (X^c)² + (Y^c)²` in cylindric coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilatedCoeffs {
    pub d_rr: f64,
    pub d_r: f64,
    pub d_thth: f64,
    pub d_zz: f64,
    /// Multiplies `∂z∂θ`.
    pub d_ztheta: f64,
}

/// Coefficients of the dilated sublaplacian at radius `r`, dilation `c ≥ 1`.
pub fn dilated_sublaplacian_coeffs(c: f64, r: f64) -> Result<DilatedCoeffs> {
    if !(c >= 1.0) || !(r > 0.0) {
        return Err(crate::error::domain(format!("dilation needs c >= 1, r > 0; got ({c}, {r})")));
    }
    let s = c.sqrt();
    let th = (r / s).tanh();
    let k = 1.0 / th - th;
    Ok(DilatedCoeffs {
        d_rr: 1.0,
        d_r: 2.0 / (s * (2.0 * r / s).tanh()),
        d_thth: k * k / c,
        d_zz: c * th * th,
        d_ztheta: 2.0 * (1.0 - th * th),
    })
}

/// Coefficients of the Heisenberg sublaplacian `X̃² + Ỹ²`, the `c → ∞` limit.
pub fn heisenberg_sublaplacian_coeffs(r: f64) -> DilatedCoeffs {
    DilatedCoeffs {
        d_rr: 1.0,
        d_r: 1.0 / r,
        d_thth: 1.0 / (r * r),
        d_zz: r * r,
        d_ztheta: 2.0,
    }
}

/// `(∂r, ∂θ, ∂z)` coefficients of `X^c` and `Y^c` at a point.
pub fn dilated_fields(c: f64, p: HeisenbergPoint) -> ([f64; 3], [f64; 3]) {
    let s = c.sqrt();
    let th = (p.r / s).tanh();
    let (sn, cs) = (p.theta + 2.0 * p.z / c).sin_cos();
    let a = s * th;
    let b = 1.0 / (s * th) - th / s;
    ([cs, -sn * b, -sn * a], [sn, cs * b, cs * a])
}

/// `(∂r, ∂θ, ∂z)` coefficients of `X̃` and `Ỹ`.
pub fn heisenberg_fields(p: HeisenbergPoint) -> ([f64; 3], [f64; 3]) {
    let (sn, cs) = p.theta.sin_cos();
    ([cs, -sn / p.r, -p.r * sn], [sn, cs / p.r, p.r * cs])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationRow {
    pub t: f64,
    /// `t² p_t(√t r, t z)`.
    pub scaled_value: f64,
    pub h1_value: f64,
    pub ratio: f64,
}

/// `t² p_t(√t r, t z)` against `h_1(r, z)` along a sequence of times.
pub fn dilation_limit_check(
    t_grid: &[f64],
    r: f64,
    z: f64,
    q: &QuadSpec,
    norm: Normalization,
    conv: GaveauConvention,
) -> Result<Vec<DilationRow>> {
    let h1 = gaveau_kernel(1.0, r, z, q, conv)?.value;
    t_grid
        .iter()
        .map(|&t| {
            let p = p_normalized(t, t.sqrt() * r, t * z, q, norm)?;
            let scaled = t * t * p.value;
            Ok(DilationRow {
                t,
                scaled_value: scaled,
                h1_value: h1,
                ratio: scaled / h1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::composite_rule;

    #[test]
    fn gaveau_at_origin() {
        let q = QuadSpec::default();
        // ∫₀^∞ u / sinh u du = π²/4 = 2 Σ 1/(2k+1)²
        let series: f64 = (0..200_000).map(|k| 2.0 / ((2 * k + 1) as f64).powi(2)).sum();
        let oracle = 2.0 * series / (16.0 * PI * PI);
        let v = gaveau_kernel(1.0, 0.0, 0.0, &q, GaveauConvention::Gaveau).unwrap().value;
        assert!((v - 1.0 / 32.0).abs() < 1e-10);
        assert!((v - oracle).abs() < 1e-5);
        let h = gaveau_kernel(1.0, 0.0, 0.0, &q, GaveauConvention::Halved).unwrap().value;
        assert!((h - 1.0 / 64.0).abs() < 1e-10);
    }

    #[test]
    fn gaveau_on_the_axis_is_sech_squared() {
        let q = QuadSpec::default();
        for z in [0.5, 1.0, -2.0, 6.0] {
            let v = gaveau_kernel(1.0, 0.0, z, &q, GaveauConvention::Gaveau).unwrap().value;
            let o = (PI * z / 4.0).cosh().powi(-2) / 32.0;
            assert!((v - o).abs() < 1e-10, "{z}: {v} {o}");
        }
    }

    #[test]
    fn gaveau_scaling() {
        let q = QuadSpec::precise();
        for &(t, r, z) in &[(0.3, 0.7, 0.4), (2.0, 1.5, -3.0), (0.05, 0.1, 0.02)] {
            let a = gaveau_kernel(t, r, z, &q, GaveauConvention::Gaveau).unwrap().value;
            let b = gaveau_kernel(1.0, r / t.sqrt(), z / t, &q, GaveauConvention::Gaveau)
                .unwrap()
                .value
                / (t * t);
            assert!((a - b).abs() < 1e-8 * a, "{t} {r} {z}: {a} {b}");
        }
    }

    #[test]
    fn gaveau_total_mass() {
        // ∭ h₁ r dr dθ dz over r < 8, |z| < 40
        let q = QuadSpec::default();
        let rr = composite_rule(&(0..=16).map(|i| 0.5 * i as f64).collect::<Vec<_>>(), 10);
        let zz = composite_rule(&(0..=40).map(|i| i as f64).collect::<Vec<_>>(), 10);
        let mut mass = 0.0;
        for &(r, wr) in &rr {
            for &(z, wz) in &zz {
                let h = gaveau_kernel(1.0, r, z, &q, GaveauConvention::Gaveau).unwrap().value;
                mass += 2.0 * 2.0 * PI * wr * wz * r * h;
            }
        }
        assert!((mass - 1.0).abs() < 1e-4, "{mass}");
    }

    #[test]
    fn dilated_coeffs_limits() {
        let c1 = dilated_sublaplacian_coeffs(1.0, 0.8).unwrap();
        let r: f64 = 0.8;
        assert!((c1.d_r - 2.0 / (2.0 * r).tanh()).abs() < 1e-15);
        assert!((c1.d_zz - r.tanh().powi(2)).abs() < 1e-15);
        assert!((c1.d_thth - (1.0 / r.tanh() - r.tanh()).powi(2)).abs() < 1e-14);
        let lim = heisenberg_sublaplacian_coeffs(1.0);
        let prev = dilated_sublaplacian_coeffs(100.0, 1.0).unwrap();
        let next = dilated_sublaplacian_coeffs(1e4, 1.0).unwrap();
        for (a, b, l) in [
            (prev.d_r, next.d_r, lim.d_r),
            (prev.d_thth, next.d_thth, lim.d_thth),
            (prev.d_zz, next.d_zz, lim.d_zz),
            (prev.d_ztheta, next.d_ztheta, lim.d_ztheta),
        ] {
            // error O(1/c): a hundredfold c shrinks it a hundredfold
            assert!((a - l).abs() < 2.0 / 100.0, "{a} {l}");
            assert!((b - l).abs() < 0.02 * (a - l).abs() + 1e-12, "{b} {a} {l}");
        }
    }

    #[test]
    fn dilated_fields_converge() {
        let mut worst = [0.0f64; 3];
        for (i, c) in [1e2, 1e3, 1e4].into_iter().enumerate() {
            for ri in 1..=10 {
                for ti in 0..8 {
                    for zi in -5..=5 {
                        let p = HeisenbergPoint {
                            r: 0.2 * ri as f64,
                            theta: 0.8 * ti as f64,
                            z: 0.4 * zi as f64,
                        };
                        let (xc, yc) = dilated_fields(c, p);
                        let (xh, yh) = heisenberg_fields(p);
                        for k in 0..3 {
                            worst[i] = worst[i].max((xc[k] - xh[k]).abs()).max((yc[k] - yh[k]).abs());
                        }
                    }
                }
            }
        }
        // uniform on the box, decaying like K/c
        let k = worst[0] * 1e2;
        assert!(worst[1] <= 1.5 * k / 1e3 && worst[2] <= 1.5 * k / 1e4, "{worst:?}");
    }

    #[test]
    fn axis_dilation_limit_is_half_of_gaveau() {
        let q = QuadSpec::default();
        let rows = dilation_limit_check(
            &[0.02, 0.01, 0.001],
            0.0,
            1.0,
            &q,
            Normalization::Published,
            GaveauConvention::Gaveau,
        )
        .unwrap();
        let closed = 1.0 / (64.0 * (PI / 4.0).cosh().powi(2));
        assert!((rows[2].scaled_value - closed).abs() < 2e-3 * closed);
        assert!((rows[2].ratio - 0.5).abs() < 2e-3);
    }
}
