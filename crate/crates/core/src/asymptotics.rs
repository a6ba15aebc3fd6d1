//! Small-time behaviour of `p_t`: leading Laplace terms on both axes and at
//! generic points, and the extraction of `d²` from `−4t ln p_t`.
//!
//! At a generic point the exponent `((y − iz)² − arccosh²(cosh r cosh y))/4t`
//! has a saddle at `y = iθ(r,z)`. With `u = cosh r cos θ` the second
//! derivative there is `2 sinh² r / G(u)`, `G(u) = (u² − 1)/(u R(u) − 1)`,
//! and the Gaussian integral gives
//!
//! `p_t ~ R(u) √G(u) / (2 (4π)^{3/2} sinh r) · t^{−3/2} · e^{−d²/4t}`.
//!
//! On the r-axis this reduces to the `(r/sinh r)(r coth r − 1)^{−1/2}` form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distance::{distance_squared, generic_d2, ThetaSolution};
use crate::error::{Error, Result};
use crate::kernel::{p_integral, QuadSpec};
use crate::special::{arch_ratio_delta, saddle_ratio_delta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValue {
    pub prefactor: f64,
    /// `d²/4`, the coefficient of `1/t` in the exponent.
    pub exponent_coeff: f64,
    pub power: f64,
    /// `cosh r cos θ(r, z)`.
    pub u_value: f64,
}

impl AsymptoticValue {
    pub fn eval(&self, t: f64) -> f64 {
        self.ln_eval(t).exp()
    }

    pub fn ln_eval(&self, t: f64) -> f64 {
        self.prefactor.ln() + self.power * t.ln() - self.exponent_coeff / t
    }
}

/// Leading term on the z-axis, `e^{−t}/(16t²) · e^{−(2πz+z²)/4t}`.
pub fn asym_axis_z(t: f64, z: f64) -> Result<f64> {
    if !(t > 0.0) || !(z > 0.0 && z <= PI) {
        return Err(crate::error::domain(format!(
            "asym_axis_z needs t > 0 and z in (0, π], got ({t}, {z})"
        )));
    }
    Ok((-t).exp() / (16.0 * t * t) * (-(2.0 * PI * z + z * z) / (4.0 * t)).exp())
}

/// `(r coth r − 1)`, with its series near 0.
fn r_coth_minus_one(r: f64) -> f64 {
    if r < 1e-3 {
        let r2 = r * r;
        r2 / 3.0 - r2 * r2 / 45.0 + 2.0 * r2 * r2 * r2 / 945.0
    } else {
        r / r.tanh() - 1.0
    }
}

/// Leading term on the r-axis, `½ (4πt)^{−3/2} (r/sinh r)(r coth r − 1)^{−1/2} e^{−r²/4t}`.
pub fn asym_r(t: f64, r: f64) -> Result<f64> {
    if r < 1e-6 {
        return Err(Error::SingularAtAxis { r, cutoff: 1e-6 });
    }
    if !(t > 0.0) {
        return Err(crate::error::domain(format!("t = {t} must be positive")));
    }
    Ok(asym_r_value(r).eval(t))
}

fn asym_r_value(r: f64) -> AsymptoticValue {
    AsymptoticValue {
        prefactor: 0.5 * (4.0 * PI).powf(-1.5) * (r / r.sinh()) / r_coth_minus_one(r).sqrt(),
        exponent_coeff: 0.25 * r * r,
        power: -1.5,
        u_value: r.cosh(),
    }
}

/// `f''(iθ)` for the exponent `f(y) = (y − iz)² − arccosh²(cosh r cosh y)`
/// along the real direction: `2 sinh² r / G(u)`, real and positive for `u > −1`.
pub fn saddle_curvature(r: f64, theta: f64) -> Result<f64> {
    let delta = cos_delta(r, theta);
    if delta <= -2.0 {
        return Err(Error::ContinuationAmbiguous(1.0 + delta));
    }
    Ok(2.0 * r.sinh().powi(2) / saddle_ratio_delta(delta))
}

/// `cosh r cos θ − 1`.
fn cos_delta(r: f64, theta: f64) -> f64 {
    2.0 * (0.5 * r).sinh().powi(2) * theta.cos() - 2.0 * (0.5 * theta).sin().powi(2)
}

/// Leading Laplace term at a generic point. For `u ∈ (−1, 1)` the
/// `arccos` branch of `R` is used, which keeps the prefactor real.
pub fn asym_generic(r: f64, z: f64, sol: &ThetaSolution) -> Result<AsymptoticValue> {
    if !(r > 0.0) {
        return Err(crate::error::domain("asym_generic needs r > 0"));
    }
    if z == 0.0 {
        return Ok(asym_r_value(r));
    }
    let delta = cos_delta(r, sol.theta);
    let u = 1.0 + delta;
    if delta <= -2.0 {
        return Err(Error::ContinuationAmbiguous(u));
    }
    let ratio = arch_ratio_delta(delta);
    let g = saddle_ratio_delta(delta);
    Ok(AsymptoticValue {
        prefactor: ratio * g.sqrt() / (2.0 * (4.0 * PI).powf(1.5) * r.sinh()),
        exponent_coeff: 0.25 * generic_d2(r, z, sol.theta),
        power: -1.5,
        u_value: u,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeandreEstimate {
    /// Extrapolated `lim −4t ln p_t`.
    pub limit: f64,
    /// Gap between the three-term and the two-term extrapolations.
    pub residual: f64,
    /// `(t, −4t ln p_t)` samples.
    pub samples: Vec<(f64, f64)>,
}

/// Extrapolates `−4t ln p_t(r, z)` to `t = 0`.
///
/// The prefactor of `p_t` is a power of `t`, so `−4t ln p_t = d² + a t ln t + b t + O(t²)`.
/// The three smallest times determine `(d², a, b)` exactly; the two smallest with
/// the basis `{1, t ln t}` give a cruder value, and their gap is the residual.
pub fn leandre_extract(r: f64, z: f64, t_grid: &[f64], q: &QuadSpec) -> Result<LeandreEstimate> {
    if t_grid.len() < 3 {
        return Err(crate::error::domain("leandre_extract needs at least three times"));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(crate::error::domain("times must be positive"));
    }
    let mut samples = t_grid
        .iter()
        .map(|&t| Ok((t, -4.0 * t * p_integral(t, r, z, q)?.ln_value)))
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (t1, f1) = samples[0];
    let (t2, f2) = samples[1];
    let (t3, f3) = samples[2];
    let limit = solve3(
        [[1.0, t1 * t1.ln(), t1], [1.0, t2 * t2.ln(), t2], [1.0, t3 * t3.ln(), t3]],
        [f1, f2, f3],
    )?;
    let (g1, g2) = (t1 * t1.ln(), t2 * t2.ln());
    let two_term = (f1 * g2 - f2 * g1) / (g2 - g1);
    let residual = (limit - two_term).abs();
    if !limit.is_finite() || residual > 0.25 * limit.abs().max(1e-3) {
        return Err(Error::ExtrapolationUnstable(format!(
            "three-term {limit}, two-term {two_term}"
        )));
    }
    Ok(LeandreEstimate {
        limit,
        residual,
        samples,
    })
}

/// First component of the solution of a 3×3 system (Cramer).
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Result<f64> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 {
        return Err(Error::ExtrapolationUnstable("degenerate time grid".into()));
    }
    let mut a0 = a;
    for i in 0..3 {
        a0[i][0] = b[i];
    }
    Ok(det(a0) / d)
}

/// Ratio of `p_integral` to the leading term, at a point and time.
pub fn laplace_ratio(t: f64, r: f64, z: f64, q: &QuadSpec) -> Result<f64> {
    let p = p_integral(t, r, z, q)?;
    let dist = distance_squared(r, z)?;
    let asym = match dist.theta {
        None => {
            return Ok((p.ln_value - asym_axis_z(t, z.abs())?.ln()).exp());
        }
        Some(theta) => {
            let sol = ThetaSolution {
                theta,
                residual: 0.0,
                iterations: 0,
                bracket: (theta, theta),
            };
            asym_generic(r, z, &sol)?
        }
    };
    Ok((p.ln_value - asym.ln_eval(t)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::solve_theta;
    use crate::kernel::p_axis;

    #[test]
    fn axis_z_examples() {
        for &(t, z) in &[(0.05, 1.0), (0.3, 2.0), (1.0, PI)] {
            let ratio = p_axis(t, z).unwrap() / asym_axis_z(t, z).unwrap();
            let exact = (1.0 + (-PI * z / (2.0 * t)).exp()).powi(-2);
            assert!((ratio - exact).abs() < 1e-14);
        }
        let ratio = p_axis(0.05, 1.0).unwrap() / asym_axis_z(0.05, 1.0).unwrap();
        assert!((ratio - 1.0).abs() < 3.0 * (-PI / 0.1f64).exp());
        let v = asym_axis_z(1.0, PI).unwrap();
        let e = (-1f64).exp() / 16.0 * (-0.75 * PI * PI).exp();
        assert!((v - e).abs() < 1e-15 * e);
        assert!(asym_axis_z(1.0, 0.0).is_err());
    }

    #[test]
    fn asym_r_examples() {
        let q = QuadSpec::default();
        let ratio = p_integral(0.01, 1.0, 0.0, &q).unwrap().value / asym_r(0.01, 1.0).unwrap();
        assert!((0.95..=1.05).contains(&ratio), "{ratio}");
        assert!(asym_r(0.1, 1e-7).is_err());
        // small-r prefactor grows like √3 / r
        let p = asym_r_value(1e-4).prefactor;
        let expected = 0.5 * (4.0 * PI).powf(-1.5) * 3f64.sqrt() / 1e-4;
        assert!((p - expected).abs() < 1e-6 * expected);
        let mut prev = asym_r(0.02, 0.8).unwrap();
        assert!(prev > 0.0);
        for k in 1..10 {
            let cur = asym_r(0.02, 0.8 + 0.1 * k as f64).unwrap();
            assert!(cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn generic_exponent_is_quarter_distance() {
        for &(r, z) in &[(0.2, 0.1), (1.0, -2.0), (2.5, 3.0), (0.05, 1.5)] {
            let sol = solve_theta(r, z).unwrap();
            let a = asym_generic(r, z, &sol).unwrap();
            let d2 = distance_squared(r, z).unwrap().d2;
            assert!((4.0 * a.exponent_coeff - d2).abs() <= 1e-14 * d2);
            assert!(a.prefactor > 0.0);
            assert!(saddle_curvature(r, sol.theta).unwrap() > 0.0);
        }
    }

    #[test]
    fn generic_prefactor_tends_to_radial_one() {
        let r = 1.0;
        let sol = solve_theta(r, 1e-3).unwrap();
        let g = asym_generic(r, 1e-3, &sol).unwrap().prefactor;
        let a = asym_r_value(r).prefactor;
        assert!((g - a).abs() < 1e-2 * a);
    }

    #[test]
    fn generic_laplace_ratio() {
        let q = QuadSpec::default();
        let ratio = laplace_ratio(0.01, 1.0, 0.3, &q).unwrap();
        assert!((0.9..=1.1).contains(&ratio), "{ratio}");
        // u < 1 branch: large z
        let ratio = laplace_ratio(0.005, 0.8, 2.5, &q).unwrap();
        let sol = solve_theta(0.8, 2.5).unwrap();
        assert!(asym_generic(0.8, 2.5, &sol).unwrap().u_value < 1.0);
        assert!((0.9..=1.1).contains(&ratio), "{ratio}");
    }

    #[test]
    fn leandre_examples() {
        let q = QuadSpec::default();
        let grid = [0.04, 0.02, 0.01];
        let e = leandre_extract(1.0, 0.0, &grid, &q).unwrap();
        assert!((e.limit - 1.0).abs() < 0.02, "{e:?}");
        let e = leandre_extract(1e-7, 1.0, &grid, &q).unwrap();
        let d = 2.0 * PI + 1.0;
        assert!((e.limit - d).abs() < 0.02 * d, "{e:?}");
        let e = leandre_extract(0.8, 0.5, &grid, &q).unwrap();
        let d = distance_squared(0.8, 0.5).unwrap().d2;
        assert!((e.limit - d).abs() < 0.02 * d, "{e:?}");
    }
}
