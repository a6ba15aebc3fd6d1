//! Finite-difference derivatives of `ln p_t(r, z)`.
//!
//! Differences are taken on `ln p`, which stays accurate where `p` underflows,
//! with central stencils at steps `h` and `h/2` combined by Richardson
//! extrapolation; a third of the gap between the two is the error estimate.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::{ln_p_any_z, Normalization, QuadSpec};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LogJet {
    pub l: f64,
    pub l_r: f64,
    pub l_z: f64,
    pub l_rr: f64,
    pub l_zz: f64,
    pub l_rz: f64,
    pub l_t: f64,
    /// Error estimates, same order as the derivatives above (`l` excluded).
    pub err: [f64; 6],
}

impl LogJet {
    /// `Γ(ln p) = (∂r ln p)² + tanh² r (∂z ln p)²`.
    pub fn gamma(&self, r: f64) -> f64 {
        let th = r.tanh();
        self.l_r * self.l_r + th * th * self.l_z * self.l_z
    }

    /// `L p / p`, expressed through derivatives of `ln p`.
    pub fn lp_over_p(&self, r: f64) -> f64 {
        let th = r.tanh();
        self.l_rr + self.l_r * self.l_r + 2.0 / (2.0 * r).tanh() * self.l_r
            + th * th * (self.l_zz + self.l_z * self.l_z)
    }

    /// First-order error of [`LogJet::gamma`].
    pub fn gamma_err(&self, r: f64) -> f64 {
        let th2 = r.tanh().powi(2);
        2.0 * self.l_r.abs() * self.err[0] + 2.0 * th2 * self.l_z.abs() * self.err[1]
    }

    /// First-order error of [`LogJet::lp_over_p`].
    pub fn lp_over_p_err(&self, r: f64) -> f64 {
        let th2 = r.tanh().powi(2);
        self.err[2]
            + (2.0 * self.l_r.abs() + 2.0 / (2.0 * r).tanh()) * self.err[0]
            + th2 * (self.err[3] + 2.0 * self.l_z.abs() * self.err[1])
    }
}

/// Steps scaled to the kernel's spatial scales: `√t` in r, `t` in z.
fn steps(t: f64, r: f64) -> (f64, f64, f64) {
    let hr = (0.05 * t.sqrt()).min(0.25 * r);
    let hz = 0.05 * t.min(1.0);
    let ht = 0.02 * t;
    (hr, hz, ht)
}

/// Full second-order jet of `ln p` at `(t, r, z)`, with the time derivative.
pub fn log_jet(t: f64, r: f64, z: f64, q: &QuadSpec, norm: Normalization) -> Result<LogJet> {
    let f = |t: f64, r: f64, z: f64| ln_p_any_z(t, r, z, q, norm).map(|v| v.0);
    let (hr, hz, ht) = steps(t, r);
    let l = f(t, r, z)?;

    let first_second = |g: &dyn Fn(f64) -> Result<f64>, h: f64| -> Result<[(f64, f64); 2]> {
        let mut d1 = [0.0; 2];
        let mut d2 = [0.0; 2];
        for (i, s) in [h, 0.5 * h].into_iter().enumerate() {
            let (p, m) = (g(s)?, g(-s)?);
            d1[i] = (p - m) / (2.0 * s);
            d2[i] = (p - 2.0 * l + m) / (s * s);
        }
        Ok([richardson(d1), richardson(d2)])
    };
    let [r1, r2] = first_second(&|s| f(t, r + s, z), hr)?;
    let [z1, z2] = first_second(&|s| f(t, r, z + s), hz)?;
    let [t1, _] = first_second(&|s| f(t + s, r, z), ht)?;

    let mut mixed = [0.0; 2];
    for (i, (a, b)) in [(hr, hz), (0.5 * hr, 0.5 * hz)].into_iter().enumerate() {
        mixed[i] = (f(t, r + a, z + b)? - f(t, r + a, z - b)? - f(t, r - a, z + b)? + f(t, r - a, z - b)?)
            / (4.0 * a * b);
    }
    let rz = richardson(mixed);

    Ok(LogJet {
        l,
        l_r: r1.0,
        l_z: z1.0,
        l_rr: r2.0,
        l_zz: z2.0,
        l_rz: rz.0,
        l_t: t1.0,
        err: [r1.1, z1.1, r2.1, z2.1, rz.1, t1.1],
    })
}

/// `(ln p, ∂r ln p, ∂z ln p)` from fourth-order central differences.
pub fn log_gradient(t: f64, r: f64, z: f64, q: &QuadSpec, norm: Normalization) -> Result<(f64, f64, f64)> {
    let f = |r: f64, z: f64| ln_p_any_z(t, r, z, q, norm).map(|v| v.0);
    let (hr, hz, _) = steps(t, r);
    let d = |g: &dyn Fn(f64) -> Result<f64>, h: f64| -> Result<f64> {
        Ok((8.0 * (g(h)? - g(-h)?) - (g(2.0 * h)? - g(-2.0 * h)?)) / (12.0 * h))
    };
    // the r-stencil reaches 2h, so halve the step near the axis
    let hr = hr.min(0.2 * r);
    Ok((f(r, z)?, d(&|s| f(r + s, z), hr)?, d(&|s| f(r, z + s), hz)?))
}

/// Richardson for a second-order stencil at `h` and `h/2`: `(value, error)`.
fn richardson(d: [f64; 2]) -> (f64, f64) {
    let gap = d[1] - d[0];
    (d[1] + gap / 3.0, gap.abs() / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ln_p_axis_cover;

    #[test]
    fn heat_equation_holds_for_the_jet() {
        let q = QuadSpec::precise();
        for &(t, r, z) in &[(0.5, 0.7, 0.4), (0.3, 1.5, -2.0), (0.9, 0.3, 3.0)] {
            let j = log_jet(t, r, z, &q, Normalization::Published).unwrap();
            let lhs = j.l_t;
            let rhs = j.lp_over_p(r);
            assert!((lhs - rhs).abs() < 1e-5 * lhs.abs().max(1.0), "{t} {r} {z}: {lhs} {rhs}");
        }
    }

    #[test]
    fn gradient_matches_jet() {
        let q = QuadSpec::precise();
        let (t, r, z) = (0.4, 0.9, 0.6);
        let j = log_jet(t, r, z, &q, Normalization::Published).unwrap();
        let (l, lr, lz) = log_gradient(t, r, z, &q, Normalization::Published).unwrap();
        assert_eq!(l, j.l);
        // both are fourth order; they agree to the truncation level
        assert!((lr - j.l_r).abs() < 2e-6 && (lz - j.l_z).abs() < 2e-6, "{lr} {} {lz} {}", j.l_r, j.l_z);
    }

    #[test]
    fn time_derivative_on_the_axis() {
        // below the delegation radius the stencil only sees the closed form
        let q = QuadSpec::precise();
        let (t, z) = (0.6, 1.2);
        let j = log_jet(t, 5e-8, z, &q, Normalization::Published).unwrap();
        let h = 1e-4;
        let exact = (ln_p_axis_cover(t + h, z) - ln_p_axis_cover(t - h, z)) / (2.0 * h);
        assert!((j.l_t - exact).abs() < 1e-6 * exact.abs(), "{} {exact}", j.l_t);
        let hz = 1e-4;
        let dz = (ln_p_axis_cover(t, z + hz) - ln_p_axis_cover(t, z - hz)) / (2.0 * hz);
        assert!((j.l_z - dz).abs() < 1e-6 * dz.abs());
    }
}
