//! The critical-point equation `θ − z = cosh r · sin θ · R(cosh r cos θ)` and
//! the Carnot–Carathéodory distance to the identity.
//!
//! `θ ↦ cosh r sin θ R(cosh r cos θ)` is increasing with slope at least 1 on
//! `(−W, W)`, `W = arccos(−1/cosh r)`, so the root is unique and opposite in
//! sign to `z`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{cyl_to_matrix, matrix_to_cyl, CylCoord, GroupElement};
use crate::special::{arch_ratio_deriv_delta, arch_ratio_delta};

/// Below these thresholds the closed forms on the axes are used.
pub const CASE_TOL: f64 = 1e-9;

const RESIDUAL_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSolution {
    pub theta: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    AxisZ,
    AxisR,
    Generic,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::AxisZ => "axis_z",
            CaseTag::AxisR => "axis_r",
            CaseTag::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceValue {
    pub d2: f64,
    pub case_tag: CaseTag,
    /// θ(r, z) in the generic case, 0 on the r-axis, absent on the z-axis.
    pub theta: Option<f64>,
}

/// `arccos(−1/cosh r)`: half-width of the admissible θ interval.
pub fn theta_limit(r: f64) -> f64 {
    (-1.0 / r.cosh()).acos()
}

/// `x − 1` for `x = cosh r cos θ`, without cancellation.
fn delta(r: f64, theta: f64) -> f64 {
    2.0 * (0.5 * r).sinh().powi(2) * theta.cos() - 2.0 * (0.5 * theta).sin().powi(2)
}

/// `φ(θ) = cosh r sin θ R(cosh r cos θ)` and `φ'(θ)`.
pub fn phi_and_slope(r: f64, theta: f64) -> (f64, f64) {
    let ch = r.cosh();
    let d = delta(r, theta);
    let rat = arch_ratio_delta(d);
    let s = theta.sin();
    let x = 1.0 + d;
    (ch * s * rat, x * rat - ch * ch * s * s * arch_ratio_deriv_delta(d))
}

/// Solves `θ − z = φ(θ)` by safeguarded Newton on the bracket given by the sign rule.
pub fn solve_theta(r: f64, z: f64) -> Result<ThetaSolution> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(crate::error::domain(format!("solve_theta needs r > 0, got {r}")));
    }
    if !(z.abs() <= PI) {
        return Err(crate::error::domain(format!("z = {z} outside [-π, π]")));
    }
    if z == 0.0 {
        return Ok(ThetaSolution {
            theta: 0.0,
            residual: 0.0,
            iterations: 0,
            bracket: (0.0, 0.0),
        });
    }
    // θ is odd in z; solve for |z| and flip.
    let za = z.abs();
    let sol = solve_positive(r, za)?;
    Ok(if z > 0.0 {
        sol
    } else {
        ThetaSolution {
            theta: -sol.theta,
            residual: sol.residual,
            iterations: sol.iterations,
            bracket: (-sol.bracket.1, -sol.bracket.0),
        }
    })
}

fn solve_positive(r: f64, z: f64) -> Result<ThetaSolution> {
    let g = |th: f64| {
        let (p, dp) = phi_and_slope(r, th);
        (p - th + z, dp - 1.0)
    };
    let w = theta_limit(r);
    // g(0) = z > 0 and g → −∞ at −W; walk the lower end toward −W until g < 0.
    let mut hi = 0.0;
    let mut lo: f64 = -0.5 * w;
    let mut glo = g(lo).0;
    let mut gap = 0.5 * w;
    while glo >= 0.0 {
        hi = lo;
        gap *= 0.5;
        lo = -w + gap;
        if gap < f64::EPSILON * w {
            return Err(Error::ConvergenceFailure {
                iterations: 0,
                residual: glo,
            });
        }
        glo = g(lo).0;
    }
    solve_in_bracket(r, z, lo, hi)
}

/// Root of `φ(θ) − θ + z` in `[lo, hi]`, given `g(lo) < 0 <= g(hi)`. Works for any real `z`.
pub(crate) fn solve_in_bracket(r: f64, z: f64, mut lo: f64, mut hi: f64) -> Result<ThetaSolution> {
    let g = |th: f64| {
        let (p, dp) = phi_and_slope(r, th);
        (p - th + z, dp - 1.0)
    };
    let mut th = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, th);
    for it in 1..=MAX_ITER {
        let (val, slope) = g(th);
        if val.abs() < best.0 {
            best = (val.abs(), th);
        }
        if val.abs() <= RESIDUAL_TOL {
            return Ok(ThetaSolution {
                theta: th,
                residual: val.abs(),
                iterations: it,
                bracket: (lo, hi),
            });
        }
        if val > 0.0 {
            hi = th;
        } else {
            lo = th;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            // The bracket is at ulp level: the residual is as small as the
            // conditioning of g allows here (only near the branch point x = −1).
            let mid = 0.5 * (lo + hi);
            return Ok(ThetaSolution {
                theta: mid,
                residual: g(mid).0.abs(),
                iterations: it,
                bracket: (lo, hi),
            });
        }
        let newton = th - val / slope;
        th = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::ConvergenceFailure {
        iterations: MAX_ITER,
        residual: best.0,
    })
}

/// `d²(r, z)` from the θ parametrisation, with the closed forms on both axes.
pub fn distance_squared(r: f64, z: f64) -> Result<DistanceValue> {
    if !(r >= 0.0) || !(z.abs() <= PI) {
        return Err(crate::error::domain(format!("({r}, {z}) outside the chart")));
    }
    if r < CASE_TOL {
        let za = z.abs();
        return Ok(DistanceValue {
            d2: 2.0 * PI * za + za * za,
            case_tag: CaseTag::AxisZ,
            theta: None,
        });
    }
    if z.abs() < CASE_TOL {
        return Ok(DistanceValue {
            d2: r * r,
            case_tag: CaseTag::AxisR,
            theta: Some(0.0),
        });
    }
    let sol = solve_theta(r, z)?;
    Ok(DistanceValue {
        d2: generic_d2(r, z, sol.theta),
        case_tag: CaseTag::Generic,
        theta: Some(sol.theta),
    })
}

/// `(θ − z)² tanh² r / sin² θ`.
pub(crate) fn generic_d2(r: f64, z: f64, theta: f64) -> f64 {
    let q = (theta - z) * r.tanh() / theta.sin();
    q * q
}

/// Distance between two group elements, via `g1⁻¹ g2` and the chart.
pub fn distance_between(g1: &GroupElement, g2: &GroupElement) -> Result<DistanceValue> {
    let c = matrix_to_cyl(&g1.inverse().mul(g2))?;
    distance_squared(c.r, c.z)
}

/// Same as [`distance_between`] for points given in cylindric coordinates.
pub fn distance_between_cyl(a: CylCoord, b: CylCoord) -> Result<DistanceValue> {
    distance_between(&cyl_to_matrix(a), &cyl_to_matrix(b))
}

/// Empirical constants `(min, max)` of `d²/(r² + |z|)` over a grid.
pub fn distance_bounds_check(grid: &[(f64, f64)]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &(r, z) in grid {
        let denom = r * r + z.abs();
        if denom == 0.0 {
            continue;
        }
        let q = distance_squared(r, z)?.d2 / denom;
        lo = lo.min(q);
        hi = hi.max(q);
    }
    if !lo.is_finite() {
        return Err(crate::error::domain("grid has no point away from the identity"));
    }
    Ok((lo, hi))
}
