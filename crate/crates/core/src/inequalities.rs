//! Li–Yau, gradient and Harnack inequalities for the kernel, checked pointwise.
//!
//! All checks are invariant under a constant rescaling of the kernel, so they
//! run on whichever [`Normalization`] is passed (the default where none is).

use serde::{Deserialize, Serialize};

use crate::diff::{log_gradient, log_jet};
use crate::distance::distance_squared;
use crate::error::{domain, Error, Result};
use crate::kernel::{group_quadrature, ln_p_any_z, negligible_at, Normalization, QuadSpec};

/// Prefactor in the lower Gaussian bound `p_t ≥ A(t) e^{−d²/4t}` style estimates.
pub fn constant_a(t: f64) -> f64 {
    (-2.0 * t).exp() * (1.0 + t) / (512.0 * t.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiYauParams {
    alpha: f64,
}

impl LiYauParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!("alpha must exceed 2, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `α = t`, the choice behind the large-time forms; needs `t > 2`.
    pub fn large_time(t: f64) -> Result<Self> {
        Self::new(t)
    }
}

/// Additive constant `B(t)` of the Li–Yau inequality.
pub fn constant_b(t: f64, p: LiYauParams) -> f64 {
    let a = p.alpha;
    16.0 * t / a + 4.0 * (3.0 * a - 1.0) / (a - 1.0) + (3.0 * a - 1.0).powi(2) / (4.0 * (a - 2.0) * t)
}

/// Multiplier of `L p / p` in the Li–Yau inequality.
pub fn constant_a_liyau(t: f64, p: LiYauParams) -> f64 {
    let a = p.alpha;
    (3.0 * a - 1.0) / (a - 1.0) + t / (2.0 * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// `|slack|` is inside the numerical error budget.
    Inconclusive,
}

impl Verdict {
    fn from_slack(slack: f64, budget: f64) -> Self {
        if slack.abs() <= budget {
            Verdict::Inconclusive
        } else if slack > 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One pointwise check of `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub t: f64,
    pub r: f64,
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    /// Numerical error budget on `slack`.
    pub budget: f64,
    /// `slack ≥ −budget`.
    pub pass: bool,
    pub verdict: Verdict,
    /// Slack of the weaker inequality without the vertical term.
    pub gamma_only_slack: f64,
}

/// Li–Yau at each grid point, for `P = p_{t+ε}` (so `ε = 0` is the kernel itself):
///
/// `Γ(ln P) + (4t/α)(∂z ln P)² ≤ A·LP/P + B`.
pub fn liyau_check(
    t: f64,
    eps: f64,
    grid: &[(f64, f64)],
    params: LiYauParams,
    q: &QuadSpec,
    norm: Normalization,
) -> Result<Vec<InequalityReport>> {
    if !(t > 0.0) || !(eps >= 0.0) {
        return Err(domain(format!("need t > 0 and eps ≥ 0, got t={t}, eps={eps}")));
    }
    let a = constant_a_liyau(t, params);
    let b = constant_b(t, params);
    let vert = 4.0 * t / params.alpha;
    grid.iter()
        .map(|&(r, z)| {
            if !(r > 0.0) {
                return Err(domain(format!("Li–Yau needs r > 0, got {r}")));
            }
            let j = log_jet(t + eps, r, z, q, norm)?;
            let gamma = j.gamma(r);
            let lp = j.lp_over_p(r);
            let lhs = gamma + vert * j.l_z * j.l_z;
            let rhs = a * lp + b;
            let budget = j.gamma_err(r)
                + vert * 2.0 * j.l_z.abs() * j.err[1]
                + a * j.lp_over_p_err(r)
                + 1e-9 * (lhs.abs() + rhs.abs());
            let slack = rhs - lhs;
            Ok(InequalityReport {
                t,
                r,
                z,
                lhs,
                rhs,
                slack,
                budget,
                pass: slack >= -budget,
                verdict: Verdict::from_slack(slack, budget),
                gamma_only_slack: rhs - gamma,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeRegime {
    /// `t < 1`: `√Γ(ln p) ≤ C (d/t + 1/√t)`.
    Small,
    /// `t > 2`: `√Γ(ln p) ≤ C (d/t + 1)`.
    Large,
}

impl TimeRegime {
    pub fn of(t: f64) -> Result<Self> {
        if t > 0.0 && t < 1.0 {
            Ok(TimeRegime::Small)
        } else if t > 2.0 {
            Ok(TimeRegime::Large)
        } else {
            Err(domain(format!("no gradient bound form for t = {t}")))
        }
    }

    fn scale(self, t: f64, d: f64) -> f64 {
        match self {
            TimeRegime::Small => d / t + 1.0 / t.sqrt(),
            TimeRegime::Large => d / t + 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientPoint {
    pub r: f64,
    pub z: f64,
    pub sqrt_gamma: f64,
    pub scale: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoundReport {
    pub t: f64,
    pub regime: TimeRegime,
    /// Smallest constant that makes the bound hold on the grid.
    pub c_hat: f64,
    pub points: Vec<GradientPoint>,
}

/// Empirical constant of the gradient bound over `grid`.
pub fn gradient_bound_check(
    t: f64,
    grid: &[(f64, f64)],
    q: &QuadSpec,
    norm: Normalization,
) -> Result<GradientBoundReport> {
    let regime = TimeRegime::of(t)?;
    let points = grid
        .iter()
        .map(|&(r, z)| {
            if !(r > 0.0) {
                return Err(domain(format!("gradient bound needs r > 0, got {r}")));
            }
            let (_, lr, lz) = log_gradient(t, r, z, q, norm)?;
            let th = r.tanh();
            let sqrt_gamma = (lr * lr + th * th * lz * lz).sqrt();
            let d = distance_squared(r, z)?.d2.sqrt();
            let scale = regime.scale(t, d);
            Ok(GradientPoint { r, z, sqrt_gamma, scale, ratio: sqrt_gamma / scale })
        })
        .collect::<Result<Vec<_>>>()?;
    let c_hat = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(GradientBoundReport { t, regime, c_hat, points })
}

/// Fisher information `C(t) = ½ ∫ p_t Γ(ln p_t) dμ` over `r < r_max`.
pub fn constant_c(t: f64, r_max: f64, q: &QuadSpec, norm: Normalization) -> Result<f64> {
    let c = group_quadrature(t, r_max, |r, z| {
        // the radial derivative vanishes on the axis, where Γ reduces to zero
        if r < 1e-9 || negligible_at(t, r, z)? {
            return Ok(0.0);
        }
        let (l, lr, lz) = log_gradient(t, r, z, q, norm)?;
        let th = r.tanh();
        Ok(l.exp() * (lr * lr + th * th * lz * lz))
    })?;
    Ok(0.5 * c)
}

/// A pair of points `g1`, `g2` in cylindric `(r, z)` coordinates.
pub type PointPair = ((f64, f64), (f64, f64));

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnackSample {
    pub g1: (f64, f64),
    pub g2: (f64, f64),
    /// `ln(p_{t1}(g1) / p_{t2}(g2))`.
    pub ln_ratio: f64,
    /// Upper bound on `δ(g1, g2)²` from the triangle inequality through the identity.
    pub delta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub t1: f64,
    pub t2: f64,
    pub regime: TimeRegime,
    /// Fitted exponent of the time factor.
    pub a1: f64,
    /// Fitted coefficient of `δ²/(t2 − t1)`.
    pub a2: f64,
    pub samples: Vec<HarnackSample>,
}

/// Fits the smallest constants with
/// `p_{t1}(g1) ≤ T · exp(A2 δ²/(t2 − t1)) · p_{t2}(g2)`,
/// where `T = (t2/t1)^{A1}` for small times and `T = e^{A1 (t2 − t1)}` for large ones.
///
/// `A1` comes from the pairs with `g1 = g2` (`δ = 0`), `A2` from the remaining
/// pairs given `A1`.
pub fn harnack_spot_check(
    t1: f64,
    t2: f64,
    pairs: &[PointPair],
    q: &QuadSpec,
    norm: Normalization,
) -> Result<HarnackReport> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(domain(format!("need 0 < t1 < t2, got {t1}, {t2}")));
    }
    let regime = if t2 < 1.0 { TimeRegime::Small } else { TimeRegime::of(t1)? };
    let samples = pairs
        .iter()
        .map(|&(g1, g2)| {
            let l1 = ln_p_any_z(t1, g1.0, g1.1, q, norm)?.0;
            let l2 = ln_p_any_z(t2, g2.0, g2.1, q, norm)?.0;
            let delta2 = if g1 == g2 {
                0.0
            } else {
                let d = distance_squared(g1.0, g1.1)?.d2.sqrt() + distance_squared(g2.0, g2.1)?.d2.sqrt();
                d * d
            };
            Ok(HarnackSample { g1, g2, ln_ratio: l1 - l2, delta2 })
        })
        .collect::<Result<Vec<_>>>()?;
    let time_log = match regime {
        TimeRegime::Small => (t2 / t1).ln(),
        TimeRegime::Large => t2 - t1,
    };
    let a1 = samples
        .iter()
        .filter(|s| s.delta2 == 0.0)
        .map(|s| s.ln_ratio / time_log)
        .fold(0.0, f64::max);
    let a2 = samples
        .iter()
        .filter(|s| s.delta2 > 0.0)
        .map(|s| (s.ln_ratio - a1 * time_log) * (t2 - t1) / s.delta2)
        .fold(0.0, f64::max);
    Ok(HarnackReport { t1, t2, regime, a1, a2, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((constant_a(1.0) - (-2.0f64).exp() * 2.0 / 512.0).abs() < 1e-15);
        let p = LiYauParams::new(3.0).unwrap();
        assert!((constant_b(1.0, p) - (16.0 / 3.0 + 16.0 + 64.0 / 4.0)).abs() < 1e-12);
        assert!((constant_a_liyau(1.0, p) - (4.0 + 1.0 / 6.0)).abs() < 1e-12);
        assert!(LiYauParams::new(2.0).is_err());
        assert!(LiYauParams::large_time(1.5).is_err());
    }

    #[test]
    fn liyau_holds_on_a_small_grid() {
        let q = QuadSpec::precise();
        let p = LiYauParams::new(3.0).unwrap();
        let grid = [(0.3, 0.0), (1.0, 0.5), (2.0, -2.5)];
        for r in liyau_check(0.5, 0.0, &grid, p, &q, Normalization::default()).unwrap() {
            assert!(r.pass, "{r:?}");
            assert!(r.gamma_only_slack >= r.slack);
        }
    }

    #[test]
    fn verdict_respects_budget() {
        assert_eq!(Verdict::from_slack(-1e-9, 1e-8), Verdict::Inconclusive);
        assert_eq!(Verdict::from_slack(-1e-7, 1e-8), Verdict::Fail);
        assert_eq!(Verdict::from_slack(1e-7, 1e-8), Verdict::Pass);
    }

    #[test]
    fn gradient_bound_is_scale_free() {
        let q = QuadSpec::default();
        let grid = [(0.5, 0.2), (1.0, 1.0)];
        let a = gradient_bound_check(0.5, &grid, &q, Normalization::Published).unwrap();
        let b = gradient_bound_check(0.5, &grid, &q, Normalization::Haar).unwrap();
        assert!((a.c_hat - b.c_hat).abs() < 1e-6 * a.c_hat);
        assert!(gradient_bound_check(1.5, &grid, &q, Normalization::Published).is_err());
    }
}
