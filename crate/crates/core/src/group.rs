//! SL(2,R) in cylindric coordinates: the chart, the left-invariant vector
//! fields X, Y, Z, the sublaplacian `L = X² + Y²`, and the radial forms of
//! the carré du champ Γ and its iterate Γ₂.
//!
//! The chart is `(r, θ, z) ↦ exp(r cos θ X + r sin θ Y) exp(z Z)` with
//! `X = diag(1, -1)`, `Y = [[0, 1], [1, 0]]`, `Z = [[0, 1], [-1, 0]]`.
//! The invariant measure is `μ = sinh(2r)/2 dr dθ dz`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Operators with `1/tanh r` or `1/sinh 2r` coefficients refuse to evaluate below this radius.
pub const AXIS_CUTOFF: f64 = 1e-8;

/// Determinant tolerance for [`GroupElement::new`].
pub const DET_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl GroupElement {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Result<Self> {
        let g = Self { a11, a12, a21, a22 };
        if (g.det() - 1.0).abs() > DET_TOL {
            return Err(crate::error::domain(format!(
                "determinant {} is not 1",
                g.det()
            )));
        }
        Ok(g)
    }

    pub const fn identity() -> Self {
        Self {
            a11: 1.0,
            a12: 0.0,
            a21: 0.0,
            a22: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a11: self.a11 * o.a11 + self.a12 * o.a21,
            a12: self.a11 * o.a12 + self.a12 * o.a22,
            a21: self.a21 * o.a11 + self.a22 * o.a21,
            a22: self.a21 * o.a12 + self.a22 * o.a22,
        }
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse(&self) -> Self {
        Self {
            a11: self.a22,
            a12: -self.a12,
            a21: -self.a21,
            a22: self.a11,
        }
    }

    /// Rescales by `1/sqrt(det)` so the determinant is 1 again.
    pub fn renormalized(&self) -> Self {
        let s = self.det().sqrt().recip();
        Self {
            a11: self.a11 * s,
            a12: self.a12 * s,
            a21: self.a21 * s,
            a22: self.a22 * s,
        }
    }

    /// `exp(a X + b Y)`, exact: the generator squares to `(a² + b²) I`.
    pub fn exp_horizontal(a: f64, b: f64) -> Self {
        let rho = a.hypot(b);
        let c = rho.cosh();
        // sinh(rho)/rho, stable near 0
        let s = if rho < 1e-8 { 1.0 + rho * rho / 6.0 } else { rho.sinh() / rho };
        Self {
            a11: c + s * a,
            a12: s * b,
            a21: s * b,
            a22: c - s * a,
        }
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        [
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylCoord {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
}

impl CylCoord {
    /// Validates `r >= 0` and `z ∈ [-π, π]`; reduces θ to `[0, 2π)`.
    pub fn new(r: f64, theta: f64, z: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(crate::error::domain(format!("r = {r} must be finite and >= 0")));
        }
        if !(z.abs() <= PI) {
            return Err(crate::error::domain(format!("z = {z} outside [-π, π]")));
        }
        if !theta.is_finite() {
            return Err(crate::error::domain("theta must be finite"));
        }
        Ok(Self {
            r,
            theta: reduce_angle(theta),
            z,
        })
    }
}

pub(crate) fn reduce_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

pub fn cyl_to_matrix(c: CylCoord) -> GroupElement {
    let (ch, sh) = (c.r.cosh(), c.r.sinh());
    let (sz, cz) = c.z.sin_cos();
    let (stz, ctz) = (c.theta + c.z).sin_cos();
    GroupElement {
        a11: ch * cz + sh * ctz,
        a12: ch * sz + sh * stz,
        a21: -ch * sz + sh * stz,
        a22: ch * cz - sh * ctz,
    }
}

/// Inverse of [`cyl_to_matrix`]. At `r = 0` the angle θ is undefined and 0 is returned.
pub fn matrix_to_cyl(g: &GroupElement) -> Result<CylCoord> {
    if (g.det() - 1.0).abs() > 1e-8 {
        return Err(Error::NonCylindric(format!("determinant {}", g.det())));
    }
    // cosh r e^{iz} = (p + i q)/2 and sinh r e^{i(θ+z)} = (u + i v)/2
    let p = g.a11 + g.a22;
    let q = g.a12 - g.a21;
    let u = g.a11 - g.a22;
    let v = g.a12 + g.a21;
    let ch2 = 0.25 * (p * p + q * q);
    if ch2 < 1.0 - 1e-9 {
        return Err(Error::NonCylindric(format!(
            "(a11+a22)² + (a12-a21)² = {} < 4",
            4.0 * ch2
        )));
    }
    // sinh r from the second modulus is accurate near r = 0
    let sh = 0.5 * u.hypot(v);
    let r = sh.asinh();
    let z = q.atan2(p);
    let theta = if sh == 0.0 { 0.0 } else { reduce_angle(v.atan2(u) - z) };
    Ok(CylCoord { r, theta, z })
}

/// `(Xf, Yf, Zf)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldValues {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Coefficients `(∂r, ∂θ, ∂z)` of X and Y at a point.
fn field_coefficients(c: CylCoord) -> ([f64; 3], [f64; 3]) {
    let (s, co) = (c.theta + 2.0 * c.z).sin_cos();
    let th = c.r.tanh();
    let k = 1.0 / th - th;
    ([co, -s * k, -s * th], [s, co * k, co * th])
}

fn check_axis(r: f64) -> Result<()> {
    if r < AXIS_CUTOFF {
        Err(Error::SingularAtAxis {
            r,
            cutoff: AXIS_CUTOFF,
        })
    } else {
        Ok(())
    }
}

/// Applies X, Y, Z to a function whose gradient `(∂r, ∂θ, ∂z)` is known.
pub fn vector_fields_from_gradient(grad: [f64; 3], c: CylCoord) -> Result<FieldValues> {
    check_axis(c.r)?;
    let (xc, yc) = field_coefficients(c);
    let dot = |v: [f64; 3]| v[0] * grad[0] + v[1] * grad[1] + v[2] * grad[2];
    Ok(FieldValues {
        x: dot(xc),
        y: dot(yc),
        z: grad[2],
    })
}

/// Applies X, Y, Z to a smooth function of `(r, θ, z)` using central differences.
pub fn apply_vector_fields<F>(f: F, c: CylCoord) -> Result<FieldValues>
where
    F: Fn(f64, f64, f64) -> f64,
{
    check_axis(c.r)?;
    let h = |x: f64| fd_step(x).min(0.5 * c.r.max(AXIS_CUTOFF));
    let (hr, ht, hz) = (h(c.r), fd_step(c.theta), fd_step(c.z));
    let grad = [
        (f(c.r + hr, c.theta, c.z) - f(c.r - hr, c.theta, c.z)) / (2.0 * hr),
        (f(c.r, c.theta + ht, c.z) - f(c.r, c.theta - ht, c.z)) / (2.0 * ht),
        (f(c.r, c.theta, c.z + hz) - f(c.r, c.theta, c.z - hz)) / (2.0 * hz),
    ];
    vector_fields_from_gradient(grad, c)
}

pub(crate) fn fd_step(x: f64) -> f64 {
    1e-5f64.max(1e-5 * x.abs())
}

/// Value and partial derivatives of a radial function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RadialDerivs {
    pub f: f64,
    pub f_r: f64,
    pub f_z: f64,
    pub f_rr: f64,
    pub f_zz: f64,
    pub f_rz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeBackend {
    Analytic,
    FiniteDifference,
}

type ValueFn<'a> = Box<dyn Fn(f64, f64) -> f64 + Send + Sync + 'a>;
type DerivFn<'a> = Box<dyn Fn(f64, f64) -> RadialDerivs + Send + Sync + 'a>;

/// A θ-independent function of `(r, z)` with its first and second partials.
pub struct RadialFunction<'a> {
    value: ValueFn<'a>,
    derivs: Option<DerivFn<'a>>,
}

impl<'a> RadialFunction<'a> {
    /// Derivatives come from central differences with step `max(1e-5, 1e-5 |x|)`.
    pub fn from_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'a) -> Self {
        Self {
            value: Box::new(f),
            derivs: None,
        }
    }

    pub fn with_derivatives(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'a,
        d: impl Fn(f64, f64) -> RadialDerivs + Send + Sync + 'a,
    ) -> Self {
        Self {
            value: Box::new(f),
            derivs: Some(Box::new(d)),
        }
    }

    pub fn backend(&self) -> DerivativeBackend {
        if self.derivs.is_some() {
            DerivativeBackend::Analytic
        } else {
            DerivativeBackend::FiniteDifference
        }
    }

    pub fn value(&self, r: f64, z: f64) -> f64 {
        (self.value)(r, z)
    }

    pub fn derivs(&self, r: f64, z: f64) -> RadialDerivs {
        match &self.derivs {
            Some(d) => d(r, z),
            None => self.finite_difference_derivs(r, z),
        }
    }

    pub fn finite_difference_derivs(&self, r: f64, z: f64) -> RadialDerivs {
        let f = |r: f64, z: f64| (self.value)(r, z);
        let mut h = fd_step(r);
        if r > 0.0 {
            h = h.min(0.5 * r);
        }
        let k = fd_step(z);
        let f0 = f(r, z);
        let (fp, fm) = (f(r + h, z), f(r - h, z));
        let (gp, gm) = (f(r, z + k), f(r, z - k));
        RadialDerivs {
            f: f0,
            f_r: (fp - fm) / (2.0 * h),
            f_z: (gp - gm) / (2.0 * k),
            f_rr: (fp - 2.0 * f0 + fm) / (h * h),
            f_zz: (gp - 2.0 * f0 + gm) / (k * k),
            f_rz: (f(r + h, z + k) - f(r + h, z - k) - f(r - h, z + k) + f(r - h, z - k))
                / (4.0 * h * k),
        }
    }
}

/// `Γ(f, f) = (∂r f)² + tanh² r (∂z f)²` for radial f.
pub fn gamma_radial(f: &RadialFunction, r: f64, z: f64) -> f64 {
    gamma_from_derivs(&f.derivs(r, z), r)
}

pub fn gamma_from_derivs(d: &RadialDerivs, r: f64) -> f64 {
    let th = r.tanh();
    d.f_r * d.f_r + th * th * d.f_z * d.f_z
}

/// Radial Γ₂ as a sum of three squares, hence non-negative.
pub fn gamma2_radial(f: &RadialFunction, r: f64, z: f64) -> Result<f64> {
    gamma2_from_derivs(&f.derivs(r, z), r)
}

pub fn gamma2_from_derivs(d: &RadialDerivs, r: f64) -> Result<f64> {
    let th = r.tanh();
    let radial_term = if r < AXIS_CUTOFF {
        // 2 f_r / sinh 2r → f_rr when f_r vanishes linearly
        if d.f_r.abs() <= 2.0 * r * (d.f_rr.abs() + 1.0) {
            d.f_rr
        } else {
            return Err(Error::SingularAtAxis {
                r,
                cutoff: AXIS_CUTOFF,
            });
        }
    } else {
        2.0 / (2.0 * r).sinh() * d.f_r
    };
    let ch2 = r.cosh().powi(2);
    let a = d.f_rr;
    let b = radial_term - th * th * d.f_zz;
    let c = d.f_z / ch2 + th * d.f_rz;
    Ok(a * a + b * b + 2.0 * c * c)
}

/// `L f = ∂²r f + 2 coth(2r) ∂r f + tanh² r ∂²z f` for radial f.
pub fn sublaplacian_radial(f: &RadialFunction, r: f64, z: f64) -> Result<f64> {
    sublaplacian_from_derivs(&f.derivs(r, z), r)
}

pub fn sublaplacian_from_derivs(d: &RadialDerivs, r: f64) -> Result<f64> {
    check_axis(r)?;
    let th = r.tanh();
    Ok(d.f_rr + 2.0 / (2.0 * r).tanh() * d.f_r + th * th * d.f_zz)
}

/// Density of μ with respect to `dr dθ dz`.
pub fn measure_density(r: f64) -> f64 {
    0.5 * (2.0 * r).sinh()
}

/// μ-measure of `{r1 < r < r2, θ arbitrary, z1 < z < z2}`.
pub fn chart_cell_measure(r1: f64, r2: f64, z1: f64, z2: f64) -> f64 {
    // ∫ sinh(2r)/2 dr = cosh(2r)/4, written with sinh² to avoid cancellation
    let c = |r: f64| 0.5 * r.sinh().powi(2);
    TAU * (c(r2) - c(r1)) * (z2 - z1)
}

/// Second-order jet of a function of `(r, θ, z)`: gradient and Hessian in that order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Jet3 {
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

impl Jet3 {
    pub fn from_radial(d: &RadialDerivs) -> Self {
        Self {
            grad: [d.f_r, 0.0, d.f_z],
            hess: [
                [d.f_rr, 0.0, d.f_rz],
                [0.0, 0.0, 0.0],
                [d.f_rz, 0.0, d.f_zz],
            ],
        }
    }
}

/// Coefficients of a vector field and their partial derivatives:
/// `coef[i]` multiplies `∂_i`, `dcoef[j][i] = ∂_j coef[i]`.
struct FieldJet {
    coef: [f64; 3],
    dcoef: [[f64; 3]; 3],
}

impl FieldJet {
    fn apply(&self, jet: &Jet3) -> f64 {
        (0..3).map(|i| self.coef[i] * jet.grad[i]).sum()
    }

    /// Gradient of `V f` (needed to apply a second field on top).
    fn grad_of_applied(&self, jet: &Jet3) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (j, gj) in g.iter_mut().enumerate() {
            *gj = (0..3)
                .map(|i| self.dcoef[j][i] * jet.grad[i] + self.coef[i] * jet.hess[j][i])
                .sum();
        }
        g
    }

    /// `W (V f)`.
    fn compose(&self, inner: &FieldJet, jet: &Jet3) -> f64 {
        let g = inner.grad_of_applied(jet);
        (0..3).map(|j| self.coef[j] * g[j]).sum()
    }
}

fn field_jets(c: CylCoord) -> (FieldJet, FieldJet, FieldJet) {
    let (s, co) = (c.theta + 2.0 * c.z).sin_cos();
    let th = c.r.tanh();
    let sech2 = 1.0 - th * th;
    let k = 1.0 / th - th;
    let dk = -1.0 / c.r.sinh().powi(2) - sech2;
    let x_coef = [co, -s * k, -s * th];
    let x_dth = [-s, -co * k, -co * th];
    let x = FieldJet {
        coef: x_coef,
        dcoef: [
            [0.0, -s * dk, -s * sech2],
            x_dth,
            [2.0 * x_dth[0], 2.0 * x_dth[1], 2.0 * x_dth[2]],
        ],
    };
    let y_coef = [s, co * k, co * th];
    let y_dth = [co, -s * k, -s * th];
    let y = FieldJet {
        coef: y_coef,
        dcoef: [
            [0.0, co * dk, co * sech2],
            y_dth,
            [2.0 * y_dth[0], 2.0 * y_dth[1], 2.0 * y_dth[2]],
        ],
    };
    let z = FieldJet {
        coef: [0.0, 0.0, 1.0],
        dcoef: [[0.0; 3]; 3],
    };
    (x, y, z)
}

/// Γ₂ from the general left-invariant formula
/// `(X²f)² + (Y²f)² + ½((XY+YX)f)² + 2(Zf)² − 4Γ(f) − 4(Xf)(YZf) + 4(Yf)(XZf)`.
///
/// Test helper; the radial sum-of-squares form is the public operation.
pub(crate) fn gamma2_general(jet: &Jet3, c: CylCoord) -> Result<f64> {
    check_axis(c.r)?;
    let (x, y, z) = field_jets(c);
    let xf = x.apply(jet);
    let yf = y.apply(jet);
    let zf = z.apply(jet);
    let xxf = x.compose(&x, jet);
    let yyf = y.compose(&y, jet);
    let xyf = x.compose(&y, jet);
    let yxf = y.compose(&x, jet);
    let yzf = y.compose(&z, jet);
    let xzf = x.compose(&z, jet);
    let gamma = xf * xf + yf * yf;
    Ok(xxf * xxf + yyf * yyf + 0.5 * (xyf + yxf).powi(2) + 2.0 * zf * zf - 4.0 * gamma
        - 4.0 * xf * yzf
        + 4.0 * yf * xzf)
}

/// `L f = X(Xf) + Y(Yf)` through the general field jets.
pub(crate) fn sublaplacian_general(jet: &Jet3, c: CylCoord) -> Result<f64> {
    check_axis(c.r)?;
    let (x, y, _) = field_jets(c);
    Ok(x.compose(&x, jet) + y.compose(&y, jet))
}
