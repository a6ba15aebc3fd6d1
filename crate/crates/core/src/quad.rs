//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (21 points)
//! and fixed-order Gauss–Legendre rules for tensor-product integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_598_800,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights, attached to XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any starting panel.
    pub max_levels: u32,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_levels: 20,
            max_intervals: 50_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    /// Integral of |f|, useful as a cancellation diagnostic.
    pub abs_value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
    level: u32,
}

impl Segment {
    fn at_roundoff_floor(&self) -> bool {
        self.error <= 50.0 * f64::EPSILON * self.abs_value * (1.0 + 1e-9)
    }
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One 21-point Gauss–Kronrod panel: (value, error, integral of |f|).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let err = rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h);
    (res_k * half, err, res_abs * h)
}

/// Globally adaptive integration over the union of `[breaks[i], breaks[i+1]]`.
///
/// The worst panel is bisected until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    opts: &AdaptiveOptions,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(Error::InvalidConfig("need at least one panel".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    let mut evaluations = 0usize;
    let (mut value, mut error, mut abs_value) = (0.0, 0.0, 0.0);
    for w in breaks.windows(2) {
        let (v, e, av) = gk21(&f, w[0], w[1]);
        evaluations += 21;
        value += v;
        error += e;
        abs_value += av;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            abs_value: av,
            level: 0,
        });
    }
    let mut since_resum = 0usize;
    loop {
        // Running sums drift; recompute them now and then.
        if since_resum > 200 {
            (value, error, abs_value) = heap
                .iter()
                .chain(frozen.iter())
                .fold((0.0, 0.0, 0.0), |acc, s| {
                    (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
                });
            since_resum = 0;
        }
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureNoConvergence { error, tolerance: tol });
        }
        if error <= tol {
            return Ok(QuadResult {
                value,
                error,
                abs_value,
                evaluations,
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None if frozen.iter().all(Segment::at_roundoff_floor) => {
                // Tolerance below what double precision can resolve here.
                return Ok(QuadResult {
                    value,
                    error,
                    abs_value,
                    evaluations,
                });
            }
            None => return Err(Error::QuadratureNoConvergence { error, tolerance: tol }),
        };
        if worst.at_roundoff_floor()
            || worst.level >= opts.max_levels
            || heap.len() + frozen.len() >= opts.max_intervals
        {
            frozen.push(worst);
            continue;
        }
        value -= worst.value;
        error -= worst.error;
        abs_value -= worst.abs_value;
        let mid = 0.5 * (worst.a + worst.b);
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e, av) = gk21(&f, a, b);
            evaluations += 21;
            value += v;
            error += e;
            abs_value += av;
            heap.push(Segment {
                a,
                b,
                value: v,
                error: e,
                abs_value: av,
                level: worst.level + 1,
            });
        }
        since_resum += 1;
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Nodes and weights of a composite Gauss–Legendre rule over the panels
/// delimited by `breaks`.
pub fn composite_rule(breaks: &[f64], order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    breaks
        .windows(2)
        .flat_map(|p| {
            let c = 0.5 * (p[0] + p[1]);
            let h = 0.5 * (p[1] - p[0]);
            x.iter()
                .zip(w.iter())
                .map(move |(&xi, &wi)| (c + h * xi, h * wi))
                .collect::<Vec<_>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_on_degree_31() {
        // x^30 on [-1, 1] integrates to 2/31; Gauss-10 is not exact for it.
        let (v, _, _) = gk21(&|x: f64| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
        let (v, _, _) = gk21(&|x: f64| x.powi(18) + x.powi(7), 0.0, 1.0);
        assert!((v - (1.0 / 19.0 + 1.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_weights_and_exactness() {
        for n in [1, 2, 5, 16, 40] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 2;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_oscillation_and_peaks() {
        let opts = AdaptiveOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            ..Default::default()
        };
        // int_0^inf cos(a y) e^{-y} dy truncated at 60 = 1/(1+a^2)
        let a = 37.0;
        let r = integrate(|y| (a * y).cos() * (-y).exp(), &[0.0, 60.0], &opts).unwrap();
        assert!((r.value - 1.0 / (1.0 + a * a)).abs() < 1e-13, "{r:?}");
        let r = integrate(|x| 1e-3 / (x * x + 1e-6), &[-1.0, 1.0], &opts).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-3).atan();
        assert!((r.value - exact).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_failure_when_levels_exhausted() {
        let opts = AdaptiveOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_levels: 2,
            max_intervals: 100,
        };
        let r = integrate(|x: f64| x.abs().sqrt().recip(), &[-1.0, 1.0], &opts);
        assert!(matches!(r, Err(Error::QuadratureNoConvergence { .. })));
    }
}
