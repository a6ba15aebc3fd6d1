//! Monte Carlo oracle: the diffusion generated by `L = X² + Y²`, simulated as
//! products of random horizontal increments, binned and compared to the kernel.
//!
//! Every path draws from its own ChaCha8 stream `(seed, path_id)`, so samples are
//! bitwise-identical regardless of how paths are spread over threads.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{chart_cell_measure, matrix_to_cyl, measure_density, CylCoord, GroupElement};
use crate::kernel::{ln_p_any_z, Normalization, QuadSpec};
use crate::quad::composite_rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `g ← g · exp(√(2Δt)(ξ₁X + ξ₂Y))`.
    #[default]
    ExponentialIncrement,
    /// Same, with the Cayley transform `(I − A/2)⁻¹(I + A/2)` in place of `exp A`.
    GeometricMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub seed: u64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub t_final: f64,
    pub scheme: Scheme,
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::InvalidConfig("n_paths and n_steps must be at least 1".into()));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidConfig(format!("t_final must be positive, got {}", self.t_final)));
        }
        // the Cayley factor is singular at |A| = 2; keep that out of reach
        if self.scheme == Scheme::GeometricMidpoint && self.dt() > 0.05 {
            return Err(Error::InvalidConfig(format!(
                "geometric-midpoint needs t_final/n_steps ≤ 0.05, got {}",
                self.dt()
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }
}

/// Endpoint of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathEnd {
    pub path_id: u64,
    /// Folded to the chart, `z ∈ (−π, π]`.
    pub coord: CylCoord,
    /// Winding number: the unwrapped height is `z + 2π·fold_count`.
    pub fold_count: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSample {
    pub config: MCConfig,
    pub paths: Vec<PathEnd>,
    /// Endpoints that could not be mapped to the chart.
    pub non_cylindric: usize,
    /// Largest `|det g − 1|` seen after renormalization, over all steps.
    pub max_det_error: f64,
}

fn increment(scheme: Scheme, a: f64, b: f64) -> GroupElement {
    match scheme {
        Scheme::ExponentialIncrement => GroupElement::exp_horizontal(a, b),
        Scheme::GeometricMidpoint => {
            // with A² = ρ² I the Cayley transform is ((1 + ρ²/4) I + A)/(1 − ρ²/4)
            let q = 0.25 * (a * a + b * b);
            let s = (1.0 - q).recip();
            GroupElement {
                a11: (1.0 + q + a) * s,
                a12: b * s,
                a21: b * s,
                a22: (1.0 + q - a) * s,
            }
        }
    }
}

fn simulate_one(cfg: &MCConfig, path_id: u64) -> (std::result::Result<PathEnd, ()>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path_id);
    let scale = (2.0 * cfg.dt()).sqrt();
    let mut g = GroupElement::identity();
    let mut z_prev = 0.0;
    let mut z_unwrapped = 0.0;
    let mut det_err: f64 = 0.0;
    for _ in 0..cfg.n_steps {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        g = g.mul(&increment(cfg.scheme, scale * a, scale * b)).renormalized();
        det_err = det_err.max((g.det() - 1.0).abs());
        // the chart height is the argument of (a11 + a22) + i(a12 − a21)
        let z = (g.a12 - g.a21).atan2(g.a11 + g.a22);
        z_unwrapped += (z - z_prev + PI).rem_euclid(TAU) - PI;
        z_prev = z;
    }
    let end = matrix_to_cyl(&g).map_err(|_| ()).map(|coord| PathEnd {
        path_id,
        coord,
        fold_count: ((z_unwrapped - coord.z) / TAU).round() as i64,
    });
    (end, det_err)
}

/// Runs `cfg.n_paths` independent paths from the identity to time `cfg.t_final`.
pub fn simulate_paths(cfg: &MCConfig) -> Result<McSample> {
    cfg.validate()?;
    let ends: Vec<_> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|id| simulate_one(cfg, id))
        .collect();
    let max_det_error = ends.iter().map(|e| e.1).fold(0.0, f64::max);
    let paths: Vec<PathEnd> = ends.iter().filter_map(|e| e.0.ok()).collect();
    Ok(McSample {
        config: *cfg,
        non_cylindric: cfg.n_paths - paths.len(),
        paths,
        max_det_error,
    })
}

/// Writes one CSV record per path: `path_id,r,theta,z,fold_count`.
pub fn write_csv<W: Write>(sample: &McSample, mut w: W) -> std::io::Result<()> {
    writeln!(w, "path_id,r,theta,z,fold_count")?;
    for p in &sample.paths {
        writeln!(
            w,
            "{},{:.17e},{:.17e},{:.17e},{}",
            p.path_id, p.coord.r, p.coord.theta, p.coord.z, p.fold_count
        )?;
    }
    Ok(())
}

/// Rectangular bins in `(r, z)`; each covers every `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    pub r_edges: Vec<f64>,
    pub z_edges: Vec<f64>,
}

impl BinGrid {
    /// `n_r` equal bins on `[0, r_max]` times `n_z` equal bins on `[−π, π]`.
    pub fn uniform(r_max: f64, n_r: usize, n_z: usize) -> Result<Self> {
        if n_r == 0 || n_z == 0 || !(r_max > 0.0) {
            return Err(Error::InvalidConfig("bin grid needs r_max > 0 and at least one bin".into()));
        }
        Ok(Self {
            r_edges: (0..=n_r).map(|i| r_max * i as f64 / n_r as f64).collect(),
            z_edges: (0..=n_z).map(|j| -PI + TAU * j as f64 / n_z as f64).collect(),
        })
    }

    fn locate(edges: &[f64], x: f64) -> Option<usize> {
        if x < edges[0] || x > edges[edges.len() - 1] {
            return None;
        }
        let i = edges.partition_point(|&e| e <= x);
        Some(i.clamp(1, edges.len() - 1) - 1)
    }

    fn n_z(&self) -> usize {
        self.z_edges.len() - 1
    }

    fn bins(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nz = self.n_z();
        (0..self.r_edges.len() - 1).flat_map(move |i| (0..nz).map(move |j| (i, j)))
    }
}

/// Histogram of the endpoints, as a density with respect to μ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: BinGrid,
    /// Row-major `[r bin][z bin]`.
    pub counts: Vec<u64>,
    /// `counts / (n · μ(bin))`.
    pub density: Vec<f64>,
    /// 95% normal-approximation half-widths of `density`.
    pub half_width: Vec<f64>,
    pub n: usize,
    /// Endpoints outside the grid.
    pub outside: usize,
}

pub fn estimate_density(sample: &McSample, grid: &BinGrid) -> DensityEstimate {
    let nz = grid.n_z();
    let nbins = (grid.r_edges.len() - 1) * nz;
    let mut counts = vec![0u64; nbins];
    let mut outside = 0;
    for p in &sample.paths {
        match (BinGrid::locate(&grid.r_edges, p.coord.r), BinGrid::locate(&grid.z_edges, p.coord.z)) {
            (Some(i), Some(j)) => counts[i * nz + j] += 1,
            _ => outside += 1,
        }
    }
    let n = sample.paths.len().max(1) as f64;
    let (mut density, mut half_width) = (Vec::with_capacity(nbins), Vec::with_capacity(nbins));
    for (k, (i, j)) in grid.bins().enumerate() {
        let m = chart_cell_measure(grid.r_edges[i], grid.r_edges[i + 1], grid.z_edges[j], grid.z_edges[j + 1]);
        let f = counts[k] as f64 / n;
        density.push(f / m);
        half_width.push(1.96 * (f * (1.0 - f) / n).sqrt() / m);
    }
    DensityEstimate { grid: grid.clone(), counts, density, half_width, n: sample.paths.len(), outside }
}

/// Kernel mass `∫_bin p_t dμ` of every bin, row-major.
pub fn kernel_bin_masses(t: f64, grid: &BinGrid, q: &QuadSpec, norm: Normalization) -> Result<Vec<f64>> {
    let rs = t.sqrt();
    let cells: Vec<(usize, usize)> = grid.bins().collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let (r0, r1) = (grid.r_edges[i], grid.r_edges[i + 1]);
            let (z0, z1) = (grid.z_edges[j], grid.z_edges[j + 1]);
            // sub-panels resolve the kernel's scales √t in r and t in z
            let pr = ((r1 - r0) / (0.25 * rs)).ceil().max(1.0) as usize;
            let pz = ((z1 - z0) / (0.5 * t.min(1.0))).ceil().max(1.0) as usize;
            let rb: Vec<f64> = (0..=pr).map(|k| r0 + (r1 - r0) * k as f64 / pr as f64).collect();
            let zb: Vec<f64> = (0..=pz).map(|k| z0 + (z1 - z0) * k as f64 / pz as f64).collect();
            let (rr, zz) = (composite_rule(&rb, 6), composite_rule(&zb, 6));
            let mut acc = 0.0;
            for &(r, wr) in &rr {
                let mut row = 0.0;
                for &(z, wz) in &zz {
                    row += wz * ln_p_any_z(t, r, z, q, norm)?.0.exp();
                }
                acc += wr * measure_density(r) * row;
            }
            Ok(TAU * acc)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityComparison {
    pub normalization: Normalization,
    pub estimate: DensityEstimate,
    /// Bin-averaged kernel density `∫_bin p dμ / μ(bin)`.
    pub kernel_density: Vec<f64>,
    /// Whether each bin's count lies in the 95% binomial band around the kernel's prediction.
    pub agrees: Vec<bool>,
    pub occupied: usize,
    pub agreeing: usize,
    /// `agreeing / occupied` over bins with at least one count.
    pub fraction: f64,
    /// Kernel mass over the whole grid.
    pub kernel_mass: f64,
    /// Fewer paths than a meaningful comparison needs.
    pub insufficient_sample: bool,
}

/// Paths below which [`DensityComparison::insufficient_sample`] is set.
pub const MIN_PATHS: usize = 100_000;

/// Compares histogram counts with the kernel's bin masses.
///
/// A bin agrees when `|count − n m| ≤ 1.96 √(n m (1 − m)) + ½` for kernel mass `m`;
/// the ½ is the continuity correction for integer counts.
pub fn compare_density(
    sample: &McSample,
    grid: &BinGrid,
    q: &QuadSpec,
    norm: Normalization,
) -> Result<DensityComparison> {
    let estimate = estimate_density(sample, grid);
    let masses = kernel_bin_masses(sample.config.t_final, grid, q, norm)?;
    let n = estimate.n as f64;
    let mut agrees = Vec::with_capacity(masses.len());
    let mut kernel_density = Vec::with_capacity(masses.len());
    let (mut occupied, mut agreeing) = (0, 0);
    for (k, (i, j)) in grid.bins().enumerate() {
        let m = masses[k];
        kernel_density.push(m / chart_cell_measure(grid.r_edges[i], grid.r_edges[i + 1], grid.z_edges[j], grid.z_edges[j + 1]));
        let band = 1.96 * (n * m * (1.0 - m).max(0.0)).sqrt() + 0.5;
        let ok = (estimate.counts[k] as f64 - n * m).abs() <= band;
        agrees.push(ok);
        if estimate.counts[k] > 0 {
            occupied += 1;
            agreeing += ok as usize;
        }
    }
    Ok(DensityComparison {
        normalization: norm,
        kernel_mass: masses.iter().sum(),
        fraction: if occupied == 0 { 0.0 } else { agreeing as f64 / occupied as f64 },
        insufficient_sample: estimate.n < MIN_PATHS,
        estimate,
        kernel_density,
        agrees,
        occupied,
        agreeing,
    })
}

/// Simulates and compares in one go.
pub fn density_vs_kernel(cfg: &MCConfig, grid: &BinGrid, q: &QuadSpec, norm: Normalization) -> Result<DensityComparison> {
    compare_density(&simulate_paths(cfg)?, grid, q, norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryTest {
    /// Two-sample Kolmogorov–Smirnov statistic of `z` against `−z`.
    pub statistic: f64,
    /// 95% critical value `1.36 √(2/n)`.
    pub critical: f64,
    pub accepted: bool,
}

/// Kolmogorov–Smirnov check that the folded heights are symmetric about 0.
pub fn z_symmetry(sample: &McSample) -> SymmetryTest {
    let mut z: Vec<f64> = sample.paths.iter().map(|p| p.coord.z).collect();
    z.sort_by(f64::total_cmp);
    let neg: Vec<f64> = z.iter().rev().map(|v| -v).collect();
    let n = z.len();
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < n {
        let x = z[i].min(neg[j]);
        while i < n && z[i] <= x {
            i += 1;
        }
        while j < n && neg[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 - j as f64).abs() / n as f64);
    }
    let critical = 1.36 * (2.0 / n.max(1) as f64).sqrt();
    SymmetryTest { statistic: d, critical, accepted: d <= critical }
}
