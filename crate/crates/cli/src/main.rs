//! `sl2heat`: evaluate, sweep and verify the SL(2,R) subelliptic heat kernel.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 numerical non-convergence.

mod config;
mod output;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use sl2heat::asymptotics::{asym_axis_z, asym_generic, asym_r};
use sl2heat::distance::{distance_squared, solve_theta};
use sl2heat::heisenberg::{dilation_limit_check, GaveauConvention};
use sl2heat::inequalities::{
    constant_c, gradient_bound_check, harnack_spot_check, liyau_check, LiYauParams, PointPair, Verdict,
};
use sl2heat::kernel::{ln_p_any_z, p_axis, p_normalized, Normalization, QuadSpec};
use sl2heat::montecarlo::{compare_density, simulate_paths, write_csv, z_symmetry, BinGrid, MCConfig, Scheme};
use sl2heat::selftest::{run_criterion, Suite};

use output::{Emitter, Field, Format, Record};

#[derive(Parser)]
#[command(name = "sl2heat", version, about = "Subelliptic heat kernel on SL(2,R)", args_override_self = true)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value file of defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Kernel normalization: the published formula or a probability density for μ.
    #[arg(long, global = true, value_enum, default_value_t = NormArg::Published)]
    normalization: NormArg,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Published,
    Haar,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Published => Normalization::Published,
            NormArg::Haar => Normalization::Haar,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Kernel values on a grid.
    Kernel(KernelArgs),
    /// Squared Carnot–Carathéodory distance from the identity.
    Distance(DistanceArgs),
    /// Small-time dilation limit against the Heisenberg kernel.
    Limit(LimitArgs),
    /// Functional inequality sweeps.
    Ineq(IneqArgs),
    /// Monte Carlo comparison with the kernel.
    Mc(McArgs),
    /// Acceptance checks.
    Selftest(SelftestArgs),
}

/// A scalar or an inclusive `start:stop:count` grid.
#[derive(Debug, Clone, PartialEq)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    let v = match parts.as_slice() {
        [x] => vec![num(x)?],
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|e| format!("count `{n}`: {e}"))?;
            match n {
                0 => return Err("empty grid (count 0)".into()),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        _ => return Err(format!("`{s}` is neither a number nor start:stop:count")),
    };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("`{s}` has non-finite values"));
    }
    Ok(Grid(v))
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Integral,
    Axis,
    Asym,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_parser = parse_grid)]
    t: Grid,
    #[arg(long, value_parser = parse_grid)]
    r: Grid,
    #[arg(long, value_parser = parse_grid)]
    z: Grid,
    #[arg(long, value_enum, default_value_t = Method::Integral)]
    method: Method,
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long, value_parser = parse_grid)]
    r: Grid,
    #[arg(long, value_parser = parse_grid)]
    z: Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvArg {
    Gaveau,
    Halved,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, value_parser = parse_grid, default_value = "0.04:0.01:4")]
    t: Grid,
    #[arg(long, value_parser = parse_grid)]
    r: Grid,
    #[arg(long, value_parser = parse_grid)]
    z: Grid,
    #[arg(long, value_enum, default_value_t = ConvArg::Gaveau)]
    convention: ConvArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Liyau,
    Gradient,
    ConstantC,
    Harnack,
}

#[derive(Args)]
struct IneqArgs {
    #[arg(long, value_enum)]
    check: Check,
    /// Times; for harnack, the earlier time t1.
    #[arg(long, value_parser = parse_grid)]
    t: Grid,
    /// Later time of the harnack check.
    #[arg(long)]
    t2: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, value_parser = parse_grid, default_value = "0.2:2:10")]
    r: Grid,
    #[arg(long, value_parser = parse_grid, default_value = "-2:2:10")]
    z: Grid,
    /// Radial cutoff of the Fisher-information integral.
    #[arg(long, default_value_t = 8.0)]
    r_max: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    ExponentialIncrement,
    GeometricMidpoint,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200_000)]
    paths: usize,
    #[arg(long, default_value_t = 400)]
    steps: usize,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::ExponentialIncrement)]
    scheme: SchemeArg,
    /// Also write one CSV row per path here.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long, default_value_t = 4.0)]
    r_max: f64,
    #[arg(long, default_value_t = 16)]
    r_bins: usize,
    #[arg(long, default_value_t = 16)]
    z_bins: usize,
    /// Emit one record per bin before the summary.
    #[arg(long)]
    bins: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
    suite: SuiteArg,
}

enum Failure {
    /// A check ran and did not hold.
    Check(String),
    Usage(String),
    Numerical(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<sl2heat::Error> for Failure {
    fn from(e: sl2heat::Error) -> Self {
        use sl2heat::Error::*;
        match e {
            QuadratureNoConvergence { .. } | ConvergenceFailure { .. } | ExtrapolationUnstable(_) => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn quad_spec(cli: &Cli) -> Result<QuadSpec, Failure> {
    let mut q = QuadSpec::default();
    if let Some(a) = cli.abs_tol {
        q.abs_tol = a;
    }
    if let Some(r) = cli.rel_tol {
        q.rel_tol = r;
    }
    q.validate()?;
    Ok(q)
}

fn check_time(t: f64) -> Outcome {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("t must be positive, got {t}")))
    }
}

fn check_chart(r: f64, z: f64) -> Outcome {
    if r >= 0.0 && z.abs() <= PI {
        Ok(())
    } else {
        Err(Failure::Usage(format!("({r}, {z}) is outside r ≥ 0, |z| ≤ π")))
    }
}

fn kernel_value(t: f64, r: f64, z: f64, method: Method, q: &QuadSpec, norm: Normalization) -> sl2heat::Result<(f64, Option<f64>)> {
    match method {
        Method::Integral => {
            let v = p_normalized(t, r, z, q, norm)?;
            Ok((v.value, Some(v.err_estimate)))
        }
        Method::Axis => match norm {
            Normalization::Published => Ok((p_axis(t, z)?, Some(0.0))),
            Normalization::Haar => Ok((ln_p_any_z(t, 0.0, z, q, norm)?.0.exp(), Some(0.0))),
        },
        // leading-order Laplace forms of the published kernel
        Method::Asym => {
            let v = if r == 0.0 {
                asym_axis_z(t, z.abs())?
            } else if z == 0.0 {
                asym_r(t, r)?
            } else {
                asym_generic(r, z, &solve_theta(r, z)?)?.eval(t)
            };
            let scale = if norm == Normalization::Haar { 2.0 } else { 1.0 };
            Ok((scale * v, None))
        }
    }
}

fn cmd_kernel(cli: &Cli, a: &KernelArgs, out: &mut Emitter) -> Outcome {
    let q = quad_spec(cli)?;
    let norm = cli.normalization.into();
    for &t in &a.t.0 {
        check_time(t)?;
    }
    for &r in &a.r.0 {
        for &z in &a.z.0 {
            check_chart(r, z)?;
            if matches!(a.method, Method::Axis) && r != 0.0 {
                return Err(Failure::Usage(format!("--method axis needs r = 0, got {r}")));
            }
        }
    }
    let method = match a.method {
        Method::Integral => "integral",
        Method::Axis => "axis",
        Method::Asym => "asym",
    };
    let points: Vec<(f64, f64, f64)> = a
        .t
        .0
        .iter()
        .flat_map(|&t| a.r.0.iter().flat_map(move |&r| a.z.0.iter().map(move |&z| (t, r, z))))
        .collect();
    // evaluated in parallel, emitted in grid order up to the first failure
    let values: Vec<_> = points.par_iter().map(|&(t, r, z)| kernel_value(t, r, z, a.method, &q, norm)).collect();
    for (&(t, r, z), v) in points.iter().zip(values) {
        match v {
            Ok((value, err)) => out.emit(
                &Record::new()
                    .with("t", t)
                    .with("r", r)
                    .with("z", z)
                    .with("value", value)
                    .with("err_estimate", err)
                    .with("method", method),
            )?,
            Err(e) => {
                let f = Failure::from(e);
                if let Failure::Numerical(msg) = &f {
                    out.emit(
                        &Record::new()
                            .with("error", msg.as_str())
                            .with("kind", "numerical_non_convergence")
                            .with("t", t)
                            .with("r", r)
                            .with("z", z),
                    )?;
                }
                return Err(f);
            }
        }
    }
    Ok(())
}

fn cmd_distance(a: &DistanceArgs, out: &mut Emitter) -> Outcome {
    for &r in &a.r.0 {
        for &z in &a.z.0 {
            check_chart(r, z)?;
            let d = distance_squared(r, z)?;
            out.emit(
                &Record::new()
                    .with("r", r)
                    .with("z", z)
                    .with("theta", d.theta)
                    .with("d2", d.d2)
                    .with("case_tag", d.case_tag.as_str()),
            )?;
        }
    }
    Ok(())
}

fn cmd_limit(cli: &Cli, a: &LimitArgs, out: &mut Emitter) -> Outcome {
    let q = quad_spec(cli)?;
    let conv = match a.convention {
        ConvArg::Gaveau => GaveauConvention::Gaveau,
        ConvArg::Halved => GaveauConvention::Halved,
    };
    for &t in &a.t.0 {
        check_time(t)?;
    }
    for &r in &a.r.0 {
        for &z in &a.z.0 {
            for row in dilation_limit_check(&a.t.0, r, z, &q, cli.normalization.into(), conv)? {
                out.emit(
                    &Record::new()
                        .with("t", row.t)
                        .with("r", r)
                        .with("z", z)
                        .with("scaled_value", row.scaled_value)
                        .with("h1_value", row.h1_value)
                        .with("ratio", row.ratio),
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_ineq(cli: &Cli, a: &IneqArgs, out: &mut Emitter) -> Outcome {
    let norm: Normalization = cli.normalization.into();
    for &t in &a.t.0 {
        check_time(t)?;
    }
    let grid: Vec<(f64, f64)> = a.r.0.iter().flat_map(|&r| a.z.0.iter().map(move |&z| (r, z))).collect();
    for &(r, z) in &grid {
        check_chart(r, z)?;
    }
    match a.check {
        Check::Liyau => {
            let p = LiYauParams::new(a.alpha)?;
            let q = QuadSpec { abs_tol: 1e-14, rel_tol: 1e-12, ..quad_spec(cli)? };
            let mut failed = 0;
            for &t in &a.t.0 {
                for rep in liyau_check(t, a.eps, &grid, p, &q, norm)? {
                    failed += !rep.pass as usize;
                    let verdict = match rep.verdict {
                        Verdict::Pass => "pass",
                        Verdict::Fail => "fail",
                        Verdict::Inconclusive => "inconclusive",
                    };
                    out.emit(
                        &Record::new()
                            .with("check", "liyau")
                            .with("t", t)
                            .with("r", rep.r)
                            .with("z", rep.z)
                            .with("lhs", rep.lhs)
                            .with("rhs", rep.rhs)
                            .with("slack", rep.slack)
                            .with("budget", rep.budget)
                            .with("pass", rep.pass)
                            .with("verdict", verdict)
                            .with("gamma_only_slack", rep.gamma_only_slack),
                    )?;
                }
            }
            if failed > 0 {
                return Err(Failure::Check(format!("{failed} Li–Yau points failed")));
            }
        }
        Check::Gradient => {
            let q = quad_spec(cli)?;
            for &t in &a.t.0 {
                let rep = gradient_bound_check(t, &grid, &q, norm)?;
                for p in &rep.points {
                    out.emit(
                        &Record::new()
                            .with("check", "gradient")
                            .with("t", t)
                            .with("r", p.r)
                            .with("z", p.z)
                            .with("sqrt_gamma", p.sqrt_gamma)
                            .with("scale", p.scale)
                            .with("ratio", p.ratio)
                            .with("c_hat", rep.c_hat),
                    )?;
                }
            }
        }
        Check::ConstantC => {
            let q = quad_spec(cli)?;
            for &t in &a.t.0 {
                let c = constant_c(t, a.r_max, &q, norm)?;
                out.emit(
                    &Record::new()
                        .with("check", "constant_c")
                        .with("t", t)
                        .with("c", c)
                        .with("t_times_c", t * c)
                        .with("r_max", a.r_max),
                )?;
            }
        }
        Check::Harnack => {
            let q = quad_spec(cli)?;
            let t1 = a.t.0[0];
            let t2 = a.t2.ok_or_else(|| Failure::Usage("--check harnack needs --t2".into()))?;
            let mut pairs: Vec<PointPair> = grid.iter().map(|&g| (g, g)).collect();
            for (i, &g1) in grid.iter().enumerate() {
                for (j, &g2) in grid.iter().enumerate() {
                    if i != j {
                        pairs.push((g1, g2));
                    }
                }
            }
            let rep = harnack_spot_check(t1, t2, &pairs, &q, norm)?;
            out.emit(
                &Record::new()
                    .with("check", "harnack")
                    .with("t1", t1)
                    .with("t2", t2)
                    .with("a1", rep.a1)
                    .with("a2", rep.a2)
                    .with("pairs", pairs.len()),
            )?;
        }
    }
    Ok(())
}

fn cmd_mc(cli: &Cli, a: &McArgs, out: &mut Emitter) -> Outcome {
    let q = quad_spec(cli)?;
    let norm: Normalization = cli.normalization.into();
    let cfg = MCConfig {
        seed: a.seed,
        n_paths: a.paths,
        n_steps: a.steps,
        t_final: a.t,
        scheme: match a.scheme {
            SchemeArg::ExponentialIncrement => Scheme::ExponentialIncrement,
            SchemeArg::GeometricMidpoint => Scheme::GeometricMidpoint,
        },
    };
    cfg.validate()?;
    let grid = BinGrid::uniform(a.r_max, a.r_bins, a.z_bins)?;
    let sample = simulate_paths(&cfg)?;
    if let Some(path) = &a.samples {
        let mut w = BufWriter::new(File::create(path)?);
        write_csv(&sample, &mut w)?;
        w.flush()?;
    }
    let cmp = compare_density(&sample, &grid, &q, norm)?;
    if a.bins {
        let nz = grid.z_edges.len() - 1;
        for (k, &count) in cmp.estimate.counts.iter().enumerate() {
            let (i, j) = (k / nz, k % nz);
            out.emit(
                &Record::new()
                    .with("r_lo", grid.r_edges[i])
                    .with("r_hi", grid.r_edges[i + 1])
                    .with("z_lo", grid.z_edges[j])
                    .with("z_hi", grid.z_edges[j + 1])
                    .with("count", count as usize)
                    .with("density", cmp.estimate.density[k])
                    .with("half_width", cmp.estimate.half_width[k])
                    .with("kernel_density", cmp.kernel_density[k])
                    .with("agrees", cmp.agrees[k]),
            )?;
        }
    }
    let ks = z_symmetry(&sample);
    let folded = sample.paths.iter().filter(|p| p.fold_count != 0).count();
    let pass = cmp.fraction >= 0.9 && ks.accepted && !cmp.insufficient_sample;
    out.emit(
        &Record::new()
            .with("t", a.t)
            .with("paths", a.paths)
            .with("steps", a.steps)
            .with("seed", a.seed as i64)
            .with("normalization", if norm == Normalization::Haar { "haar" } else { "published" })
            .with("fraction_agreeing", cmp.fraction)
            .with("occupied_bins", cmp.occupied)
            .with("agreeing_bins", cmp.agreeing)
            .with("kernel_mass", cmp.kernel_mass)
            .with("outside", cmp.estimate.outside)
            .with("ks_statistic", ks.statistic)
            .with("ks_critical", ks.critical)
            .with("ks_accepted", ks.accepted)
            .with("max_det_error", sample.max_det_error)
            .with("non_cylindric", sample.non_cylindric)
            .with("folded_paths", folded)
            .with("insufficient_sample", cmp.insufficient_sample)
            .with("pass", pass),
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Check("Monte Carlo comparison failed".into()))
    }
}

fn cmd_selftest(cli: &Cli, a: &SelftestArgs, out: &mut Emitter) -> Outcome {
    let suite = match a.suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let mut failed = Vec::new();
    for id in suite.criteria() {
        let r = run_criterion(id, cli.normalization.into());
        eprintln!("{}", r.line());
        if !r.pass {
            failed.push(id);
        }
        out.emit(
            &Record::new()
                .with("id", r.id as usize)
                .with("name", r.name.as_str())
                .with("pass", r.pass)
                .with("detail", r.detail.as_str())
                .with("seconds", r.seconds)
                .with("values", Field::Json(json!(r.values))),
        )?;
    }
    out.emit(
        &Record::new()
            .with("summary", true)
            .with("passed", failed.is_empty())
            .with("failed", Field::Json(json!(failed))),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("criteria {failed:?} failed")))
    }
}

fn run(cli: &Cli) -> Outcome {
    let sink: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut out = Emitter::new(sink, cli.format);
    let res = match &cli.cmd {
        Cmd::Kernel(a) => cmd_kernel(cli, a, &mut out),
        Cmd::Distance(a) => cmd_distance(a, &mut out),
        Cmd::Limit(a) => cmd_limit(cli, a, &mut out),
        Cmd::Ineq(a) => cmd_ineq(cli, a, &mut out),
        Cmd::Mc(a) => cmd_mc(cli, a, &mut out),
        Cmd::Selftest(a) => cmd_selftest(cli, a, &mut out),
    };
    out.flush()?;
    res
}

fn main() -> ExitCode {
    let args = match config::merged_args(std::env::args_os().collect(), Cli::subcommand_names()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Check(m) => (1, m),
                Failure::Usage(m) => (2, m),
                Failure::Numerical(m) => (3, m),
                Failure::Io(e) => (2, e.to_string()),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

impl Cli {
    fn subcommand_names() -> Vec<String> {
        use clap::CommandFactory;
        Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect()
    }
}
