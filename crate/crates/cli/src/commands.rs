//! Subcommands: each resolves its configuration, runs, and returns tables,
//! a JSON summary and the outcome of its statistical checks.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracmc_core::bounds::{asymptotic_ci, markov_ci};
use fracmc_core::catalog::reference_value;
use fracmc_core::diagnostics::{
    bias_decay_check, clt_replication, fit_tail_exponent, flatness, reference_for, scaling_check, CltSettings,
    Coupling, Part,
};
use fracmc_core::special::normal_upper_quantile;
use fracmc_core::stable::sample_terminal_state;
use fracmc_core::{estimate, BoundInputs, BoundsReport, Executor, RngStream, Shape, TailBoundParams};
use serde_json::{json, Value};

use crate::config::{Config, Defaults, ProblemArgs, StepSpec};
use crate::error::{CliError, Result};
use crate::exec::Threads;
use crate::figures::{grid, run_figures, Check, FigureSettings};
use crate::output::{float, Manifest, Table};

#[derive(Parser, Debug)]
#[command(name = "fracmc", version, about = "Monte Carlo solver for time-fractional PDEs driven by stable processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate u(t, x) with its confidence intervals.
    Estimate(EstimateArgs),
    /// Closed-form constants and error bounds.
    Bounds(BoundsArgs),
    /// Log-log slope of the tail of |X_T|.
    Tail(TailArgs),
    /// Replicated estimates against the exact value: normality and coverage.
    Clt(CltArgs),
    /// Estimates over a range of window lengths, divided by a power of the length.
    Scaling(ScalingArgs),
    /// Decay of the discretisation error in the step length.
    BiasDecay(BiasDecayArgs),
    /// CSV data for the replication figures.
    Figures(FiguresArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct TailParamArgs {
    /// Tail-bound slack epsilon (default 0.01 C_beta sigma^beta).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Tail-bound splitting parameter S (default ln 2 / beta).
    #[arg(long)]
    pub s: Option<f64>,
    /// Threshold M0 beyond which the tail bound applies.
    #[arg(long)]
    pub m0: Option<f64>,
    /// Bound on E[phi(X_T)^2] for initial data outside the catalog.
    #[arg(long)]
    pub phi_sq: Option<f64>,
    /// Bound on E[g(X_T)^2] for forcings outside the catalog.
    #[arg(long)]
    pub g_sq: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tail: TailParamArgs,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tail: TailParamArgs,
}

#[derive(Args, Debug)]
pub struct TailArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Lower quantile of the fit window.
    #[arg(long, default_value_t = 0.99)]
    pub q_lo: f64,
    /// Upper quantile of the fit window.
    #[arg(long, default_value_t = 0.9999)]
    pub q_hi: f64,
}

#[derive(Args, Debug)]
pub struct CltArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tail: TailParamArgs,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PartArg {
    Total,
    Phi,
    Forcing,
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Window lengths: "start:step:end" or a comma-separated list.
    #[arg(long, default_value = "1:1:10")]
    pub abar_grid: String,
    /// Power of the window length to divide by (derived for catalog problems).
    #[arg(long, allow_negative_numbers = true)]
    pub exponent: Option<f64>,
    #[arg(long, value_enum, default_value_t = PartArg::Total)]
    pub part: PartArg,
}

#[derive(Args, Debug)]
pub struct BiasDecayArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Coarse steps, each an integer multiple of the reference step.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    pub h_grid: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub h_ref: f64,
}

#[derive(Args, Debug)]
pub struct FiguresArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Subset of figures, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[arg(long, default_value_t = 0.1)]
    pub abar_step: f64,
    #[arg(long, default_value_t = 0.1)]
    pub x_step: f64,
    /// Step of the confidence-band experiment.
    #[arg(long, default_value_t = 1e-3)]
    pub h_ci: f64,
}

/// Everything a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Value,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Result of a full run: where things were written and the outcome.
pub struct Report {
    pub outcome: Outcome,
    pub written: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn tail_params(cfg: &Config, args: &TailParamArgs) -> Result<TailBoundParams> {
    let problem = cfg.problem()?;
    let d = TailBoundParams::default_for(&problem)?;
    Ok(TailBoundParams::new(
        args.epsilon.unwrap_or(d.epsilon),
        args.s.unwrap_or(d.s),
        args.m0.unwrap_or(d.m0),
        d.delta,
    )?)
}

fn bounds_report(cfg: &Config, args: &TailParamArgs, n: u64, h: f64) -> Result<BoundsReport> {
    let problem = cfg.problem()?;
    let inputs = BoundInputs { phi_sq: args.phi_sq, g_sq: args.g_sq };
    Ok(BoundsReport::compute(&problem, tail_params(cfg, args)?, n, h, inputs)?)
}

fn problem_columns(cfg: &Config) -> Vec<String> {
    let mut cols: Vec<String> = ["alpha", "beta", "gamma", "d", "abar"].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=cfg.d).map(|i| format!("x{i}")));
    cols
}

fn problem_values(cfg: &Config) -> Result<Vec<String>> {
    let p = cfg.problem()?;
    let mut v = vec![float(cfg.alpha), float(cfg.beta), float(p.gamma), cfg.d.to_string(), float(p.abar())];
    v.extend(cfg.x.iter().map(|x| float(*x)));
    Ok(v)
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn estimate_cmd<E: Executor>(cfg: &Config, tail: &TailParamArgs, exec: &E) -> Result<Outcome> {
    let problem = cfg.problem()?;
    let h = cfg.step()?;
    let r = estimate(&problem, cfg.n, h, cfg.seed, exec)?;
    let bounds = bounds_report(cfg, tail, cfg.n, h).ok();
    let asym = bounds.map(|b| asymptotic_ci(r.mean, b.z_sq_bound.sqrt(), r.n, cfg.level)).transpose()?;
    let markov = bounds.map(|b| markov_ci(r.mean, b.l2_bound, cfg.level)).transpose()?;
    let mut header = problem_columns(cfg);
    header.extend(
        [
            "h",
            "n",
            "mean",
            "variance",
            "stderr",
            "max_path_len",
            "seed",
            "level",
            "asym_lo",
            "asym_hi",
            "markov_lo",
            "markov_hi",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    let mut table = Table::with_header("estimate", header);
    let mut row = problem_values(cfg)?;
    row.extend([
        float(h),
        r.n.to_string(),
        float(r.mean),
        float(r.variance()),
        float(r.stderr()),
        r.max_path_len.to_string(),
        r.seed.to_string(),
        float(cfg.level),
        opt_float(asym.map(|i| i.lo)),
        opt_float(asym.map(|i| i.hi)),
        opt_float(markov.map(|i| i.lo)),
        opt_float(markov.map(|i| i.hi)),
    ]);
    table.push(row);
    let summary = json!({
        "mean": r.mean,
        "variance": r.variance(),
        "stderr": r.stderr(),
        "h": h,
        "max_path_len": r.max_path_len,
        "asymptotic_ci": asym.map(|i| [i.lo, i.hi]),
        "markov_ci": markov.map(|i| [i.lo, i.hi]),
        "exact": reference_value(&problem),
    });
    Ok(Outcome { tables: vec![table], summary, checks: Vec::new() })
}

pub fn bounds_cmd(cfg: &Config, tail: &TailParamArgs) -> Result<Outcome> {
    let h = cfg.step()?;
    let b = bounds_report(cfg, tail, cfg.n, h)?;
    let mut t = Table::new(
        "bounds",
        &[
            "fingerprint",
            "n",
            "h",
            "c_beta",
            "m1_tail",
            "m2_tail",
            "phi_sq_bound",
            "m2_const",
            "var_bound",
            "bias_const",
            "bias2_const",
            "z_sq_bound",
            "l2_bound",
        ],
    );
    t.push(vec![
        cfg.fingerprint(),
        cfg.n.to_string(),
        float(h),
        float(b.c_beta),
        float(b.m1_tail),
        float(b.m2_tail),
        float(b.phi_sq_bound),
        float(b.m2_const),
        float(b.var_bound),
        float(b.bias_const),
        float(b.bias2_const),
        float(b.z_sq_bound),
        float(b.l2_bound),
    ]);
    let summary = json!({
        "c_beta": b.c_beta, "m1_tail": b.m1_tail, "m2_tail": b.m2_tail, "phi_sq_bound": b.phi_sq_bound,
        "m2_const": b.m2_const, "var_bound": b.var_bound, "bias_const": b.bias_const, "bias2_const": b.bias2_const,
        "z_sq_bound": b.z_sq_bound, "l2_bound": b.l2_bound,
    });
    Ok(Outcome { tables: vec![t], summary, checks: Vec::new() })
}

/// Tolerance on the fitted tail slope.
pub const TAIL_TOLERANCE: f64 = 0.15;

pub fn tail_cmd<E: Executor>(cfg: &Config, q_lo: f64, q_hi: f64, exec: &E) -> Result<Outcome> {
    let p = cfg.problem()?;
    let n = cfg.n;
    let chunks = exec.map(fracmc_core::exec::chunk_count(n), |ci| {
        fracmc_core::exec::chunk_range(n, ci)
            .map(|k| {
                let mut rng = RngStream::new(cfg.seed, k);
                let s = sample_terminal_state(p.sub, p.stable, p.win, &p.x, &mut rng);
                s.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect::<Vec<f64>>()
    });
    let samples: Vec<f64> = chunks.into_iter().flatten().collect();
    let fit = fit_tail_exponent(&samples, q_lo, q_hi)?;
    let mut t = Table::new("tail", &["threshold", "survival", "fit_survival"]);
    for &(u, s) in &fit.points {
        t.push(vec![float(u), float(s), float((fit.intercept + fit.slope * u.ln()).exp())]);
    }
    let mut checks = Vec::new();
    if cfg.beta < 2.0 {
        checks.push(Check {
            name: "tail slope".into(),
            passed: (fit.slope + cfg.beta).abs() <= TAIL_TOLERANCE,
            detail: format!("slope {:.4} vs -beta = {} within {TAIL_TOLERANCE}", fit.slope, -cfg.beta),
        });
    }
    let summary = json!({
        "slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared,
        "u_min": fit.u_min, "u_max": fit.u_max, "n_points": fit.n_points,
    });
    Ok(Outcome { tables: vec![t], summary, checks })
}

pub fn clt_cmd<E: Executor>(cfg: &Config, tail: &TailParamArgs, reps: usize, exec: &E) -> Result<Outcome> {
    let p = cfg.problem()?;
    let h = cfg.step()?;
    let reference = reference_for(&p, cfg.n, h, cfg.seed, exec)?;
    let m_bound = bounds_report(cfg, tail, cfg.n, h).ok().map(|b| b.z_sq_bound.sqrt());
    let settings = CltSettings { n: cfg.n, reps, h, seed: cfg.seed, level: cfg.level, m_bound };
    let report = clt_replication(&p, settings, reference, exec)?;
    let z = normal_upper_quantile((1.0 - cfg.level) / 2.0);
    let mut t = Table::new("clt", &["replication", "estimate", "standardized", "covered"]);
    for (r, (e, s)) in report.estimates.iter().zip(&report.standardized_values).enumerate() {
        t.push(vec![r.to_string(), float(e.mean), float(*s), u8::from(s.abs() <= z).to_string()]);
    }
    let upper = if cfg.g_is_zero() { 0.02 } else { 0.03 };
    let checks = vec![
        Check {
            name: "normality".into(),
            passed: report.normality_pvalue > 0.01,
            detail: format!("KS p-value {:.4}", report.normality_pvalue),
        },
        Check {
            name: "coverage".into(),
            passed: report.empirical_coverage >= cfg.level - 0.02 && report.empirical_coverage <= cfg.level + upper,
            detail: format!("coverage {:.4} at level {}", report.empirical_coverage, cfg.level),
        },
    ];
    let summary = json!({
        "reference": reference.value, "reference_stderr": reference.stderr, "h": h,
        "sigma_hat": report.sigma_hat, "normality_stat": report.normality_stat,
        "normality_pvalue": report.normality_pvalue, "coverage": report.empirical_coverage,
        "bound_coverage": report.bound_coverage, "m_bound": m_bound,
    });
    Ok(Outcome { tables: vec![t], summary, checks })
}

/// Parses "start:step:end" or "a,b,c".
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Config(format!("--abar-grid {s:?}: expected start:step:end or a comma-separated list"));
    let values = if s.contains(':') {
        let parts: Vec<f64> =
            s.split(':').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let [start, step, end] = parts[..] else { return Err(bad()) };
        if !(step > 0.0 && end >= start) {
            return Err(bad());
        }
        grid(start, end, step)
    } else {
        s.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?
    };
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(CliError::Config(format!("--abar-grid {s:?}: window lengths must be positive")));
    }
    Ok(values)
}

/// `ā`-exponent of `E φ(X_T)` for `φ = κ|x|^η` (`αη/β`) and of the forcing
/// term for `g = κ|x|^η` (`α(1 + η/β)`), at x = 0.
fn homogeneity(cfg: &Config, part: Part) -> Option<f64> {
    let phi = match cfg.phi.shape() {
        Shape::Const(k) if k == 0.0 => None,
        Shape::Const(_) => Some(0.0),
        Shape::Power { eta, .. } => Some(cfg.alpha * eta / cfg.beta),
        Shape::Opaque => return None,
    };
    let forcing = match cfg.g.shape() {
        Shape::Const(k) if k == 0.0 => None,
        Shape::Const(_) => Some(cfg.alpha),
        Shape::Power { eta, .. } => Some(cfg.alpha * (1.0 + eta / cfg.beta)),
        Shape::Opaque => return None,
    };
    match part {
        Part::Phi => phi,
        Part::Forcing => forcing,
        Part::Total => match (phi, forcing) {
            (Some(e), None) | (None, Some(e)) => Some(e),
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        },
    }
}

pub fn scaling_cmd<E: Executor>(cfg: &Config, args: &ScalingArgs, exec: &E) -> Result<Outcome> {
    let p = cfg.problem()?;
    let grid = parse_grid(&args.abar_grid)?;
    let part = match args.part {
        PartArg::Total => Part::Total,
        PartArg::Phi => Part::Phi,
        PartArg::Forcing => Part::Forcing,
    };
    let exponent = match args.exponent.or_else(|| homogeneity(cfg, part)) {
        Some(e) => e,
        None => {
            return Err(CliError::Config("no closed-form scaling exponent for this problem; pass --exponent".into()))
        }
    };
    let points = scaling_check(&p, &grid, exponent, cfg.n, cfg.step()?, cfg.seed, part, exec)?;
    let mut t = Table::new("scaling", &["abar", "estimate", "stderr", "ratio"]);
    for pt in &points {
        t.push(vec![float(pt.abar), float(pt.estimate), float(pt.stderr), float(pt.ratio)]);
    }
    let flat = flatness(&points);
    let checks = vec![Check {
        name: "flat ratios".into(),
        passed: flat.is_flat(),
        detail: format!("max/min - 1 = {:.4e}, tolerance {:.4e}", flat.spread, flat.tolerance),
    }];
    let summary = json!({ "exponent": exponent, "spread": flat.spread, "tolerance": flat.tolerance });
    Ok(Outcome { tables: vec![t], summary, checks })
}

/// Tolerances on the fitted slopes of the mean and mean-square differences.
pub const BIAS_SLOPE_TOLERANCE: f64 = 0.1;
pub const BIAS_SQ_SLOPE_TOLERANCE: f64 = 0.15;

pub fn bias_decay_cmd<E: Executor>(cfg: &Config, args: &BiasDecayArgs, exec: &E) -> Result<Outcome> {
    let p = cfg.problem()?;
    let decay = bias_decay_check(&p, &args.h_grid, args.h_ref, cfg.n, cfg.seed, Coupling::CommonPath, exec)?;
    let mut t = Table::new("bias_decay", &["h", "mean_abs_diff", "stderr", "mean_sq_diff", "stderr_sq"]);
    for pt in &decay.points {
        t.push(vec![float(pt.h), float(pt.mean_abs), float(pt.stderr_abs), float(pt.mean_sq), float(pt.stderr_sq)]);
    }
    let r = p.gamma / p.beta();
    let checks = if decay.exact {
        vec![Check {
            name: "bias decay".into(),
            passed: true,
            detail: "g = 0: coarse and fine estimators agree exactly".into(),
        }]
    } else {
        vec![
            Check {
                name: "mean difference slope".into(),
                passed: (decay.slope - r).abs() <= BIAS_SLOPE_TOLERANCE,
                detail: format!("slope {:.4} vs gamma/beta = {r:.4}", decay.slope),
            },
            Check {
                name: "mean-square difference slope".into(),
                passed: (decay.sq_slope - 2.0 * r).abs() <= BIAS_SQ_SLOPE_TOLERANCE,
                detail: format!("slope {:.4} vs 2 gamma/beta = {:.4}", decay.sq_slope, 2.0 * r),
            },
        ]
    };
    let summary = json!({ "slope": decay.slope, "sq_slope": decay.sq_slope, "exact": decay.exact, "expected": r });
    Ok(Outcome { tables: vec![t], summary, checks })
}

pub fn figure_settings(cfg: &Config, args: &FiguresArgs) -> Result<FigureSettings> {
    let h = match cfg.h {
        StepSpec::Fixed(h) if h > 0.0 => h,
        StepSpec::Fixed(_) => return Err(CliError::Config("figures need a step h > 0".into())),
        StepSpec::Auto(mode) => fracmc_core::default_step(cfg.n, cfg.beta, 0.5, mode),
    };
    for (name, v) in [("--abar-step", args.abar_step), ("--x-step", args.x_step), ("--h-ci", args.h_ci)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{name} = {v}: must be > 0")));
        }
    }
    Ok(FigureSettings {
        alpha: cfg.alpha,
        beta: cfg.beta,
        c: cfg.c,
        n: cfg.n,
        h,
        h_ci: args.h_ci,
        abar_step: args.abar_step,
        x_step: args.x_step,
        level: cfg.level,
        seed: cfg.seed,
    })
}

pub fn figures_cmd<E: Executor>(cfg: &Config, args: &FiguresArgs, exec: &E) -> Result<Outcome> {
    let set = run_figures(&figure_settings(cfg, args)?, &args.only, exec)?;
    let summary = json!({
        "figures": set.tables.iter().map(|t| t.name.clone()).collect::<Vec<_>>(),
    });
    Ok(Outcome { tables: set.tables, summary, checks: set.checks })
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Bounds(_) => "bounds",
            Command::Tail(_) => "tail",
            Command::Clt(_) => "clt",
            Command::Scaling(_) => "scaling",
            Command::BiasDecay(_) => "bias_decay",
            Command::Figures(_) => "figures",
        }
    }

    fn problem_args(&self) -> &ProblemArgs {
        match self {
            Command::Estimate(a) => &a.problem,
            Command::Bounds(a) => &a.problem,
            Command::Tail(a) => &a.problem,
            Command::Clt(a) => &a.problem,
            Command::Scaling(a) => &a.problem,
            Command::BiasDecay(a) => &a.problem,
            Command::Figures(a) => &a.problem,
        }
    }

    fn defaults(&self) -> Defaults {
        match self {
            Command::Clt(_) => Defaults { n: 10_000, ..Defaults::default() },
            Command::Tail(_) => Defaults { n: 1_000_000, ..Defaults::default() },
            Command::Scaling(_) => Defaults { n: 100_000, ..Defaults::default() },
            Command::BiasDecay(_) => Defaults { g: "pow(norm(x), 0.5)", phi: "0", ..Defaults::default() },
            _ => Defaults::default(),
        }
    }

    /// Resolves the configuration, runs, writes every table and the manifest.
    pub fn run(&self) -> Result<Report> {
        let start = Instant::now();
        let cfg = Config::resolve(self.problem_args(), &self.defaults())?;
        let exec = Threads::new(cfg.workers);
        let outcome = match self {
            Command::Estimate(a) => estimate_cmd(&cfg, &a.tail, &exec)?,
            Command::Bounds(a) => bounds_cmd(&cfg, &a.tail)?,
            Command::Tail(a) => tail_cmd(&cfg, a.q_lo, a.q_hi, &exec)?,
            Command::Clt(a) => clt_cmd(&cfg, &a.tail, a.reps, &exec)?,
            Command::Scaling(a) => scaling_cmd(&cfg, a, &exec)?,
            Command::BiasDecay(a) => bias_decay_cmd(&cfg, a, &exec)?,
            Command::Figures(a) => figures_cmd(&cfg, a, &exec)?,
        };
        let written = outcome.tables.iter().map(|t| t.write(&cfg.out)).collect::<Result<Vec<_>>>()?;
        let mut summary = outcome.summary.clone();
        if let Some(obj) = summary.as_object_mut() {
            let checks: Vec<Value> = outcome
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
                .collect();
            obj.insert("checks".into(), Value::Array(checks));
        }
        let manifest = Manifest {
            command: self.name().to_string(),
            config: cfg.echo(),
            fingerprint: cfg.fingerprint(),
            seed: cfg.seed,
            summary,
        }
        .write(&cfg.out, &written, start.elapsed())?;
        Ok(Report { outcome, written, manifest })
    }
}
