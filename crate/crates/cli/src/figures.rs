//! The Monte Carlo experiments of the replication figures, as CSV tables.

use fracmc_core::bounds::{asymptotic_ci, z_second_moment_bound};
use fracmc_core::catalog::{forcing_reference, phi_reference};
use fracmc_core::diagnostics::{flatness, running_means, scaling_check, Part};
use fracmc_core::estimator::{estimate_parts, sample_values};
use fracmc_core::{derive_seed, estimate, Executor, Function, ProblemSpec, StableSpec, SubordinatorSpec, TimeWindow};

use crate::error::{CliError, Result};
use crate::output::{float, Table};

pub const FIGURES: [&str; 6] = ["fig4_1a", "fig4_1b", "fig4_2", "fig4_3", "fig4_4", "fig4_5"];

/// Exponent of |x| in the initial datum and the forcing.
const ETA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigureSettings {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    /// Samples per grid point (and the largest sample size of the CI band).
    pub n: u64,
    /// Step for the ā and x sweeps.
    pub h: f64,
    /// Step for the confidence band.
    pub h_ci: f64,
    pub abar_step: f64,
    pub x_step: f64,
    pub level: f64,
    pub seed: u64,
}

impl Default for FigureSettings {
    fn default() -> Self {
        FigureSettings {
            alpha: 0.5,
            beta: 1.5,
            c: 1.0,
            n: 100_000,
            h: 0.01,
            h_ci: 1e-3,
            abar_step: 0.1,
            x_step: 0.1,
            level: 0.95,
            seed: 1,
        }
    }
}

/// Outcome of a statistical check attached to a command.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct FigureSet {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

/// `start, start + step, ..., end`, with each point rounded to 1e-9.
pub fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
}

impl FigureSettings {
    fn problem(&self, abar: f64, x: f64, phi: Function, g: Function) -> Result<ProblemSpec> {
        Ok(ProblemSpec::new(
            SubordinatorSpec::new(self.alpha)?,
            StableSpec::new(self.beta, self.c, 1)?,
            TimeWindow::with_length(abar)?,
        )
        .with_x(vec![x])
        .with_phi(phi)
        .with_g(g))
    }

    fn phi_only(&self, abar: f64) -> Result<ProblemSpec> {
        self.problem(abar, 0.0, Function::power(1.0, ETA), Function::zero())
    }

    fn with_forcing(&self, abar: f64, x: f64) -> Result<ProblemSpec> {
        self.problem(abar, x, Function::power(1.0, ETA), Function::power(1.0, ETA))
    }
}

fn tag(figure: &str) -> impl Fn(CliError) -> CliError + '_ {
    move |e| match e {
        CliError::Numerical(m) => CliError::Numerical(format!("{figure}: {m}")),
        CliError::Config(m) => CliError::Config(format!("{figure}: {m}")),
        other => other,
    }
}

/// Runs the experiments behind the requested figures (all when `only` is empty).
pub fn run_figures<E: Executor>(s: &FigureSettings, only: &[String], exec: &E) -> Result<FigureSet> {
    for name in only {
        if !FIGURES.contains(&name.as_str()) {
            return Err(CliError::Config(format!("unknown figure {name:?}; known: {}", FIGURES.join(", "))));
        }
    }
    let wants = |name: &str| only.is_empty() || only.iter().any(|o| o == name);
    let mut set = FigureSet::default();
    if wants("fig4_1a") || wants("fig4_1b") {
        let (a, b, checks) = fig4_1(s, exec).map_err(tag("fig4_1"))?;
        if wants("fig4_1a") {
            set.tables.push(a);
        }
        if wants("fig4_1b") {
            set.tables.push(b);
        }
        set.checks.extend(checks);
    }
    if wants("fig4_2") || wants("fig4_3") {
        let (a, b, check) = fig4_2_3(s, exec).map_err(tag("fig4_2"))?;
        if wants("fig4_2") {
            set.tables.push(a);
        }
        if wants("fig4_3") {
            set.tables.push(b);
            set.checks.push(check);
        }
    }
    if wants("fig4_4") {
        set.tables.push(fig4_4(s, exec).map_err(tag("fig4_4"))?);
    }
    if wants("fig4_5") {
        set.tables.push(fig4_5(s, exec).map_err(tag("fig4_5"))?);
    }
    Ok(set)
}

/// u_N over ā with g = 0, raw and divided by ā^{αη/β}.
fn fig4_1<E: Executor>(s: &FigureSettings, exec: &E) -> Result<(Table, Table, Vec<Check>)> {
    let abars = grid(1.0, 10.0, s.abar_step);
    let exponent = s.alpha * ETA / s.beta;
    let template = s.phi_only(1.0)?;
    let points = scaling_check(&template, &abars, exponent, s.n, 0.0, derive_seed(s.seed, 1), Part::Total, exec)?;
    let mut raw = Table::new("fig4_1a", &["abar", "u_n", "stderr", "exact"]);
    let mut scaled = Table::new("fig4_1b", &["abar", "ratio", "ratio_stderr", "exact_ratio"]);
    let mut worst_z: f64 = 0.0;
    for p in &points {
        let exact = phi_reference(&s.phi_only(p.abar)?).expect("closed form at x = 0");
        worst_z = worst_z.max((p.estimate - exact).abs() / p.stderr);
        raw.push(vec![float(p.abar), float(p.estimate), float(p.stderr), float(exact)]);
        scaled.push(vec![float(p.abar), float(p.ratio), float(p.ratio_stderr()), float(exact / p.abar.powf(exponent))]);
    }
    let flat = flatness(&points);
    let checks = vec![
        Check {
            name: "fig4_1b flat".into(),
            passed: flat.is_flat(),
            detail: format!("max/min - 1 = {:.4e}, tolerance {:.4e}", flat.spread, flat.tolerance),
        },
        Check {
            name: "fig4_1a closed form".into(),
            passed: worst_z < 4.0,
            detail: format!("largest deviation {worst_z:.2} standard errors"),
        },
    ];
    Ok((raw, scaled, checks))
}

/// u_N^h over ā, and its forcing part divided by ā^{α(1+η/β)}.
fn fig4_2_3<E: Executor>(s: &FigureSettings, exec: &E) -> Result<(Table, Table, Check)> {
    let abars = grid(1.0, 10.0, s.abar_step);
    let exponent = s.alpha * (1.0 + ETA / s.beta);
    let seed = derive_seed(s.seed, 2);
    let mut total = Table::new("fig4_2", &["abar", "u_nh", "stderr"]);
    let mut forcing =
        Table::new("fig4_3", &["abar", "forcing", "forcing_stderr", "ratio", "ratio_stderr", "exact_ratio"]);
    let mut points = Vec::with_capacity(abars.len());
    for (i, &abar) in abars.iter().enumerate() {
        let p = s.with_forcing(abar, 0.0)?;
        let parts = estimate_parts(&p, s.n, s.h, derive_seed(seed, i as u64), exec)?;
        let scale = abar.powf(exponent);
        let exact = forcing_reference(&p).expect("closed form at x = 0");
        total.push(vec![float(abar), float(parts.total.mean), float(parts.total.stderr())]);
        let f = parts.forcing;
        forcing.push(vec![
            float(abar),
            float(f.mean),
            float(f.stderr()),
            float(f.mean / scale),
            float(f.stderr() / scale),
            float(exact / scale),
        ]);
        points.push(fracmc_core::diagnostics::ScalingPoint {
            abar,
            estimate: f.mean,
            stderr: f.stderr(),
            ratio: f.mean / scale,
        });
    }
    let flat = flatness(&points);
    let check = Check {
        name: "fig4_3 flat".into(),
        passed: flat.is_flat(),
        detail: format!("max/min - 1 = {:.4e}, tolerance {:.4e}", flat.spread, flat.tolerance),
    };
    Ok((total, forcing, check))
}

/// u_N^h over the start point at ā = 5.
fn fig4_4<E: Executor>(s: &FigureSettings, exec: &E) -> Result<Table> {
    let seed = derive_seed(s.seed, 4);
    let mut t = Table::new("fig4_4", &["x", "u_nh", "stderr"]);
    for (i, x) in grid(0.0, 10.0, s.x_step).into_iter().enumerate() {
        let r = estimate(&s.with_forcing(5.0, x)?, s.n, s.h, derive_seed(seed, i as u64), exec)?;
        t.push(vec![float(x), float(r.mean), float(r.stderr())]);
    }
    Ok(t)
}

/// Sample sizes 100, 200, 500, 1000, ... up to and including `n`.
pub fn band_sizes(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 100u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let v = decade * m;
            if v >= n {
                break 'outer;
            }
            out.push(v);
        }
        decade *= 10;
    }
    out.push(n);
    out
}

/// Asymptotic confidence band for φ ≡ 1, g = |x|^η, ā = 1, x = 0 along growing N.
fn fig4_5<E: Executor>(s: &FigureSettings, exec: &E) -> Result<Table> {
    let p = s.problem(1.0, 0.0, Function::constant(1.0), Function::power(1.0, ETA))?;
    let m = z_second_moment_bound(&p, 1.0)?.sqrt();
    let exact = 1.0 + forcing_reference(&p).expect("closed form at x = 0");
    let values = sample_values(&p, s.n, s.h_ci, derive_seed(s.seed, 5), exec)?;
    let mut t = Table::new("fig4_5", &["n", "estimate", "lower", "upper", "half_width", "m_bound", "exact"]);
    for pt in running_means(&values, &band_sizes(s.n)) {
        let ci = asymptotic_ci(pt.mean, m, pt.n, s.level)?;
        t.push(vec![
            pt.n.to_string(),
            float(pt.mean),
            float(ci.lo),
            float(ci.hi),
            float(ci.half_width()),
            float(m),
            float(exact),
        ]);
    }
    Ok(t)
}
