//! Statistical checks: tail exponent, normality and coverage, Berry–Esseen,
//! scaling laws, bias decay on coupled paths and running means.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::bounds::{berry_esseen_bound, Interval};
use crate::catalog;
use crate::error::{Error, FailureSource, NumericalFailure, Result};
use crate::estimator::{estimate, sample_values, EstimateResult};
use crate::exec::{chunk_count, chunk_range, Executor, Sequential};
use crate::moments::Moments;
use crate::problem::{Endpoint, ProblemSpec};
use crate::rng::{derive_seed, RngStream};
use crate::special::{kolmogorov_sf, normal_cdf, normal_upper_quantile};
use crate::stable::{sample_hitting_time, SymmetricStable, TimeWindow};

/// Least-squares line through `(x, y)`: `(slope, intercept, r²)`.
pub fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Log-log fit of the empirical survival function.
#[derive(Clone, Debug, PartialEq)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub n_points: usize,
    /// `(u, P̂[X ≥ u])` at every distinct order statistic in the window.
    pub points: Vec<(f64, f64)>,
}

/// Fits `log P[X ≥ u] ≈ intercept + slope · log u` over the distinct order
/// statistics between the empirical `q_lo` and `q_hi` quantiles.
///
/// The survival at the `k`-th largest value is plotted at `(k - ½)/n`.
pub fn fit_tail_exponent(samples: &[f64], q_lo: f64, q_hi: f64) -> Result<TailFit> {
    if !(q_lo > 0.0 && q_lo < q_hi && q_hi < 1.0) {
        return Err(Error::Config("tail window needs 0 < q_lo < q_hi < 1".to_string()));
    }
    let mut xs: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite() && *v > 0.0).collect();
    if xs.len() < 10_000 {
        return Err(Error::InsufficientData(alloc::format!("{} positive samples, need 10000", xs.len())));
    }
    xs.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = xs.len();
    let nf = n as f64;
    let k_first = libm::floor((1.0 - q_hi) * nf).max(1.0) as usize;
    let k_last = (libm::ceil((1.0 - q_lo) * nf) as usize).min(n);
    let mut points: Vec<(f64, f64)> = Vec::new();
    for k in k_first..=k_last {
        let u = xs[k - 1];
        // among ties keep the largest rank, i.e. P[X ≥ u]
        if k < n && xs[k] == u && k < k_last {
            continue;
        }
        points.push((u, (k as f64 - 0.5) / nf));
    }
    if points.len() < 5 {
        return Err(Error::InsufficientData(alloc::format!("{} distinct tail points, need 5", points.len())));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(u, s)| (libm::log(u), libm::log(s))).collect();
    let (slope, intercept, r_squared) = ols(&logs);
    let u_min = points.last().map(|p| p.0).unwrap_or(0.0);
    let u_max = points[0].0;
    if !(u_min < u_max) {
        return Err(Error::InsufficientData("degenerate tail window".to_string()));
    }
    points.reverse();
    Ok(TailFit { slope, intercept, r_squared, u_min, u_max, n_points: points.len(), points })
}

/// Kolmogorov–Smirnov test result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = libm::sqrt(n_eff);
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<KsTest> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no values".to_string()));
    }
    let mut xs = values.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsTest { statistic: d, p_value: ks_p_value(d, n) })
}

/// One-sample test against the standard normal.
pub fn ks_normal(values: &[f64]) -> Result<KsTest> {
    ks_one_sample(values, normal_cdf)
}

/// Two-sample test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample".to_string()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max(libm::fabs(i as f64 / na - j as f64 / nb));
    }
    Ok(KsTest { statistic: d, p_value: ks_p_value(d, na * nb / (na + nb)) })
}

/// Target value for replication studies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reference {
    pub value: f64,
    /// 0 for closed forms.
    pub stderr: f64,
}

/// Closed form for catalog problems, otherwise an estimate with 100× the samples.
pub fn reference_for<E: Executor>(problem: &ProblemSpec, n: u64, h: f64, seed: u64, exec: &E) -> Result<Reference> {
    if h == 0.0 || problem.g.is_zero() {
        if let Some(value) = catalog::phi_reference(problem) {
            return Ok(Reference { value, stderr: 0.0 });
        }
    }
    if let Some(value) = catalog::reference_value(problem) {
        return Ok(Reference { value, stderr: 0.0 });
    }
    let r = estimate(problem, n.saturating_mul(100), h, derive_seed(seed, u64::MAX), exec)?;
    Ok(Reference { value: r.mean, stderr: r.stderr() })
}

/// Replicated estimates standardised against a known target.
#[derive(Clone, Debug, PartialEq)]
pub struct CltReport {
    pub replications: usize,
    pub n_per_rep: u64,
    /// Step used for every replication (0 for the plain estimator).
    pub h: f64,
    pub reference: Reference,
    pub level: f64,
    /// Pooled standard deviation of a single summand.
    pub sigma_hat: f64,
    /// `√n (mean_r - u) / σ̂`.
    pub standardized_values: Vec<f64>,
    pub normality_stat: f64,
    pub normality_pvalue: f64,
    /// Fraction of intervals `mean_r ± σ̂ z / √n` that contain the target.
    pub empirical_coverage: f64,
    /// Coverage of `mean_r ± M z / √n` for a supplied bound `M ≥ √Var Z`.
    pub bound_coverage: Option<f64>,
    pub estimates: Vec<EstimateResult>,
}

impl CltReport {
    /// Coverage of the pooled-σ̂ interval at another level, on the same replications.
    pub fn coverage(&self, level: f64) -> f64 {
        let z = normal_upper_quantile((1.0 - level) / 2.0);
        let hit = self.standardized_values.iter().filter(|v| libm::fabs(**v) <= z).count();
        hit as f64 / self.standardized_values.len() as f64
    }

    /// Interval of replication `r` with half-width `m z / √n`.
    pub fn interval(&self, r: usize, m: f64) -> Interval {
        let z = normal_upper_quantile((1.0 - self.level) / 2.0);
        Interval::centered(self.estimates[r].mean, m * z / libm::sqrt(self.n_per_rep as f64))
    }
}

/// Settings of a replication study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CltSettings {
    pub n: u64,
    pub reps: usize,
    pub h: f64,
    pub seed: u64,
    pub level: f64,
    /// Conservative `M(t, x)` for the informational bound coverage.
    pub m_bound: Option<f64>,
}

/// Runs `reps` independent estimates of size `n` (replication `r` seeded with
/// `derive_seed(seed, r)`) and compares them with `reference`.
pub fn clt_replication<E: Executor>(
    problem: &ProblemSpec,
    settings: CltSettings,
    reference: Reference,
    exec: &E,
) -> Result<CltReport> {
    let CltSettings { n, reps, h, seed, level, m_bound } = settings;
    if reps < 2 {
        return Err(Error::Config("clt replication needs at least 2 replications".to_string()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain("level", level, "0 < level < 1"));
    }
    problem.require_clt_growth()?;
    let estimates = exec
        .map(reps, |r| estimate(problem, n, h, derive_seed(seed, r as u64), &Sequential))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let pooled_var = estimates.iter().map(|e| e.variance()).sum::<f64>() / reps as f64;
    let sigma_hat = libm::sqrt(pooled_var);
    if !(sigma_hat > 0.0) {
        return Err(Error::Degenerate("pooled standard deviation is 0; standardised values are undefined"));
    }
    let root_n = libm::sqrt(n as f64);
    let standardized_values: Vec<f64> =
        estimates.iter().map(|e| root_n * (e.mean - reference.value) / sigma_hat).collect();
    let ks = ks_normal(&standardized_values)?;
    let z = normal_upper_quantile((1.0 - level) / 2.0);
    let covered = |m: f64| {
        let half = m * z / root_n;
        estimates.iter().filter(|e| libm::fabs(e.mean - reference.value) <= half).count() as f64 / reps as f64
    };
    Ok(CltReport {
        replications: reps,
        n_per_rep: n,
        h,
        reference,
        level,
        sigma_hat,
        empirical_coverage: covered(sigma_hat),
        bound_coverage: m_bound.map(covered),
        normality_stat: ks.statistic,
        normality_pvalue: ks.p_value,
        standardized_values,
        estimates,
    })
}

/// Third absolute central moment and standard deviation of a sample.
pub fn rho_sigma(values: &[f64]) -> (f64, f64) {
    let m = Moments::from_slice(values);
    let rho = values.iter().map(|v| libm::pow(libm::fabs(v - m.mean), 3.0)).sum::<f64>() / values.len() as f64;
    (rho, libm::sqrt(m.m2 / values.len() as f64))
}

/// One grid point of the Berry–Esseen comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerryEsseenPoint {
    pub n: u64,
    /// `|mean_r sin(S_N^r)|`.
    pub lhs: f64,
    /// Replication standard error of `lhs`.
    pub lhs_stderr: f64,
    pub rhs: f64,
}

/// Compares `|E sin(S_N)|` with `0.433 ρ/(√N σ³)` for the plain estimator.
///
/// `ρ` and `σ` come from a calibration run of `calib_n` summands; `S_N` is
/// standardised with the closed-form mean when one exists and the calibration
/// mean otherwise.
pub fn berry_esseen_check<E: Executor>(
    problem: &ProblemSpec,
    n_grid: &[u64],
    reps: usize,
    seed: u64,
    calib_n: u64,
    exec: &E,
) -> Result<Vec<BerryEsseenPoint>> {
    let beta = problem.beta();
    match problem.phi_growth {
        Some(p) if p < beta / 3.0 => {}
        Some(p) => return Err(Error::domain("phi_growth", p, "phi_growth < beta/3")),
        None => return Err(Error::Config("growth of phi is unknown; declare it explicitly".to_string())),
    }
    let calib = sample_values(problem, calib_n, 0.0, derive_seed(seed, u64::MAX - 1), exec)?;
    let (rho, sigma) = rho_sigma(&calib);
    if !(sigma > 0.0) {
        return Err(Error::Degenerate("calibration variance is 0"));
    }
    let mu = catalog::phi_reference(problem).unwrap_or_else(|| Moments::from_slice(&calib).mean);
    let mut out = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        let grid_seed = derive_seed(seed, gi as u64);
        let vals = exec
            .map(reps, |r| estimate(problem, n, 0.0, derive_seed(grid_seed, r as u64), &Sequential))
            .into_iter()
            .map(|e| e.map(|e| libm::sin(libm::sqrt(n as f64) * (e.mean - mu) / sigma)))
            .collect::<Result<Vec<f64>>>()?;
        let m = Moments::from_slice(&vals);
        out.push(BerryEsseenPoint {
            n,
            lhs: libm::fabs(m.mean),
            lhs_stderr: m.stderr(),
            rhs: berry_esseen_bound(rho, sigma, n, 1.0)?,
        });
    }
    Ok(out)
}

/// One point of a scaling study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingPoint {
    pub abar: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// `estimate / ā^exponent`.
    pub ratio: f64,
}

impl ScalingPoint {
    pub fn ratio_stderr(&self) -> f64 {
        self.stderr * libm::fabs(self.ratio / self.estimate)
    }
}

/// Which part of each summand a scaling study tracks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Part {
    #[default]
    Total,
    Phi,
    Forcing,
}

/// Estimates over a grid of window lengths, point `i` seeded with
/// `derive_seed(seed, i)`, each divided by `ā^exponent`.
pub fn scaling_check<E: Executor>(
    template: &ProblemSpec,
    abar_grid: &[f64],
    exponent: f64,
    n: u64,
    h: f64,
    seed: u64,
    part: Part,
    exec: &E,
) -> Result<Vec<ScalingPoint>> {
    if template.x.iter().any(|&v| v != 0.0) {
        return Err(Error::Config("scaling checks need the start point x = 0".to_string()));
    }
    let mut out = Vec::with_capacity(abar_grid.len());
    for (i, &abar) in abar_grid.iter().enumerate() {
        let mut p = template.clone();
        p.win = TimeWindow::new(template.win.a(), template.win.a() + abar)?;
        let parts = crate::estimator::estimate_parts(&p, n, h, derive_seed(seed, i as u64), exec)?;
        let m = match part {
            Part::Total => parts.total.moments(),
            Part::Phi => parts.phi,
            Part::Forcing => parts.forcing,
        };
        let scale = libm::pow(abar, exponent);
        out.push(ScalingPoint { abar, estimate: m.mean, stderr: m.stderr(), ratio: m.mean / scale });
    }
    Ok(out)
}

/// Flatness of a ratio curve: `max/min - 1` against 5 pooled relative standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flatness {
    pub spread: f64,
    pub tolerance: f64,
}

impl Flatness {
    pub fn is_flat(&self) -> bool {
        self.spread < self.tolerance
    }
}

/// `spread = max/min - 1`, `tolerance = 5 √(rse_max² + rse_min²)` with the
/// relative standard errors of the two extreme ratios.
pub fn flatness(points: &[ScalingPoint]) -> Flatness {
    let hi = points.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio));
    let lo = points.iter().min_by(|a, b| a.ratio.total_cmp(&b.ratio));
    match (hi, lo) {
        (Some(hi), Some(lo)) => {
            let rse = |p: &ScalingPoint| p.stderr / libm::fabs(p.estimate);
            Flatness {
                spread: hi.ratio / lo.ratio - 1.0,
                tolerance: 5.0 * libm::sqrt(rse(hi) * rse(hi) + rse(lo) * rse(lo)),
            }
        }
        _ => Flatness { spread: 0.0, tolerance: 0.0 },
    }
}

/// Coupled difference statistics at one coarse step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasPoint {
    pub h: f64,
    pub mean_abs: f64,
    pub stderr_abs: f64,
    pub mean_sq: f64,
    pub stderr_sq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasDecay {
    /// Slope of `log E|Y_h - Y_ref|` against `log h`; NaN when all differences vanish.
    pub slope: f64,
    /// Slope of `log E|Y_h - Y_ref|²` against `log h`.
    pub sq_slope: f64,
    pub points: Vec<BiasPoint>,
    /// Every difference was exactly 0 (forcing ≡ 0).
    pub exact: bool,
}

/// How the coarse and reference estimators share randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    /// One fine path per sample, read at every coarse grid.
    CommonPath,
    /// Independent streams; rejected, since the differences are then dominated by noise.
    Independent,
}

/// Slope of the coupled discretisation error `E|Y_h - Y_{h_ref}|` in `h`.
///
/// Each summand walks one path with step `h_ref`; the estimator with step
/// `h = m h_ref` reads every `m`-th state of that path. φ at the terminal
/// state is shared and cancels.
pub fn bias_decay_check<E: Executor>(
    problem: &ProblemSpec,
    h_grid: &[f64],
    h_ref: f64,
    n: u64,
    seed: u64,
    coupling: Coupling,
    exec: &E,
) -> Result<BiasDecay> {
    if coupling != Coupling::CommonPath {
        return Err(Error::Config(
            "bias decay needs coupled paths; independent streams are meaningless here".to_string(),
        ));
    }
    problem.validate()?;
    if h_grid.len() < 2 {
        return Err(Error::Config("bias decay needs at least two coarse steps".to_string()));
    }
    let h_min = h_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if !(h_ref > 0.0 && h_ref < h_min / 10.0) {
        return Err(Error::domain("h_ref", h_ref, "0 < h_ref < min(h_grid)/10"));
    }
    let mut multiples = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let m = libm::round(h / h_ref);
        if libm::fabs(m * h_ref - h) > 1e-9 * h {
            return Err(Error::domain("h", h, "every h must be an integer multiple of h_ref"));
        }
        multiples.push(m as u64);
    }
    let k = h_grid.len();
    let chunks = exec.map(chunk_count(n), |ci| {
        let mut abs = vec![Moments::new(); k];
        let mut sq = vec![Moments::new(); k];
        let mut diff = vec![0.0; k];
        for idx in chunk_range(n, ci) {
            coupled_differences(problem, h_ref, &multiples, seed, idx, &mut diff)?;
            for j in 0..k {
                abs[j].push(libm::fabs(diff[j]));
                sq[j].push(diff[j] * diff[j]);
            }
        }
        Ok((abs, sq))
    });
    let mut abs = vec![Moments::new(); k];
    let mut sq = vec![Moments::new(); k];
    for c in chunks {
        let (a, s) = c?;
        for j in 0..k {
            abs[j] = abs[j].merge(&a[j]);
            sq[j] = sq[j].merge(&s[j]);
        }
    }
    let points: Vec<BiasPoint> = (0..k)
        .map(|j| BiasPoint {
            h: h_grid[j],
            mean_abs: abs[j].mean,
            stderr_abs: abs[j].stderr(),
            mean_sq: sq[j].mean,
            stderr_sq: sq[j].stderr(),
        })
        .collect();
    if points.iter().all(|p| p.mean_abs == 0.0) {
        return Ok(BiasDecay { slope: f64::NAN, sq_slope: f64::NAN, points, exact: true });
    }
    let fit = |f: fn(&BiasPoint) -> f64| {
        let pts: Vec<(f64, f64)> = points.iter().map(|p| (libm::log(p.h), libm::log(f(p)))).collect();
        ols(&pts).0
    };
    Ok(BiasDecay { slope: fit(|p| p.mean_abs), sq_slope: fit(|p| p.mean_sq), points, exact: false })
}

/// `h_ref Σ_fine g - h_j Σ_coarse g` for every coarse multiple, on the path of summand `idx`.
fn coupled_differences(
    problem: &ProblemSpec,
    h_ref: f64,
    multiples: &[u64],
    seed: u64,
    idx: u64,
    out: &mut [f64],
) -> Result<()> {
    let wrap = |failure| Error::Sample { index: idx, failure };
    let mut rng = RngStream::new(seed, idx);
    let t_hit = sample_hitting_time(problem.sub, problem.win, &mut rng);
    let mut state = problem.x.clone();
    let ratio = t_hit / h_ref;
    if !(ratio < u64::MAX as f64) {
        return Err(wrap(NumericalFailure { source: FailureSource::PathLength, value: ratio, state }));
    }
    let n_ref = libm::floor(ratio) as u64;
    let coarse_steps: Vec<u64> = multiples.iter().map(|m| n_ref / m).collect();
    let s = SymmetricStable::new(problem.beta());
    let scale = s.scale(problem.stable.c(), h_ref);
    let right = problem.endpoint == Endpoint::Right;
    let mut fine = 0.0;
    let mut coarse = vec![0.0; multiples.len()];
    let visit = |step: u64, state: &[f64], fine: &mut f64, coarse: &mut [f64]| -> Result<()> {
        let g = problem.g.eval(state);
        if !g.is_finite() {
            return Err(wrap(NumericalFailure { source: FailureSource::Forcing, value: g, state: state.to_vec() }));
        }
        *fine += g;
        for (j, &m) in multiples.iter().enumerate() {
            let i = if right { step / m } else { step / m + 1 };
            if step.is_multiple_of(m) && i >= 1 && i <= coarse_steps[j] {
                coarse[j] += g;
            }
        }
        Ok(())
    };
    for step in 0..n_ref {
        if !right {
            visit(step, &state, &mut fine, &mut coarse)?;
        }
        for v in state.iter_mut() {
            *v += scale * s.unit(&mut rng);
        }
        if right {
            visit(step + 1, &state, &mut fine, &mut coarse)?;
        }
    }
    for (j, &m) in multiples.iter().enumerate() {
        out[j] = h_ref * fine - h_ref * m as f64 * coarse[j];
    }
    Ok(())
}

/// Running mean after the first `n` summands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunningPoint {
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
}

/// Running means of `values` (in stream order) at each checkpoint.
pub fn running_means(values: &[f64], checkpoints: &[u64]) -> Vec<RunningPoint> {
    let mut m = Moments::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&c| c >= 1 && c as usize <= values.len()).collect();
    cps.sort_unstable();
    cps.dedup();
    for (i, &v) in values.iter().enumerate() {
        m.push(v);
        while next < cps.len() && cps[next] == (i + 1) as u64 {
            out.push(RunningPoint { n: m.n, mean: m.mean, stderr: m.stderr() });
            next += 1;
        }
    }
    out
}

/// Strong-law check on a running-mean trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct SllnReport {
    pub trajectory: Vec<RunningPoint>,
    /// Largest `|mean_n - mean_N| / stderr_n` over the last half of the checkpoints.
    pub max_late_deviation: f64,
}

impl SllnReport {
    pub fn settles(&self) -> bool {
        self.max_late_deviation <= 5.0
    }
}

/// Running means of one long estimate at `checkpoints`, with the deviation of
/// the later half from the final value measured in standard errors.
pub fn slln_check<E: Executor>(
    problem: &ProblemSpec,
    n: u64,
    h: f64,
    seed: u64,
    checkpoints: &[u64],
    exec: &E,
) -> Result<SllnReport> {
    let values = sample_values(problem, n, h, seed, exec)?;
    let trajectory = running_means(&values, checkpoints);
    let final_mean = Moments::from_slice(&values).mean;
    let late = &trajectory[trajectory.len() / 2..];
    let max_late_deviation = late
        .iter()
        .map(|p| if p.stderr > 0.0 { libm::fabs(p.mean - final_mean) / p.stderr } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(SllnReport { trajectory, max_late_deviation })
}
