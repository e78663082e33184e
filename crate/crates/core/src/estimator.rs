//! The plain estimator `u_N` (no forcing) and the Riemann-sum estimator `u_N^h`.

use alloc::vec::Vec;

use crate::error::{Error, FailureSource, NumericalFailure, Result};
use crate::exec::{chunk_count, chunk_range, Executor};
use crate::moments::Moments;
use crate::problem::{Endpoint, ProblemSpec};
use crate::rng::RngStream;
use crate::stable::{add_terminal_displacement, sample_hitting_time, SymmetricStable};

/// One Monte Carlo summand split into its two parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSample {
    /// φ at the terminal state.
    pub phi: f64,
    /// `h Σ g(X_{t_i})`; 0 for the plain estimator.
    pub forcing: f64,
    pub t_hit: f64,
    pub steps: u64,
}

impl PathSample {
    pub fn value(&self) -> f64 {
        self.phi + self.forcing
    }
}

fn failure(source: FailureSource, value: f64, state: &[f64]) -> NumericalFailure {
    NumericalFailure { source, value, state: state.to_vec() }
}

/// `φ(x + T_t^{1/β} X₁)`; the forcing is ignored.
pub fn sample_y(problem: &ProblemSpec, rng: &mut RngStream) -> Result<f64> {
    sample_y_parts(problem, rng).map(|s| s.phi).map_err(Error::Numerical)
}

fn sample_y_parts(problem: &ProblemSpec, rng: &mut RngStream) -> core::result::Result<PathSample, NumericalFailure> {
    let mut state = problem.x.clone();
    let t_hit = add_terminal_displacement(problem.sub, problem.stable, problem.win, rng, &mut state);
    let phi = problem.phi.eval(&state);
    if !phi.is_finite() {
        return Err(failure(FailureSource::InitialDatum, phi, &state));
    }
    Ok(PathSample { phi, forcing: 0.0, t_hit, steps: 0 })
}

/// One summand of `u_N^h` with step `h > 0`.
pub fn sample_yh(problem: &ProblemSpec, h: f64, rng: &mut RngStream) -> Result<f64> {
    sample_yh_parts(problem, h, rng).map(|s| s.value())
}

/// As [`sample_yh`], keeping φ and the Riemann sum apart.
///
/// Draw order: the hitting time, then `d` coordinates per full step, then `d`
/// coordinates of the final partial increment (always drawn, even when the
/// remainder is 0).
pub fn sample_yh_parts(problem: &ProblemSpec, h: f64, rng: &mut RngStream) -> Result<PathSample> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain("h", h, "h > 0"));
    }
    walk(problem, h, rng).map_err(Error::Numerical)
}

fn walk(problem: &ProblemSpec, h: f64, rng: &mut RngStream) -> core::result::Result<PathSample, NumericalFailure> {
    let t_hit = sample_hitting_time(problem.sub, problem.win, rng);
    let mut state = problem.x.clone();
    let ratio = t_hit / h;
    if !(ratio < u64::MAX as f64) {
        return Err(failure(FailureSource::PathLength, ratio, &state));
    }
    let steps = libm::floor(ratio) as u64;
    let beta = problem.stable.beta();
    let c = problem.stable.c();
    let s = SymmetricStable::new(beta);
    let step_scale = s.scale(c, h);
    let with_g = !problem.g.is_zero();
    let right = problem.endpoint == Endpoint::Right;

    let mut sum = 0.0;
    for _ in 0..steps {
        if with_g && !right {
            sum += eval_g(problem, &state)?;
        }
        for v in state.iter_mut() {
            *v += step_scale * s.unit(rng);
        }
        if with_g && right {
            sum += eval_g(problem, &state)?;
        }
    }
    let rem = (t_hit - steps as f64 * h).max(0.0);
    let rem_scale = s.scale(c, rem);
    for v in state.iter_mut() {
        *v += rem_scale * s.unit(rng);
    }
    let phi = problem.phi.eval(&state);
    if !phi.is_finite() {
        return Err(failure(FailureSource::InitialDatum, phi, &state));
    }
    Ok(PathSample { phi, forcing: h * sum, t_hit, steps })
}

#[inline]
fn eval_g(problem: &ProblemSpec, state: &[f64]) -> core::result::Result<f64, NumericalFailure> {
    let v = problem.g.eval(state);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(failure(FailureSource::Forcing, v, state))
    }
}

/// Draws summand `index` of an estimate seeded with `seed`; `h = 0` selects
/// the plain estimator.
pub fn sample_at(problem: &ProblemSpec, h: f64, seed: u64, index: u64) -> Result<PathSample> {
    let mut rng = RngStream::new(seed, index);
    let out = if h == 0.0 { sample_y_parts(problem, &mut rng) } else { walk(problem, h, &mut rng) };
    out.map_err(|failure| Error::Sample { index, failure })
}

/// Summary of `n` summands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateResult {
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub n: u64,
    /// Step length; 0 encodes the plain estimator.
    pub h: f64,
    /// Longest path walked, in steps.
    pub max_path_len: u64,
    pub seed: u64,
}

impl EstimateResult {
    pub fn from_moments(m: Moments, h: f64, max_path_len: u64, seed: u64) -> Self {
        EstimateResult { mean: m.mean, m2: m.m2, m3: m.m3, n: m.n, h, max_path_len, seed }
    }

    pub fn moments(&self) -> Moments {
        Moments { n: self.n, mean: self.mean, m2: self.m2, m3: self.m3 }
    }

    pub fn variance(&self) -> f64 {
        self.moments().variance()
    }

    pub fn stderr(&self) -> f64 {
        self.moments().stderr()
    }
}

/// An estimate together with the moments of its φ and forcing parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateParts {
    pub total: EstimateResult,
    pub phi: Moments,
    pub forcing: Moments,
}

#[derive(Default)]
struct Partial {
    total: Moments,
    phi: Moments,
    forcing: Moments,
    max_steps: u64,
}

fn check_run(problem: &ProblemSpec, n: u64, h: f64) -> Result<()> {
    problem.validate()?;
    if n < 2 {
        return Err(Error::domain("n", n as f64, "n >= 2"));
    }
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::domain("h", h, "h >= 0"));
    }
    Ok(())
}

/// Average of `n` independent summands; summand `k` uses stream `k` of `seed`.
///
/// Chunks of [`crate::exec::CHUNK`] summands are accumulated separately and
/// merged in chunk order, so the result does not depend on the executor.
pub fn estimate<E: Executor>(problem: &ProblemSpec, n: u64, h: f64, seed: u64, exec: &E) -> Result<EstimateResult> {
    estimate_parts(problem, n, h, seed, exec).map(|p| p.total)
}

pub fn estimate_parts<E: Executor>(
    problem: &ProblemSpec,
    n: u64,
    h: f64,
    seed: u64,
    exec: &E,
) -> Result<EstimateParts> {
    check_run(problem, n, h)?;
    let partials = exec.map(chunk_count(n), |ci| {
        let mut p = Partial::default();
        for k in chunk_range(n, ci) {
            let s = sample_at(problem, h, seed, k)?;
            p.total.push(s.value());
            p.phi.push(s.phi);
            p.forcing.push(s.forcing);
            p.max_steps = p.max_steps.max(s.steps);
        }
        Ok(p)
    });
    let mut acc = Partial::default();
    for p in partials {
        let p = p?;
        acc.total = acc.total.merge(&p.total);
        acc.phi = acc.phi.merge(&p.phi);
        acc.forcing = acc.forcing.merge(&p.forcing);
        acc.max_steps = acc.max_steps.max(p.max_steps);
    }
    Ok(EstimateParts {
        total: EstimateResult::from_moments(acc.total, h, acc.max_steps, seed),
        phi: acc.phi,
        forcing: acc.forcing,
    })
}

/// The individual summands of [`estimate`], in stream order.
pub fn sample_values<E: Executor>(problem: &ProblemSpec, n: u64, h: f64, seed: u64, exec: &E) -> Result<Vec<f64>> {
    check_run(problem, n.max(2), h)?;
    let chunks = exec.map(chunk_count(n), |ci| {
        chunk_range(n, ci).map(|k| sample_at(problem, h, seed, k).map(|s| s.value())).collect::<Result<Vec<f64>>>()
    });
    let mut out = Vec::with_capacity(n as usize);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// How to pick the step length from the sample size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    /// `h_N = N^{-2β/γ}`.
    PaperExact,
    /// `h_N = N^{-β/(2γ)}`: squared bias `h^{2γ/β}` of order `1/N`.
    Balanced,
}

pub fn default_step(n: u64, beta: f64, gamma: f64, mode: StepMode) -> f64 {
    let n = n.max(1) as f64;
    match mode {
        StepMode::PaperExact => libm::pow(n, -2.0 * beta / gamma),
        StepMode::Balanced => libm::pow(n, -beta / (2.0 * gamma)),
    }
}
