//! Closed-form moments, tail constants, error bounds and confidence intervals.

use core::f64::consts::{LN_2, PI};

use crate::catalog;
use crate::error::{Error, Result};
use crate::problem::{ProblemSpec, Shape};
use crate::special::{gamma, gamma_ratio, normal_upper_quantile};
use crate::stable::StableSpec;

/// `E|U_t|^η` for a scalar symmetric stable `U` with `E e^{izU_t} = e^{-tc|z|^β}`.
pub fn frac_moment_stable(eta: f64, beta: f64, c: f64, t: f64) -> Result<f64> {
    if !(eta > -1.0 && eta < beta) {
        return Err(Error::domain("eta", eta, "-1 < eta < beta"));
    }
    if eta == 0.0 {
        return Ok(1.0);
    }
    let shape = libm::pow(2.0, eta) * gamma((1.0 + eta) / 2.0) * gamma_ratio(1.0 - eta / beta, 1.0 - eta / 2.0)
        / libm::sqrt(PI);
    Ok(libm::pow(t * c, eta / beta) * shape)
}

/// `E[τ₁^η] = Γ(1 - η/α) / Γ(1 - η)` for η < α.
pub fn frac_moment_subordinator(eta: f64, alpha: f64) -> Result<f64> {
    if !(eta < alpha) {
        return Err(Error::domain("eta", eta, "eta < alpha"));
    }
    Ok(gamma_ratio(1.0 - eta / alpha, 1.0 - eta))
}

/// `E[T_t^k] = ā^{kα} Γ(1 + k) / Γ(1 + kα)`, finite exactly for k > -1.
pub fn hitting_time_moment(k: f64, alpha: f64, abar: f64) -> Result<f64> {
    if !(k > -1.0) {
        return Err(Error::domain("k", k, "k > -1"));
    }
    if !(abar >= 0.0) {
        return Err(Error::domain("abar", abar, "abar >= 0"));
    }
    if k == 0.0 {
        return Ok(1.0);
    }
    if abar == 0.0 {
        return if k > 0.0 { Ok(0.0) } else { Err(Error::domain("abar", abar, "abar > 0 for k < 0")) };
    }
    Ok(libm::pow(abar, k * alpha) * gamma_ratio(1.0 + k, 1.0 + k * alpha))
}

/// `E[(T_t + s)^3]` expanded binomially.
fn shifted_cube_moment(alpha: f64, abar: f64, s: f64) -> Result<f64> {
    let m = |k: f64| hitting_time_moment(k, alpha, abar);
    Ok(m(3.0)? + 3.0 * s * m(2.0)? + 3.0 * s * s * m(1.0)? + s * s * s)
}

/// Tail constant `C_β = (1 - β) / (Γ(2 - β) cos(πβ/2))`, with its limit 2/π at β = 1.
pub fn c_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::domain("beta", beta, "0 < beta < 2"));
    }
    // cos(π(1 - e)/2) = sin(πe/2) with e = 1 - β keeps the quotient accurate near β = 1.
    let e = 1.0 - beta;
    if e == 0.0 {
        return Ok(2.0 / PI);
    }
    Ok(e / (gamma(1.0 + e) * libm::sin(PI * e / 2.0)))
}

/// Free parameters of the tail bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBoundParams {
    pub epsilon: f64,
    pub s: f64,
    pub m0: f64,
    pub delta: f64,
}

impl TailBoundParams {
    pub fn new(epsilon: f64, s: f64, m0: f64, delta: f64) -> Result<Self> {
        for (what, v) in [("epsilon", epsilon), ("S", s), ("M0", m0), ("delta", delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(what, v, "strictly positive"));
            }
        }
        Ok(TailBoundParams { epsilon, s, m0, delta })
    }

    /// Defaults: S = ln2/β, ε = 0.01 C_β σ^β, M₀ = max(2|x| + 2ā^{α/β}, 10√d) and
    /// δ = β/p - 2 from the growth exponent p of φ (δ = 1 for bounded φ).
    pub fn default_for(problem: &ProblemSpec) -> Result<Self> {
        let beta = problem.beta();
        let cb = if beta < 2.0 { c_beta(beta)? } else { c_beta(1.999)? };
        let epsilon = 0.01 * cb * problem.stable.c();
        let m0 = (2.0 * problem.x_norm() + 2.0 * libm::pow(problem.abar(), problem.alpha() / beta))
            .max(10.0 * libm::sqrt(problem.dim() as f64));
        let delta = match problem.phi_growth {
            Some(p) if p > 0.0 => beta / p - 2.0,
            Some(_) => 1.0,
            None => return Err(Error::Config("growth of phi is unknown; declare it explicitly".into())),
        };
        Self::new(epsilon, LN_2 / beta, m0, delta)
    }

    /// `e^{2βS} / (e^{βS} - 1)`.
    pub fn s_factor(&self, beta: f64) -> f64 {
        let y = libm::exp(beta * self.s);
        y * y / (y - 1.0)
    }
}

/// `(M^{(1)}, M^{(2)})`: `P[|X_{T_t}^x| > u] ≤ M^{(2)} u^{-β}` for `u > M₀`.
///
/// `M^{(1)} = (1 + 2e^{2βS}/(e^{βS} - 1)) d^{1+β/2} (ε + C_β σ^β) + 1`,
/// `M^{(2)} = 2 ā^{-α/β} M^{(1)}`.
pub fn tail_constants(stable: StableSpec, alpha: f64, params: TailBoundParams, abar: f64) -> Result<(f64, f64)> {
    let beta = stable.beta();
    if !(abar > 0.0) {
        return Err(Error::domain("abar", abar, "abar > 0"));
    }
    let d = stable.dim() as f64;
    let m1 = (1.0 + 2.0 * params.s_factor(beta))
        * libm::pow(d, 1.0 + beta / 2.0)
        * (params.epsilon + c_beta(beta)? * stable.c())
        + 1.0;
    let m2 = 2.0 * libm::pow(abar, -alpha / beta) * m1;
    Ok((m1, m2))
}

/// `M₀ + 2 M^{(2)} M₀^{-δ/2} / δ`, a bound on `E[φ(X_{T_t})²]` when `|φ(x)| ≤ |x|^{β/(2+δ)}`.
pub fn phi_second_moment_bound(params: TailBoundParams, m2_tail: f64) -> f64 {
    params.m0 + 2.0 * m2_tail * libm::pow(params.m0, -params.delta / 2.0) / params.delta
}

/// Bound on `E[φ(X_{T_t})²]` for catalog initial data.
///
/// For `φ = κ|x|^η` the tail bound turns into `P[φ² > s] ≤ M^{(2)} |κ|^{2+δ} s^{-1-δ/2}`
/// once `(s/κ²)^{1/(2η)} > M₀`; integrating from `s₀ = max(M₀, κ² M₀^{2η})` gives
/// `s₀ + 2 M^{(2)} |κ|^{2+δ} s₀^{-δ/2} / δ` with `δ = β/η - 2`.
pub fn phi_sq_bound(problem: &ProblemSpec, params: TailBoundParams, m2_tail: f64) -> Result<f64> {
    match problem.phi.shape() {
        Shape::Const(k) => Ok(k * k),
        Shape::Power { kappa, .. } if kappa == 0.0 => Ok(0.0),
        Shape::Power { kappa, eta } => {
            let beta = problem.beta();
            if !(eta > 0.0 && eta < beta / 2.0) {
                return Err(Error::domain("phi exponent", eta, "0 < eta < beta/2"));
            }
            let delta = beta / eta - 2.0;
            let k2 = kappa * kappa;
            let s0 = params.m0.max(k2 * libm::pow(params.m0, 2.0 * eta));
            Ok(s0 + 2.0 * m2_tail * libm::pow(libm::fabs(kappa), 2.0 + delta) * libm::pow(s0, -delta / 2.0) / delta)
        }
        Shape::Opaque => Err(Error::Config("phi is not a catalog function; supply a bound on E[phi^2]".into())),
    }
}

/// `M₂ = d c^{2γ/β} 2^{2γ} Γ((1+2γ)/2) Γ(1 - 2γ/β) / (√π Γ(1 - γ))`.
pub fn m2_constant(stable: StableSpec, gamma: f64) -> Result<f64> {
    if !(2.0 * gamma < stable.beta()) {
        return Err(Error::domain("gamma", gamma, "2 gamma < beta"));
    }
    Ok(stable.dim() as f64 * frac_moment_stable(2.0 * gamma, stable.beta(), stable.c(), 1.0)?)
}

/// `M¹_{t,x}`, a bound on `Var Y_h` valid for every step `h ≤ 1`.
///
/// Minkowski on `Y_h = φ + h Σ (g(X_{t_i}) - g(x)) + h⌊T/h⌋ g(x)`:
/// `(√A + √B + |g(x)| √E[T²])²` with `A = phi_sq_bound` and
/// `B = d L² M₂ E[(T_t + 1)³] / (1 + γ/β)²`.
pub fn variance_bound(problem: &ProblemSpec, phi_sq_bound: f64) -> Result<f64> {
    let (alpha, beta, abar) = (problem.alpha(), problem.beta(), problem.abar());
    let r = problem.gamma / beta;
    let b = if problem.lip == 0.0 {
        0.0
    } else {
        problem.dim() as f64
            * problem.lip
            * problem.lip
            * m2_constant(problem.stable, problem.gamma)?
            * shifted_cube_moment(alpha, abar, 1.0)?
            / ((1.0 + r) * (1.0 + r))
    };
    let g0 = libm::fabs(problem.g.eval(&problem.x));
    let drift = if g0 == 0.0 { 0.0 } else { g0 * libm::sqrt(hitting_time_moment(2.0, alpha, abar)?) };
    let root = libm::sqrt(phi_sq_bound.max(0.0)) + libm::sqrt(b) + drift;
    Ok(root * root)
}

/// `K = L d E|X₁|^γ / (1 + γ/β)`, the common factor of the bias bound.
fn bias_k(problem: &ProblemSpec) -> Result<f64> {
    if problem.lip == 0.0 {
        return Ok(0.0);
    }
    let (beta, g) = (problem.beta(), problem.gamma);
    Ok(problem.lip * problem.dim() as f64 * frac_moment_stable(g, beta, problem.stable.c(), 1.0)? / (1.0 + g / beta))
}

/// `M²_{t,x} = K ā^α Γ(2)/Γ(1+α)`, the coefficient of `h^{γ/β}` in [`bias_bound`].
pub fn bias_constant(problem: &ProblemSpec) -> Result<f64> {
    Ok(bias_k(problem)? * hitting_time_moment(1.0, problem.alpha(), problem.abar())?)
}

/// `|E Z - E Y_h| ≤ E|Z - Y_h| ≤ M₃ h + K h^{1+γ/β} + M²_{t,x} h^{γ/β}`, with `M₃ ≥ E|g(X_{T_t})|`.
pub fn bias_bound(problem: &ProblemSpec, h: f64, m3: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::domain("h", h, "h > 0"));
    }
    let r = problem.gamma / problem.beta();
    let k = bias_k(problem)?;
    Ok(m3 * h + k * libm::pow(h, 1.0 + r) + bias_constant(problem)? * libm::pow(h, r))
}

/// `E|Y_h - Z|² ≤ 2(main + strip)` with
/// `main = L² d M₂ E[T_t²] h^{2γ/β}` (the Riemann error over full steps) and
/// `strip = 2h² E[g(X_{T_t})²] + 2 L² d M₂ h^{2+2γ/β} / (1 + 2γ/β)` (the last partial step).
pub fn bias_sq_bound(problem: &ProblemSpec, h: f64, g_terminal_sq: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::domain("h", h, "h > 0"));
    }
    let (main, path) = bias_sq_parts(problem)?;
    let r2 = 2.0 * problem.gamma / problem.beta();
    let strip = 2.0 * h * h * g_terminal_sq + 2.0 * path * libm::pow(h, 2.0 + r2) / (1.0 + r2);
    Ok(2.0 * (main * libm::pow(h, r2) + strip))
}

/// `(L² d M₂ E[T_t²], L² d M₂)`.
fn bias_sq_parts(problem: &ProblemSpec) -> Result<(f64, f64)> {
    if problem.lip == 0.0 {
        return Ok((0.0, 0.0));
    }
    let path = problem.lip * problem.lip * problem.dim() as f64 * m2_constant(problem.stable, problem.gamma)?;
    Ok((path * hitting_time_moment(2.0, problem.alpha(), problem.abar())?, path))
}

/// `M³_{t,x}` with `E|Y_h - Z|² ≤ M³_{t,x} h^{2γ/β}` for every `h ≤ 1`.
pub fn bias_sq_constant(problem: &ProblemSpec, g_terminal_sq: f64) -> Result<f64> {
    let (main, path) = bias_sq_parts(problem)?;
    let r2 = 2.0 * problem.gamma / problem.beta();
    Ok(2.0 * (main + 2.0 * g_terminal_sq + 2.0 * path / (1.0 + r2)))
}

/// `E[Z²] ≤ 2 E[φ²] + 4 (E[T_t²] g(x)² + L² d M₂ E[T_t^{2+2γ/β}] / (1 + 2γ/β))`.
pub fn z_second_moment_bound(problem: &ProblemSpec, phi_sq_bound: f64) -> Result<f64> {
    let (alpha, abar) = (problem.alpha(), problem.abar());
    let g0 = problem.g.eval(&problem.x);
    let mut forcing = 0.0;
    if g0 != 0.0 {
        forcing += hitting_time_moment(2.0, alpha, abar)? * g0 * g0;
    }
    let (_, path) = bias_sq_parts(problem)?;
    if path > 0.0 {
        let r2 = 2.0 * problem.gamma / problem.beta();
        forcing += path * hitting_time_moment(2.0 + r2, alpha, abar)? / (1.0 + r2);
    }
    Ok(2.0 * phi_sq_bound + 4.0 * forcing)
}

/// `M¹/N + (M²)² h^{2γ/β}`.
pub fn l2_error_bound(n: u64, h: f64, var_bound: f64, bias_const: f64, gamma: f64, beta: f64) -> f64 {
    let n = n.max(1) as f64;
    let bias = if h == 0.0 { 0.0 } else { bias_const * bias_const * libm::pow(h, 2.0 * gamma / beta) };
    var_bound / n + bias
}

/// A closed interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn centered(mid: f64, half_width: f64) -> Self {
        Interval { lo: mid - half_width, hi: mid + half_width }
    }

    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("level", level, "0 < level < 1"))
    }
}

/// Chebyshev-Markov interval: half-width `√(l2 / (1 - level))`.
pub fn markov_ci(estimate: f64, l2: f64, level: f64) -> Result<Interval> {
    check_level(level)?;
    Ok(Interval::centered(estimate, libm::sqrt(l2.max(0.0) / (1.0 - level))))
}

/// `estimate ± m_tx z((1 - level)/2) / √n`.
pub fn asymptotic_ci(estimate: f64, m_tx: f64, n: u64, level: f64) -> Result<Interval> {
    check_level(level)?;
    let z = normal_upper_quantile((1.0 - level) / 2.0);
    Ok(Interval::centered(estimate, m_tx * z / libm::sqrt(n.max(1) as f64)))
}

/// `0.433 ‖ψ'''‖∞ ρ / (√n σ³)`.
pub fn berry_esseen_bound(rho: f64, sigma: f64, n: u64, psi3_sup: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Degenerate("sigma = 0"));
    }
    Ok(0.433 * psi3_sup * rho / (libm::sqrt(n.max(1) as f64) * sigma * sigma * sigma))
}

/// Every constant for one problem, run size and step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsReport {
    pub c_beta: f64,
    pub m1_tail: f64,
    pub m2_tail: f64,
    pub phi_sq_bound: f64,
    pub m2_const: f64,
    pub var_bound: f64,
    pub bias_const: f64,
    pub bias2_const: f64,
    pub z_sq_bound: f64,
    pub l2_bound: f64,
}

/// Problem-specific quantities the catalog cannot derive for opaque callbacks.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundInputs {
    /// Bound on `E[φ(X_{T_t})²]`.
    pub phi_sq: Option<f64>,
    /// Bound on `E[g(X_{T_t})²]`.
    pub g_sq: Option<f64>,
}

impl BoundsReport {
    pub fn compute(
        problem: &ProblemSpec,
        params: TailBoundParams,
        n: u64,
        h: f64,
        inputs: BoundInputs,
    ) -> Result<Self> {
        problem.validate()?;
        let beta = problem.beta();
        // Gaussian tails are not power laws: the tail constants only exist for β < 2.
        let (c_beta, m1_tail, m2_tail) = if beta < 2.0 {
            let (m1, m2) = tail_constants(problem.stable, problem.alpha(), params, problem.abar())?;
            (c_beta(beta)?, m1, m2)
        } else {
            (0.0, 0.0, 0.0)
        };
        let phi_sq = match (inputs.phi_sq, problem.phi.shape()) {
            (Some(v), _) => v,
            (None, Shape::Const(k)) => k * k,
            (None, _) if beta < 2.0 => phi_sq_bound(problem, params, m2_tail)?,
            (None, _) => return Err(Error::Config("beta = 2: supply a bound on E[phi^2]".into())),
        };
        let g_sq = match inputs.g_sq {
            Some(v) => v,
            None => catalog::forcing_terminal_moment(problem, 2.0)?,
        };
        let var_bound = variance_bound(problem, phi_sq)?;
        let bias_const = bias_constant(problem)?;
        Ok(BoundsReport {
            c_beta,
            m1_tail,
            m2_tail,
            phi_sq_bound: phi_sq,
            m2_const: m2_constant(problem.stable, problem.gamma)?,
            var_bound,
            bias_const,
            bias2_const: bias_sq_constant(problem, g_sq)?,
            z_sq_bound: z_second_moment_bound(problem, phi_sq)?,
            l2_bound: l2_error_bound(n, h, var_bound, bias_const, problem.gamma, beta),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Function;
    use crate::stable::{SubordinatorSpec, TimeWindow};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol * libm::fabs(b).max(1e-300)
    }

    fn problem(abar: f64, d: usize) -> ProblemSpec {
        ProblemSpec::new(
            SubordinatorSpec::new(0.5).unwrap(),
            StableSpec::new(1.5, 1.0, d).unwrap(),
            TimeWindow::with_length(abar).unwrap(),
        )
    }

    #[test]
    fn stable_fractional_moments() {
        assert_eq!(frac_moment_stable(0.0, 1.5, 1.0, 1.0).unwrap(), 1.0);
        // E|N(0, 2)| = √(4/π)
        assert!(close(frac_moment_stable(1.0, 2.0, 1.0, 1.0).unwrap(), libm::sqrt(4.0 / PI), 1e-13));
        let v = frac_moment_stable(0.5, 1.5, 1.0, 1.0).unwrap();
        assert!(close(v, libm::sqrt(2.0) * libm::tgamma(2.0 / 3.0) / libm::sqrt(PI), 1e-13));
        assert!((v - 1.0804).abs() < 1e-4);
        // (tc)^{η/β} scaling
        let w = frac_moment_stable(0.5, 1.5, 2.0, 4.0).unwrap();
        assert!(close(w / v, libm::pow(8.0, 1.0 / 3.0), 1e-13));
        assert!(frac_moment_stable(1.5, 1.5, 1.0, 1.0).is_err());
        assert!(frac_moment_stable(-1.0, 1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn subordinator_fractional_moments() {
        assert_eq!(frac_moment_subordinator(0.0, 0.5).unwrap(), 1.0);
        assert!(close(frac_moment_subordinator(-1.0, 0.5).unwrap(), 2.0, 1e-13));
        let v = frac_moment_subordinator(-1.0 / 6.0, 0.5).unwrap();
        assert!(close(v, libm::tgamma(4.0 / 3.0) / libm::tgamma(7.0 / 6.0), 1e-13));
        assert!((v - 0.96255).abs() < 1e-5);
        assert!(frac_moment_subordinator(0.5, 0.5).is_err());
        assert!(frac_moment_subordinator(-40.0, 0.3).unwrap().is_finite());
    }

    #[test]
    fn hitting_time_moments() {
        assert!(close(hitting_time_moment(1.0, 0.5, 1.0).unwrap(), 2.0 / libm::sqrt(PI), 1e-13));
        assert!(close(hitting_time_moment(2.0, 0.5, 1.0).unwrap(), 2.0, 1e-13));
        assert_eq!(hitting_time_moment(1.0, 0.5, 0.0).unwrap(), 0.0);
        assert!(close(hitting_time_moment(2.0, 0.5, 4.0).unwrap(), 8.0, 1e-13));
        assert!(hitting_time_moment(-1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn c_beta_values() {
        assert!(close(c_beta(0.5).unwrap(), 0.5 / (libm::sqrt(PI) / 2.0 * libm::cos(PI / 4.0)), 1e-13));
        assert!((c_beta(0.5).unwrap() - 0.7979).abs() < 1e-4);
        assert!(close(c_beta(1.0).unwrap(), 2.0 / PI, 1e-15));
        assert!((c_beta(1.0 + 1e-9).unwrap() - 2.0 / PI).abs() < 1e-8);
        assert!((c_beta(1.0 - 1e-9).unwrap() - 2.0 / PI).abs() < 1e-8);
        assert!((c_beta(1.5).unwrap() - 0.3989).abs() < 1e-4);
        assert!(c_beta(2.0).is_err());
    }

    #[test]
    fn tail_constant_example() {
        let stable = StableSpec::new(1.5, 1.0, 1).unwrap();
        let params = TailBoundParams::new(0.01, LN_2 / 1.5, 10.0, 1.0).unwrap();
        assert!(close(params.s_factor(1.5), 4.0, 1e-13));
        let (m1, m2) = tail_constants(stable, 0.5, params, 1.0).unwrap();
        assert!(close(m1, 9.0 * (0.01 + c_beta(1.5).unwrap()) + 1.0, 1e-13));
        assert!(close(m2, 2.0 * m1, 1e-13));
        let (_, m2b) = tail_constants(stable, 0.5, params, libm::pow(2.0, -3.0)).unwrap();
        assert!(close(m2b, 2.0 * m2, 1e-13));
        for s in [0.1, 0.3, 0.8, 2.0] {
            let p = TailBoundParams::new(0.01, s, 10.0, 1.0).unwrap();
            assert!(p.s_factor(1.5) >= 4.0);
        }
    }

    #[test]
    fn phi_second_moment_examples() {
        let params = TailBoundParams::new(0.01, 1.0, 1.0, 2.0).unwrap();
        assert!(close(phi_second_moment_bound(params, 1.0), 2.0, 1e-15));
        assert!(phi_second_moment_bound(params, 2.0) > phi_second_moment_bound(params, 1.0));
        // order d^{1+β/2}
        let bound = |d: usize| {
            let p = problem(1.0, d).with_phi(Function::power(1.0, 0.5));
            let params = TailBoundParams::default_for(&p).unwrap();
            let (_, m2) = tail_constants(p.stable, 0.5, params, 1.0).unwrap();
            phi_second_moment_bound(params, m2)
        };
        let ratio = bound(400) / bound(100);
        assert!(ratio > 0.5 * libm::pow(4.0, 1.75) && ratio < 1.5 * libm::pow(4.0, 1.75), "ratio {ratio}");
    }

    #[test]
    fn m2_constant_values() {
        let s1 = StableSpec::new(1.5, 1.0, 1).unwrap();
        let v = m2_constant(s1, 0.5).unwrap();
        assert!(close(v, 2.0 * libm::tgamma(1.0 / 3.0) / PI, 1e-13));
        assert!((v - 1.70547).abs() < 1e-5);
        let s3 = StableSpec::new(1.5, 1.0, 3).unwrap();
        assert!(close(m2_constant(s3, 0.5).unwrap(), 3.0 * v, 1e-13));
        assert!((m2_constant(s3, 1e-9).unwrap() - 3.0).abs() < 1e-7);
        assert!(m2_constant(s1, 0.75).is_err());
    }

    #[test]
    fn variance_bound_reductions() {
        let p = problem(1.0, 1).with_phi(Function::power(1.0, 0.5));
        assert!(close(variance_bound(&p, 3.7).unwrap(), 3.7, 1e-14));
        let p = problem(1.0, 1).with_g(Function::power(1.0, 0.5));
        let cube = shifted_cube_moment(0.5, 1.0, 1.0).unwrap();
        let expect = libm::tgamma(4.0) / libm::tgamma(2.5) + 3.0 * 2.0 + 3.0 * 2.0 / libm::sqrt(PI) + 1.0;
        assert!(close(cube, expect, 1e-13));
        assert!((cube - 14.899).abs() < 1e-3);
        let middle = m2_constant(p.stable, 0.5).unwrap() * cube / (1.0 + 1.0 / 3.0f64).powi(2);
        assert!(close(variance_bound(&p, 0.0).unwrap(), middle, 1e-13));
    }

    #[test]
    fn bias_bound_examples() {
        let p = problem(1.0, 1).with_g(Function::constant(2.0));
        assert_eq!(bias_bound(&p, 0.1, 0.0).unwrap(), 0.0);
        let p = problem(1.0, 1).with_g(Function::power(1.0, 0.5));
        let k = 0.75 * libm::sqrt(2.0) * libm::tgamma(2.0 / 3.0) / libm::sqrt(PI);
        assert!(close(bias_k(&p).unwrap(), k, 1e-13));
        assert!((k - 0.8103).abs() < 1e-4);
        let r = bias_bound(&p, 2e-9, 0.5).unwrap() / bias_bound(&p, 1e-9, 0.5).unwrap();
        assert!((r - libm::pow(2.0, 1.0 / 3.0)).abs() < 1e-3);
    }

    #[test]
    fn bias_sq_examples() {
        let p = problem(1.0, 1).with_g(Function::constant(0.0));
        assert_eq!(bias_sq_bound(&p, 0.1, 0.0).unwrap(), 0.0);
        let p = problem(1.0, 1).with_g(Function::power(1.0, 0.5));
        let (main, _) = bias_sq_parts(&p).unwrap();
        assert!((main - 3.411).abs() < 1e-3);
        let r = bias_sq_bound(&p, 2e-9, 1.0).unwrap() / bias_sq_bound(&p, 1e-9, 1.0).unwrap();
        assert!((r - libm::pow(2.0, 2.0 / 3.0)).abs() < 1e-3);
        let m3c = bias_sq_constant(&p, 1.0).unwrap();
        for h in [1.0, 0.5, 0.1, 1e-3] {
            assert!(bias_sq_bound(&p, h, 1.0).unwrap() <= m3c * libm::pow(h, 2.0 / 3.0) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn z_second_moment_examples() {
        assert_eq!(z_second_moment_bound(&problem(1.0, 1), 0.0).unwrap(), 0.0);
        let p = problem(1.0, 1).with_phi(Function::constant(1.0));
        assert_eq!(z_second_moment_bound(&p, 1.0).unwrap(), 2.0);
        let p = p.with_g(Function::power(1.0, 0.5));
        let v = z_second_moment_bound(&p, 1.0).unwrap();
        assert!(v.is_finite() && v > 2.0);
    }

    #[test]
    fn error_bound_and_interval_examples() {
        assert!(close(l2_error_bound(10_000, 1e-3, 15.0, 1.0, 0.5, 1.5), 0.0115, 1e-12));
        assert_eq!(l2_error_bound(100, 0.0, 15.0, 1.0, 0.5, 1.5), 0.15);
        assert_eq!(markov_ci(1.0, 0.0, 0.95).unwrap(), Interval { lo: 1.0, hi: 1.0 });
        assert!((markov_ci(0.0, 0.01, 0.95).unwrap().half_width() - 0.4472).abs() < 1e-4);
        let ci = asymptotic_ci(0.0, 2.0, 10_000, 0.95).unwrap();
        assert!((ci.half_width() - 0.0392).abs() < 1e-4);
        let wide = asymptotic_ci(0.0, 2.0, 2_500, 0.95).unwrap();
        assert!(close(wide.half_width(), 2.0 * ci.half_width(), 1e-12));
        assert!(markov_ci(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn berry_esseen_examples() {
        assert!(close(berry_esseen_bound(1.0, 1.0, 1, 1.0).unwrap(), 0.433, 1e-15));
        assert!(close(berry_esseen_bound(8.0, 2.0, 1, 1.0).unwrap(), 0.433, 1e-15));
        assert!(close(berry_esseen_bound(2.0, 1.0, 100, 1.0).unwrap(), 0.0866, 1e-12));
        assert!(close(berry_esseen_bound(2.0, 1.0, 400, 1.0).unwrap(), 0.0433, 1e-12));
        assert!(berry_esseen_bound(1.0, 0.0, 10, 1.0).is_err());
    }

    #[test]
    fn report_is_finite_and_nonnegative() {
        let p = problem(1.0, 1).with_phi(Function::constant(1.0)).with_g(Function::power(1.0, 0.5));
        let params = TailBoundParams::default_for(&p).unwrap();
        let r = BoundsReport::compute(&p, params, 10_000, 1e-3, BoundInputs::default()).unwrap();
        for v in [
            r.c_beta,
            r.m1_tail,
            r.m2_tail,
            r.phi_sq_bound,
            r.m2_const,
            r.var_bound,
            r.bias_const,
            r.bias2_const,
            r.z_sq_bound,
            r.l2_bound,
        ] {
            assert!(v.is_finite() && v >= 0.0);
        }
        let opaque = p.clone().with_g(Function::opaque(|_: &[f64]| 0.0)).with_holder(0.5, 1.0);
        assert!(BoundsReport::compute(&opaque, params, 10, 0.1, BoundInputs::default()).is_err());
        let supplied = BoundInputs { g_sq: Some(1.0), ..Default::default() };
        assert!(BoundsReport::compute(&opaque, params, 10, 0.1, supplied).is_ok());
    }

    proptest! {
        #[test]
        fn l2_bound_monotone(n in 1u64..1_000_000, h in 1e-6f64..1.0, v in 0.0f64..100.0, b in 0.0f64..10.0) {
            let base = l2_error_bound(n, h, v, b, 0.5, 1.5);
            prop_assert!(l2_error_bound(n + 1, h, v, b, 0.5, 1.5) <= base);
            prop_assert!(l2_error_bound(n, h * 1.5, v, b, 0.5, 1.5) >= base);
        }

        #[test]
        fn markov_width_monotone(l2 in 0.0f64..10.0, extra in 0.0f64..10.0, level in 0.5f64..0.999) {
            let a = markov_ci(0.0, l2, level).unwrap().half_width();
            let b = markov_ci(0.0, l2 + extra, level).unwrap().half_width();
            prop_assert!(b >= a);
        }

        #[test]
        fn c_beta_positive_and_continuous(beta in 0.05f64..1.95) {
            let v = c_beta(beta).unwrap();
            prop_assert!(v > 0.0 && v.is_finite());
            prop_assert!((c_beta(beta + 1e-7).unwrap() - v).abs() < 1e-4);
        }
    }
}
