//! Closed forms for catalog problems: φ and g constant or of the form κ|x|^η.

use crate::bounds::{frac_moment_stable, hitting_time_moment};
use crate::error::{Error, Result};
use crate::problem::{Function, ProblemSpec, Shape};

fn exact_geometry(problem: &ProblemSpec) -> bool {
    problem.dim() == 1 && problem.x.iter().all(|&v| v == 0.0)
}

/// `E|X₁^{(1)}|^q E[T_t^{q/β}]`: the exact `E|X_{T_t}^0|^q` in one dimension.
fn centred_power_moment(problem: &ProblemSpec, q: f64) -> Result<f64> {
    let beta = problem.beta();
    Ok(frac_moment_stable(q, beta, problem.stable.c(), 1.0)?
        * hitting_time_moment(q / beta, problem.alpha(), problem.abar())?)
}

/// Upper bound on `E|X_{T_t}^x|^q` for `0 ≤ q < β`; exact when d = 1 and x = 0.
///
/// With `Y = T_t^{1/β} X₁`: `|Y|^q ≤ d^{max(q/2 - 1, 0)} Σ_j |Y_j|^q`, and
/// `|x + Y|^q ≤ 2^{max(q - 1, 0)} (|x|^q + |Y|^q)`.
pub fn terminal_power_moment(problem: &ProblemSpec, q: f64) -> Result<f64> {
    if !(q >= 0.0 && q < problem.beta()) {
        return Err(Error::domain("moment order", q, "0 <= q < beta"));
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    let d = problem.dim() as f64;
    let centred = centred_power_moment(problem, q)? * d * libm::pow(d, (q / 2.0 - 1.0).max(0.0));
    let r = problem.x_norm();
    if r == 0.0 {
        return Ok(centred);
    }
    Ok(libm::pow(2.0, (q - 1.0).max(0.0)) * (libm::pow(r, q) + centred))
}

/// Upper bound on `E|g(X_{T_t}^x)|^p` for catalog forcings.
pub fn forcing_terminal_moment(problem: &ProblemSpec, p: f64) -> Result<f64> {
    function_terminal_moment(problem, &problem.g, p)
}

/// Upper bound on `E|f(X_{T_t}^x)|^p` for a catalog function `f`.
pub fn function_terminal_moment(problem: &ProblemSpec, f: &Function, p: f64) -> Result<f64> {
    match f.shape() {
        Shape::Const(k) => Ok(libm::pow(libm::fabs(k), p)),
        Shape::Power { kappa, .. } if kappa == 0.0 => Ok(0.0),
        Shape::Power { kappa, eta } => Ok(libm::pow(libm::fabs(kappa), p) * terminal_power_moment(problem, eta * p)?),
        Shape::Opaque => Err(Error::Config("function is not in the catalog; supply its terminal moments".into())),
    }
}

/// `E[φ(X_{T_t}^x)]` in closed form, when available.
pub fn phi_reference(problem: &ProblemSpec) -> Option<f64> {
    match problem.phi.shape() {
        Shape::Const(k) => Some(k),
        Shape::Power { kappa, .. } if kappa == 0.0 => Some(0.0),
        Shape::Power { kappa, eta } if exact_geometry(problem) => {
            centred_power_moment(problem, eta).ok().map(|m| kappa * m)
        }
        _ => None,
    }
}

/// `E ∫₀^{T_t} g(X_s^x) ds` in closed form, when available.
///
/// For `g = κ|x|^η` at x = 0 in one dimension this is
/// `κ E|X₁|^η E[T_t^{1+η/β}] / (1 + η/β)`.
pub fn forcing_reference(problem: &ProblemSpec) -> Option<f64> {
    let (alpha, beta, abar) = (problem.alpha(), problem.beta(), problem.abar());
    match problem.g.shape() {
        Shape::Const(k) => hitting_time_moment(1.0, alpha, abar).ok().map(|t| k * t),
        Shape::Power { kappa, .. } if kappa == 0.0 => Some(0.0),
        Shape::Power { kappa, eta } if exact_geometry(problem) => {
            let r = eta / beta;
            let m = frac_moment_stable(eta, beta, problem.stable.c(), 1.0).ok()?;
            let t = hitting_time_moment(1.0 + r, alpha, abar).ok()?;
            Some(kappa * m * t / (1.0 + r))
        }
        _ => None,
    }
}

/// The exact solution `u(t, x)` for catalog problems that admit one.
pub fn reference_value(problem: &ProblemSpec) -> Option<f64> {
    Some(phi_reference(problem)? + forcing_reference(problem)?)
}
