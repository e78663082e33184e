//! Exact samplers for the one-sided α-stable subordinator, symmetric and
//! isotropic β-stable laws, and the inverse-subordinator hitting time.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Index of the one-sided stable subordinator, normalised so that
/// `E[exp(-u τ₁)] = exp(-u^α)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubordinatorSpec {
    alpha: f64,
}

impl SubordinatorSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain("alpha", alpha, "0 < alpha < 1"));
        }
        Ok(SubordinatorSpec { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Symmetric β-stable law in `d` dimensions with iid coordinates, each with
/// characteristic function `exp(-c |z|^β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableSpec {
    beta: f64,
    c: f64,
    d: usize,
}

impl StableSpec {
    pub fn new(beta: f64, c: f64, d: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(Error::domain("beta", beta, "0 < beta <= 2"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain("c", c, "c > 0"));
        }
        if d == 0 {
            return Err(Error::domain("d", 0.0, "d >= 1"));
        }
        Ok(StableSpec { beta, c, d })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Scale σ of the S_β(σ, 0, 0) parametrisation, σ^β = c.
    pub fn sigma(&self) -> f64 {
        libm::pow(self.c, 1.0 / self.beta)
    }
}

/// Time window `[a, t]`; `abar = t - a` is always derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeWindow {
    a: f64,
    t: f64,
}

impl TimeWindow {
    pub fn new(a: f64, t: f64) -> Result<Self> {
        if !(a.is_finite() && t.is_finite()) {
            return Err(Error::domain("t - a", t - a, "finite window"));
        }
        if t < a {
            return Err(Error::domain("t - a", t - a, "t >= a"));
        }
        Ok(TimeWindow { a, t })
    }

    /// Window `[0, abar]`.
    pub fn with_length(abar: f64) -> Result<Self> {
        Self::new(0.0, abar)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn abar(&self) -> f64 {
        self.t - self.a
    }
}

/// Kanter's representation of τ₁, returned as `-α ln τ₁`.
///
/// τ₁ = (A(U)/E)^{(1-α)/α} with U uniform on (0, π), E unit exponential and
/// A(u) = [sin(αu)^α sin((1-α)u)^{1-α} / sin u]^{1/(1-α)}, hence
/// -α ln τ₁ = ln sin u - α ln sin(αu) - (1-α) ln sin((1-α)u) + (1-α) ln E.
#[inline]
fn neg_alpha_log_tau(alpha: f64, rng: &mut RngStream) -> f64 {
    let u = rng.uniform_open(0.0, PI);
    let e = rng.exponential();
    libm::log(libm::sin(u))
        - alpha * libm::log(libm::sin(alpha * u))
        - (1.0 - alpha) * libm::log(libm::sin((1.0 - alpha) * u))
        + (1.0 - alpha) * libm::log(e)
}

/// One draw of τ₁ (two uniforms).
pub fn sample_subordinator_unit(spec: SubordinatorSpec, rng: &mut RngStream) -> f64 {
    let alpha = spec.alpha;
    libm::exp(-neg_alpha_log_tau(alpha, rng) / alpha)
}

/// One draw of the hitting time `T_t = (abar/τ₁)^α`. Returns exactly 0 when abar = 0,
/// after consuming the same two uniforms as any other draw.
pub fn sample_hitting_time(spec: SubordinatorSpec, win: TimeWindow, rng: &mut RngStream) -> f64 {
    let alpha = spec.alpha;
    let s = neg_alpha_log_tau(alpha, rng);
    let abar = win.abar();
    if abar == 0.0 {
        return 0.0;
    }
    libm::exp(alpha * libm::log(abar) + s)
}

/// Precomputed constants for symmetric β-stable draws with unit scale
/// (characteristic function `exp(-|z|^β)`).
#[derive(Clone, Copy, Debug)]
pub struct SymmetricStable {
    beta: f64,
    inv_beta: f64,
    tail_exp: f64,
}

impl SymmetricStable {
    pub fn new(beta: f64) -> Self {
        SymmetricStable { beta, inv_beta: 1.0 / beta, tail_exp: (1.0 - beta) / beta }
    }

    /// Chambers–Mallows–Stuck, symmetric case; β = 2 is a centred Gaussian
    /// of variance 2 (Box–Muller, cosine branch).
    #[inline]
    pub fn unit(&self, rng: &mut RngStream) -> f64 {
        if self.beta == 2.0 {
            let r = libm::sqrt(2.0 * rng.exponential());
            let theta = 2.0 * PI * rng.uniform();
            return libm::sqrt(2.0) * r * libm::cos(theta);
        }
        let v = rng.uniform_open(-FRAC_PI_2, FRAC_PI_2);
        let e = rng.exponential();
        if self.beta == 1.0 {
            return libm::tan(v);
        }
        let cos_v = libm::cos(v);
        let log_mag = self.tail_exp * (libm::log(libm::cos((1.0 - self.beta) * v)) - libm::log(e))
            - self.inv_beta * libm::log(cos_v);
        libm::sin(self.beta * v) * libm::exp(log_mag)
    }

    /// Scale factor `(c·dt)^{1/β}` turning a unit draw into an increment over `dt`.
    #[inline]
    pub fn scale(&self, c: f64, dt: f64) -> f64 {
        libm::pow(c * dt, self.inv_beta)
    }
}

/// One scalar increment over a time step `dt`, with characteristic function
/// `exp(-dt·c|z|^β)`.
pub fn sample_symmetric_stable(spec: StableSpec, dt: f64, rng: &mut RngStream) -> f64 {
    let s = SymmetricStable::new(spec.beta);
    s.scale(spec.c, dt) * s.unit(rng)
}

/// `d` independent coordinates, each as [`sample_symmetric_stable`].
pub fn sample_isotropic_vector(spec: StableSpec, dt: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut out = vec![0.0; spec.d];
    fill_isotropic(spec, dt, rng, &mut out);
    out
}

pub(crate) fn fill_isotropic(spec: StableSpec, dt: f64, rng: &mut RngStream, out: &mut [f64]) {
    let s = SymmetricStable::new(spec.beta);
    let scale = s.scale(spec.c, dt);
    for v in out.iter_mut() {
        *v = scale * s.unit(rng);
    }
}

/// `x + T_t^{1/β} X₁` from one hitting-time draw followed by one isotropic draw.
pub fn sample_terminal_state(
    sub: SubordinatorSpec,
    stable: StableSpec,
    win: TimeWindow,
    x: &[f64],
    rng: &mut RngStream,
) -> Vec<f64> {
    let mut out = x.to_vec();
    add_terminal_displacement(sub, stable, win, rng, &mut out);
    out
}

/// Adds `T_t^{1/β} X₁` to `state` and returns the hitting time drawn.
pub(crate) fn add_terminal_displacement(
    sub: SubordinatorSpec,
    stable: StableSpec,
    win: TimeWindow,
    rng: &mut RngStream,
    state: &mut [f64],
) -> f64 {
    let t_hit = sample_hitting_time(sub, win, rng);
    let s = SymmetricStable::new(stable.beta);
    let scale = s.scale(stable.c, 1.0) * libm::pow(t_hit, 1.0 / stable.beta);
    for v in state.iter_mut() {
        let draw = s.unit(rng);
        if t_hit > 0.0 {
            *v += scale * draw;
        }
    }
    t_hit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(SubordinatorSpec::new(1.0).is_err());
        assert!(SubordinatorSpec::new(0.0).is_err());
        assert!(StableSpec::new(2.1, 1.0, 1).is_err());
        assert!(StableSpec::new(1.5, 0.0, 1).is_err());
        assert!(StableSpec::new(1.5, 1.0, 0).is_err());
        assert!(TimeWindow::new(2.0, 1.0).is_err());
        let w = TimeWindow::new(1.5, 4.0).unwrap();
        assert_eq!(w.abar(), 2.5);
        let s = StableSpec::new(1.5, 8.0, 2).unwrap();
        assert!((s.sigma() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn subordinator_draws_positive() {
        for &alpha in &[0.05, 0.3, 0.5, 0.95] {
            let spec = SubordinatorSpec::new(alpha).unwrap();
            let mut rng = RngStream::new(11, 0);
            for _ in 0..20_000 {
                let v = sample_subordinator_unit(spec, &mut rng);
                assert!(v > 0.0 && v.is_finite(), "alpha {alpha}: {v}");
            }
        }
    }

    #[test]
    fn zero_window_gives_zero_time_and_start_point() {
        let sub = SubordinatorSpec::new(0.5).unwrap();
        let stable = StableSpec::new(1.5, 1.0, 3).unwrap();
        let win = TimeWindow::new(2.0, 2.0).unwrap();
        let mut rng = RngStream::new(1, 1);
        assert_eq!(sample_hitting_time(sub, win, &mut rng), 0.0);
        let x = [0.25, -1.0, 3.5];
        assert_eq!(sample_terminal_state(sub, stable, win, &x, &mut rng), x.to_vec());
    }

    #[test]
    fn hitting_time_monotone_in_window() {
        let sub = SubordinatorSpec::new(0.7).unwrap();
        for id in 0..200 {
            let mut prev = -1.0;
            for k in 1..20 {
                let win = TimeWindow::with_length(0.5 * k as f64).unwrap();
                let t = sample_hitting_time(sub, win, &mut RngStream::new(5, id));
                assert!(t > prev);
                prev = t;
            }
        }
    }

    #[test]
    fn cauchy_and_gaussian_branches() {
        let mut rng = RngStream::new(2, 2);
        let cauchy = StableSpec::new(1.0, 1.0, 1).unwrap();
        let gauss = StableSpec::new(2.0, 0.5, 1).unwrap();
        let n = 200_000;
        let mut inside = 0usize;
        let mut sq = 0.0;
        for _ in 0..n {
            // P(|C| < 1) = 1/2 for a standard Cauchy
            if libm::fabs(sample_symmetric_stable(cauchy, 1.0, &mut rng)) < 1.0 {
                inside += 1;
            }
            let g = sample_symmetric_stable(gauss, 1.0, &mut rng);
            sq += g * g;
        }
        let frac = inside as f64 / n as f64;
        assert!((frac - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
        // variance 2·c·dt = 1
        assert!((sq / n as f64 - 1.0).abs() < 0.02);
    }
}
